#pragma once

#include <string>

namespace choquard {

/// Parameter triple (d, alpha, p) of the nonlocal equation
///   -Δu + u - (|x|^{-alpha} * |u|^p)|u|^{p-2}u = 0  in R^d.
struct ChoquardParams {
  int d = 3;
  double alpha = 1.0;
  double p = 2.0;

  /// Validating constructor: d >= 1, 0 < alpha < d, p >= 1.
  static ChoquardParams make(int d, double alpha, double p);

  /// 1/2 >= 1/p > (d-2)/(2d-alpha): existence, positivity, regularity and decay window.
  bool in_window_para2() const noexcept;
  /// d/(2d-alpha) > 1/p > (d-2)/(2d-alpha): groundstate existence window.
  bool in_window_existence() const noexcept;
  /// |alpha-(d-2)| <= delta and 0 <= p-2 <= delta.
  bool near_newtonian(double delta) const noexcept;
  /// alpha == d-2 exactly (Newton's theorem applies to the radial potential).
  bool newtonian_alpha() const noexcept;

  std::string to_string() const;

  friend bool operator==(const ChoquardParams&, const ChoquardParams&) = default;
};

/// Ratio ‖∇Q‖²/‖Q‖² forced by the Nehari and Pohozaev identities.
double predicted_gradient_mass_ratio(const ChoquardParams& params);

/// Same ratio for the local model -Δu + u = |u|^{p-1}u.
double predicted_model_ratio(int d, double p);

}  // namespace choquard
