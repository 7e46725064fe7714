#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "choquard/params.hpp"
#include "choquard/solver.hpp"

namespace choquard {

/// Global functional identities of a solution, with E the nonlinear energy:
///   (1) G + M = E
///   (2) (d-2)/2 G + d/2 M = (2d-alpha)/(2p) E
///   (3) G = (pd-(2d-alpha))/(2p) E
///   (4) M = ((2d-alpha)-p(d-2))/(2p) E
/// where G = ‖∇u‖², M = ‖u‖², E = ∫(|x|^{-alpha} * |u|^p)|u|^p.
/// For the local model E = ∫|u|^{p+1} and 2d-alpha, 2p are replaced by 2d, p+1.
struct PohozaevReport {
  double nonlocal_energy = 0.0;
  double grad_sq = 0.0;
  double mass_sq = 0.0;
  /// Absolute residuals of (1)..(4).
  std::array<double, 4> residual{};
  /// residual / max(grad_sq, mass_sq); zero when both vanish.
  std::array<double, 4> relative{};
  double residual_func01 = 0.0;
  double residual_func02 = 0.0;
  double ratio_grad_mass = 0.0;
  /// False when mass_sq = 0 (ratio_grad_mass is then meaningless).
  bool ratio_defined = false;
  double predicted_ratio = 0.0;

  double max_relative() const;
};

PohozaevReport pohozaev_report(const GroundState& state, KernelMethod method = KernelMethod::automatic);

/// Exponents of the integrability assumption used for the moving-plane symmetry result.
struct ExponentWitness {
  double r = 0.0, r1 = 0.0, r2 = 0.0, r3 = 0.0;
  double t = 0.0, t1 = 0.0, s = 0.0;
};

struct WitnessCheck {
  /// |1/t1 + (p-2)/r1 + 1/r - 1/s|, |(p-1)/r2 + 1/t - 1/s|, |1/t + (d-alpha)/d - (p-1)/r3 - 1/r|.
  std::array<double, 3> equality_residual{};
  bool intervals_ok = false;
  /// Names of violated interval constraints.
  std::vector<std::string> violations;

  bool accepted(double tol = 1e-12) const;
};

WitnessCheck check_witness(const ChoquardParams& params, const ExponentWitness& w);

/// The explicit witness listed for d = 3 and d = 4 near (d-2, 2); empty for other d.
std::optional<ExponentWitness> reference_witness(const ChoquardParams& params);

struct FeasibilityReport {
  bool applicable = false;
  bool feasible = false;
  std::optional<ExponentWitness> witness;
  /// Smallest normalized slack of the inequality constraints at the witness.
  double slack = 0.0;
};

/// Search for exponents satisfying the assumption. The equalities are linear in the
/// reciprocals (1/r, 1/r1, ...); three of them are eliminated and the remaining four
/// reciprocals are scanned on a lattice of `resolution` points per axis. Returns the
/// lattice point with the largest slack. Not applicable unless p >= 2 and
/// d/(2d-alpha) > 1/p > (d-2)/(2d-alpha).
FeasibilityReport assumption12_feasible(const ChoquardParams& params, int resolution = 33);

struct AprioriReport {
  /// (q, ‖u‖_{L^q}) for each requested exponent.
  std::vector<std::pair<double, double>> lq;
  double H1 = 0.0;
  /// (r, ‖u‖_{W^{2,r}}) with second derivatives taken from the equation.
  std::vector<std::pair<double, double>> w2r;
  /// sup over s >= 1 of (|u'(s)| + u(s)) e^{s/2}.
  double decay_certificate = 0.0;
};

AprioriReport apriori_report(const GroundState& state, std::span<const double> exponents,
                             KernelMethod method = KernelMethod::automatic);

/// ∫_R^∞ r^{-alpha} e^{-beta r} dr for R >= 1, beta >= 1/2.
double exp_tail_integral(double R, double alpha, double beta);

}  // namespace choquard
