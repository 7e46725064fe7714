#include "choquard/params.hpp"

#include <cmath>
#include <sstream>

#include "choquard/error.hpp"

namespace choquard {

ChoquardParams ChoquardParams::make(int d, double alpha, double p) {
  require(d >= 1, "dimension must be >= 1");
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < d, "alpha outside (0,d)");
  require(std::isfinite(p) && p >= 1.0, "p must be >= 1");
  return ChoquardParams{d, alpha, p};
}

bool ChoquardParams::in_window_para2() const noexcept {
  const double inv_p = 1.0 / p;
  return p > 1.0 && inv_p <= 0.5 && inv_p > (d - 2.0) / (2.0 * d - alpha);
}

bool ChoquardParams::in_window_existence() const noexcept {
  const double inv_p = 1.0 / p;
  return p > 1.0 && inv_p < d / (2.0 * d - alpha) && inv_p > (d - 2.0) / (2.0 * d - alpha);
}

bool ChoquardParams::near_newtonian(double delta) const noexcept {
  return std::abs(alpha - (d - 2.0)) <= delta && p - 2.0 >= 0.0 && p - 2.0 <= delta;
}

bool ChoquardParams::newtonian_alpha() const noexcept { return d >= 3 && alpha == d - 2.0; }

std::string ChoquardParams::to_string() const {
  std::ostringstream os;
  os.precision(10);
  os << "(d=" << d << ", alpha=" << alpha << ", p=" << p << ")";
  return os.str();
}

double predicted_gradient_mass_ratio(const ChoquardParams& q) {
  const double hls = 2.0 * q.d - q.alpha;
  return (q.p * q.d - hls) / (hls - q.p * (q.d - 2.0));
}

double predicted_model_ratio(int d, double p) {
  return d * (p - 1.0) / ((d + 2.0) - p * (d - 2.0));
}

}  // namespace choquard
