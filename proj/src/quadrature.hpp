#pragma once

// Internal quadrature helpers shared by the grid and kernel code.

#include <array>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace choquard::detail {

/// Gauss-Legendre rule mapped to [0, 1].
struct UnitRule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

template <unsigned N>
UnitRule make_unit_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  UnitRule rule;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) {
      rule.x.push_back(0.5);
      rule.w.push_back(0.5 * wt[k]);
      continue;
    }
    rule.x.push_back(0.5 - 0.5 * a[k]);
    rule.w.push_back(0.5 * wt[k]);
    rule.x.push_back(0.5 + 0.5 * a[k]);
    rule.w.push_back(0.5 * wt[k]);
  }
  return rule;
}

inline const UnitRule& gauss7() {
  static const UnitRule rule = make_unit_rule<7>();
  return rule;
}

inline const UnitRule& gauss10() {
  static const UnitRule rule = make_unit_rule<10>();
  return rule;
}

inline const UnitRule& gauss20() {
  static const UnitRule rule = make_unit_rule<20>();
  return rule;
}

/// Integrate f over [a, b] with pieces graded geometrically toward `a`.
/// The innermost piece [a, a + (b-a) 2^-levels] is skipped; callers add an
/// analytic contribution for it when the integrand is singular at `a`.
template <class F>
double graded_integral(F&& f, double a, double b, int levels) {
  const UnitRule& rule = gauss10();
  double total = 0.0;
  double hi = b;
  for (int k = 0; k < levels; ++k) {
    const double lo = a + 0.5 * (hi - a);
    const double len = hi - lo;
    for (std::size_t q = 0; q < rule.size(); ++q) total += rule.w[q] * len * f(lo + rule.x[q] * len);
    hi = lo;
  }
  return total;
}

}  // namespace choquard::detail
