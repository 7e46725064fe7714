#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "choquard/error.hpp"
#include "choquard/riesz.hpp"
#include "kernel_detail.hpp"
#include "quadrature.hpp"

namespace choquard {

namespace detail {

double sphere_area(int k) {
  // |S^k| = 2 π^{(k+1)/2} / Γ((k+1)/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / boost::math::tgamma(0.5 * (k + 1));
}

double singular_coefficient(int d, double alpha, double r) {
  if (d == 1) return 1.0;
  const double a = 0.5 * (d - 1);
  const double b = 0.5 * (alpha - d + 1);
  return sphere_area(d - 2) * std::pow(r, -(d - 1.0)) * 0.5 * boost::math::beta(a, b);
}

}  // namespace detail

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Newtonian alpha = d - 2, d >= 3.
double newton_kernel(int d, int ell, double lo, double hi) {
  const double area = detail::sphere_area(d - 1);
  if (ell == 0) return area / std::pow(hi, d - 2);
  return area * (d - 2.0) / d * lo / std::pow(hi, d - 1);
}

// Closed form for odd d >= 3: substitute w = u - v t in
//   ∫_{-1}^{1} (u - v t)^{-alpha/2} t^ell (1 - t^2)^{(d-3)/2} dt.
double odd_closed_form(int d, double alpha, int ell, double lo, double hi) {
  const double u = lo * lo + hi * hi;
  const double v = 2.0 * lo * hi;
  const double A = (hi + lo) * (hi + lo);
  const double B = (hi - lo) * (hi - lo);
  const double beta = 1.0 - 0.5 * alpha;

  // P(t) = t^ell (1 - t^2)^m as coefficients in t.
  const int m = (d - 3) / 2;
  std::array<std::array<double, 16>, 16> binom{};
  for (int j = 0; j < 16; ++j) {
    binom[j][0] = 1.0;
    for (int i = 1; i <= j; ++i) binom[j][i] = binom[j - 1][i - 1] + (i < j ? binom[j - 1][i] : 0.0);
  }
  std::array<double, 16> p{};
  for (int k = 0; k <= m; ++k) p[2 * k + ell] = binom[m][k] * ((k % 2) ? -1.0 : 1.0);
  const int deg = 2 * m + ell;

  auto power_integral = [&](int i) {
    const double e = i + beta;
    if (std::abs(e) < 1e-14) return std::log(A / B);
    return (std::pow(A, e) - std::pow(B, e)) / e;
  };

  double total = 0.0;
  for (int j = 0; j <= deg; ++j) {
    if (p[j] == 0.0) continue;
    double inner = 0.0;
    for (int i = 0; i <= j; ++i) {
      const double c = binom[j][i] * std::pow(u, j - i) *
                       ((i % 2) ? -1.0 : 1.0);
      inner += c * power_integral(i);
    }
    total += p[j] * inner / std::pow(v, j);
  }
  return detail::sphere_area(d - 2) * total / v;
}

// Series in x = 2rs/(r²+s²): (u - v cos θ)^{-a} = u^{-a} Σ_k (a)_k/k! x^k cos^k θ.
double series_kernel(int d, double alpha, int ell, double lo, double hi) {
  const double u = lo * lo + hi * hi;
  const double x = 2.0 * lo * hi / u;
  const double a = 0.5 * alpha;
  const double half = 0.5 * (d - 1);
  // k has the parity of ell; M_m = B((m+1)/2, (d-1)/2) for m = k + ell even.
  int k = ell;
  double coef = ell == 0 ? 1.0 : a;  // (a)_k / k!
  double xk = ell == 0 ? 1.0 : x;
  double moment = boost::math::beta(0.5 * (k + ell + 1), half);
  double sum = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double term = coef * xk * moment;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    const int mm = k + ell;
    moment *= (mm + 1.0) / (mm + d);
    coef *= (a + k) * (a + k + 1.0) / ((k + 1.0) * (k + 2.0));
    xk *= x * x;
    k += 2;
  }
  return detail::sphere_area(d - 2) * std::pow(u, -a) * sum;
}

// θ-quadrature graded toward θ = 0, where the integrand peaks on the scale |r-s|/√(rs).
double angular_kernel(int d, double alpha, int ell, double lo, double hi) {
  const double diff = hi - lo;
  const double rs = lo * hi;
  if (diff == 0.0 && alpha >= d - 1.0) return kInf;
  const double scale = diff / std::sqrt(rs);
  const double a = 0.5 * alpha;
  auto integrand = [&](double th) {
    const double sh = std::sin(0.5 * th);
    const double D = diff * diff + 4.0 * rs * sh * sh;
    double f = std::pow(D, -a);
    if (ell == 1) f *= std::cos(th);
    if (d > 2) f *= std::pow(std::sin(th), d - 2);
    return f;
  };
  const detail::UnitRule& rule = detail::gauss10();
  auto piece = [&](double x0, double x1) {
    double s = 0.0;
    const double len = x1 - x0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.w[q] * integrand(x0 + rule.x[q] * len);
    return s * len;
  };
  double total = 0.0;
  double top = std::numbers::pi;
  for (int level = 0; level < 200; ++level) {
    const double bottom = 0.5 * top;
    total += piece(bottom, top);
    top = bottom;
    if (top < 0.5 * scale) break;
  }
  total += piece(0.0, top);
  return detail::sphere_area(d - 2) * total;
}

}  // namespace

double sector_kernel_value(int d, double alpha, int ell, double r, double s, KernelMethod method) {
  require(d >= 1, "dimension must be >= 1");
  require(alpha > 0.0 && alpha < d, "alpha outside (0,d)");
  if (ell != 0 && ell != 1) fail(ErrorCode::unsupported, "only sectors ell = 0 and ell = 1 are supported");
  require(r >= 0.0 && s >= 0.0, "radii must be nonnegative");
  const double lo = std::min(r, s);
  const double hi = std::max(r, s);

  if (d == 1) {
    const double near = hi > lo ? std::pow(hi - lo, -alpha) : kInf;
    const double far = std::pow(hi + lo, -alpha);
    return ell == 0 ? near + far : near - far;
  }
  if (hi == 0.0) return ell == 0 ? kInf : 0.0;
  if (lo == 0.0) return ell == 0 ? detail::sphere_area(d - 1) * std::pow(hi, -alpha) : 0.0;

  if (method == KernelMethod::automatic && d >= 3 && alpha == d - 2.0) return newton_kernel(d, ell, lo, hi);

  const double x = 2.0 * lo * hi / (lo * lo + hi * hi);
  if (method == KernelMethod::automatic && d % 2 == 1 && d <= 9 && x > 0.5) {
    if (lo == hi && alpha >= d - 1.0) return kInf;
    // Beyond d = 3 the terms cancel to relative order (r-s)^2/(r+s)^2.
    const double gap = (hi - lo) / (hi + lo);
    if (d == 3 || gap * gap >= 1e-3) return odd_closed_form(d, alpha, ell, lo, hi);
  }
  if (x <= 0.6) return series_kernel(d, alpha, ell, lo, hi);
  return angular_kernel(d, alpha, ell, lo, hi);
}

}  // namespace choquard
