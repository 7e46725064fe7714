#include "choquard/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "choquard/error.hpp"

namespace choquard {

namespace {

void check_state(const GroundState& state) {
  require(state.field.grid != nullptr, "state needs a grid");
  if (state.field.values.size() != state.field.grid->size())
    fail(ErrorCode::grid_mismatch, "field length differs from grid size");
  require(state.field.grid->dim() == state.params.d, "grid dimension differs from d");
}

bool is_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// N(u) of the equation -Δu + u = N(u).
std::vector<double> nonlinearity(const GroundState& state, KernelMethod method) {
  const auto& u = state.field.values;
  const double p = state.params.p;
  std::vector<double> n(u.size());
  if (state.model) {
    for (std::size_t i = 0; i < u.size(); ++i) n[i] = std::copysign(std::pow(std::abs(u[i]), p), u[i]);
    return n;
  }
  if (is_zero(u)) return n;
  const auto v = choquard_potential(state.params, state.field, method);
  for (std::size_t i = 0; i < u.size(); ++i) n[i] = v[i] * std::copysign(std::pow(std::abs(u[i]), p - 1.0), u[i]);
  return n;
}

}  // namespace

double PohozaevReport::max_relative() const { return *std::max_element(relative.begin(), relative.end()); }

PohozaevReport pohozaev_report(const GroundState& state, KernelMethod method) {
  check_state(state);
  const RadialGrid& g = *state.field.grid;
  const auto& u = state.field.values;
  const auto m = g.masses();
  const double area = g.sphere_area();
  const int d = state.params.d;

  PohozaevReport rep;
  const auto n = nonlinearity(state, method);
  for (std::size_t i = 0; i < u.size(); ++i) {
    rep.mass_sq += m[i] * u[i] * u[i];
    rep.nonlocal_energy += m[i] * u[i] * n[i];
  }
  rep.mass_sq *= area;
  rep.nonlocal_energy *= area;
  rep.grad_sq = area * SectorLaplacian(state.field.grid, 0).dirichlet_form(u);

  // The local model is the nonlocal equation with a delta kernel: alpha = d, p -> (p+1)/2.
  const double alpha = state.model ? d : state.params.alpha;
  const double p = state.model ? 0.5 * (state.params.p + 1.0) : state.params.p;
  const double hom = 2.0 * d - alpha;
  const double E = rep.nonlocal_energy;
  const double G = rep.grad_sq;
  const double M = rep.mass_sq;
  rep.residual = {std::abs(G + M - E), std::abs(0.5 * (d - 2) * G + 0.5 * d * M - hom / (2.0 * p) * E),
                  std::abs(G - (p * d - hom) / (2.0 * p) * E), std::abs(M - (hom - p * (d - 2)) / (2.0 * p) * E)};
  const double scale = std::max(G, M);
  for (int k = 0; k < 4; ++k) rep.relative[k] = scale > 0.0 ? rep.residual[k] / scale : 0.0;
  rep.residual_func01 = rep.residual[0];
  rep.residual_func02 = rep.residual[1];
  rep.ratio_defined = M > 0.0;
  rep.ratio_grad_mass = rep.ratio_defined ? G / M : 0.0;
  rep.predicted_ratio = state.model ? predicted_model_ratio(d, state.params.p) : predicted_gradient_mass_ratio(state.params);
  return rep;
}

bool WitnessCheck::accepted(double tol) const {
  return intervals_ok && std::all_of(equality_residual.begin(), equality_residual.end(), [&](double x) { return x <= tol; });
}

namespace {

// Reciprocal exponents a = 1/r, b = 1/t, c = 1/s.
struct Reciprocals {
  double a, a1, a2, a3, b, b1, c;
};

struct Bounds {
  double r_lo;  // lower bound of 1/r (closed)
  double b_lo;  // lower bound of 1/t (closed, also > 0)
  double b_hi;  // upper bound of 1/t (open, also < 1)
};

Bounds bounds(const ChoquardParams& q) {
  const int d = q.d;
  Bounds b;
  b.r_lo = d > 2 ? (d - 2.0) / (2.0 * d) : 0.0;
  b.b_lo = q.p * (d - 2.0) / (2.0 * d) - (d - q.alpha) / d;
  b.b_hi = std::min(q.alpha / d, 1.0);
  return b;
}

// Smallest slack over all inequality constraints; open constraints count as violated at zero slack.
struct Slack {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::string> violated;

  void closed(double s, const char* name, double tol) {
    value = std::min(value, s);
    if (s < -tol) violated.emplace_back(name);
  }
  void open(double s, const char* name) {
    value = std::min(value, s);
    if (!(s > 0.0)) violated.emplace_back(name);
  }
};

Slack slack(const ChoquardParams& q, const Reciprocals& x, double tol) {
  const Bounds bd = bounds(q);
  const int d = q.d;
  const double p = q.p;
  Slack s;
  const std::pair<double, const char*> rs[] = {{x.a, "r"}, {x.a1, "r1"}, {x.a2, "r2"}, {x.a3, "r3"}};
  for (const auto& [v, name] : rs) {
    s.closed(v - bd.r_lo, name, tol);
    s.closed(0.5 - v, name, tol);
    if (d <= 2) s.open(v, name);
  }
  const std::pair<double, const char*> ts[] = {{x.b, "t"}, {x.b1, "t1"}};
  for (const auto& [v, name] : ts) {
    s.closed(v - bd.b_lo, name, tol);
    s.open(bd.b_hi - v, name);
    s.open(v, name);
  }
  s.closed(x.c - 2.0 / d, "s", tol);
  s.closed(1.0 - x.c, "s", tol);
  s.closed(x.c - x.a, "s", tol);
  s.closed(x.a + 2.0 / d - x.c, "s", tol);
  // r1 >= p-2, r2 >= p-1, r3 >= p-1.
  if (p > 2.0) s.closed(1.0 - (p - 2.0) * x.a1, "r1 >= p-2", tol);
  s.closed(1.0 - (p - 1.0) * x.a2, "r2 >= p-1", tol);
  s.closed(1.0 - (p - 1.0) * x.a3, "r3 >= p-1", tol);
  return s;
}

std::array<double, 3> equalities(const ChoquardParams& q, const Reciprocals& x) {
  const double p = q.p;
  return {std::abs(x.b1 + (p - 2.0) * x.a1 + x.a - x.c), std::abs((p - 1.0) * x.a2 + x.b - x.c),
          std::abs(x.b + (q.d - q.alpha) / q.d - (p - 1.0) * x.a3 - x.a)};
}

Reciprocals reciprocals(const ExponentWitness& w) {
  return {1.0 / w.r, 1.0 / w.r1, 1.0 / w.r2, 1.0 / w.r3, 1.0 / w.t, 1.0 / w.t1, 1.0 / w.s};
}

ExponentWitness exponents(const Reciprocals& x) {
  return {1.0 / x.a, 1.0 / x.a1, 1.0 / x.a2, 1.0 / x.a3, 1.0 / x.b, 1.0 / x.b1, 1.0 / x.c};
}

bool assumption_applies(const ChoquardParams& q) {
  const double inv_p = 1.0 / q.p;
  const double hom = 2.0 * q.d - q.alpha;
  return q.p >= 2.0 && q.d / hom > inv_p && inv_p > (q.d - 2.0) / hom;
}

}  // namespace

WitnessCheck check_witness(const ChoquardParams& params, const ExponentWitness& w) {
  const Reciprocals x = reciprocals(w);
  WitnessCheck out;
  out.equality_residual = equalities(params, x);
  Slack s = slack(params, x, 1e-12);
  out.violations = std::move(s.violated);
  out.intervals_ok = out.violations.empty();
  return out;
}

std::optional<ExponentWitness> reference_witness(const ChoquardParams& q) {
  const double a = q.alpha;
  const double p = q.p;
  if (q.d == 3)
    return ExponentWitness{8.0 / 3.0, 8.0 / 3.0, 8.0 / 3.0 * (p - 1.0), 12.0 * (p - 1.0) / (3.0 - 4.0 * (a - 1.0)),
                           24.0 / 7.0, 24.0 / (7.0 - 9.0 * (p - 2.0)), 1.5};
  if (q.d == 4)
    return ExponentWitness{8.0 / 3.0, 8.0 / 3.0, 8.0 * (p - 1.0) / 3.0, 8.0 * (p - 1.0) / (3.0 - 2.0 * (a - 2.0)),
                           4.0, 8.0 / (2.0 - 3.0 * (p - 2.0)), 1.6};
  return std::nullopt;
}

FeasibilityReport assumption12_feasible(const ChoquardParams& params, int resolution) {
  require(resolution >= 2, "resolution must be at least 2");
  FeasibilityReport rep;
  rep.applicable = assumption_applies(params);
  if (!rep.applicable) return rep;
  const Bounds bd = bounds(params);
  const int d = params.d;
  const double p = params.p;
  const double b_lo = std::max(bd.b_lo, 0.0);
  const auto node = [&](double lo, double hi, int k) { return lo + (hi - lo) * k / (resolution - 1); };

  double best = -std::numeric_limits<double>::infinity();
  Reciprocals arg{};
  const int a1_count = p > 2.0 ? resolution : 1;
  for (int ia = 0; ia < resolution; ++ia) {
    const double a = node(bd.r_lo, 0.5, ia);
    for (int ic = 0; ic < resolution; ++ic) {
      const double c = node(2.0 / d, 1.0, ic);
      for (int ib = 0; ib < resolution; ++ib) {
        const double b = node(b_lo, bd.b_hi, ib);
        for (int i1 = 0; i1 < a1_count; ++i1) {
          Reciprocals x{};
          x.a = a;
          x.c = c;
          x.b = b;
          x.a1 = p > 2.0 ? node(bd.r_lo, 0.5, i1) : 0.5 * (bd.r_lo + 0.5);
          x.b1 = c - (p - 2.0) * x.a1 - a;
          x.a2 = (c - b) / (p - 1.0);
          x.a3 = (b + (d - params.alpha) / d - a) / (p - 1.0);
          const Slack s = slack(params, x, 0.0);
          if (s.violated.empty() && s.value > best) {
            best = s.value;
            arg = x;
          }
        }
      }
    }
  }
  if (std::isfinite(best)) {
    rep.feasible = true;
    rep.witness = exponents(arg);
    rep.slack = best;
  }
  return rep;
}

AprioriReport apriori_report(const GroundState& state, std::span<const double> exponents, KernelMethod method) {
  check_state(state);
  const GridPtr& grid = state.field.grid;
  const RadialGrid& g = *grid;
  const int d = g.dim();
  const auto& u = state.field.values;
  const auto m = g.masses();
  const double area = g.sphere_area();
  const auto r = g.nodes();

  const auto du = radial_derivative(state.field).values;
  // Δu = u - N(u) from the equation; u'' = Δu - (d-1) u'/r.
  const auto n = nonlinearity(state, method);
  std::vector<double> hess(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lap = u[i] - n[i];
    const double tangential = du[i] / r[i];
    const double urr = lap - (d - 1) * tangential;
    hess[i] = std::sqrt(urr * urr + (d - 1) * tangential * tangential);
  }
  const auto lq = [&](const std::vector<double>& f, double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += m[i] * std::pow(std::abs(f[i]), q);
    return area * s;
  };

  AprioriReport rep;
  double mass = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) mass += m[i] * u[i] * u[i];
  rep.H1 = std::sqrt(std::max(0.0, area * (mass + SectorLaplacian(grid, 0).dirichlet_form(u))));
  for (double q : exponents) {
    require(q >= 1.0 && std::isfinite(q), "norm exponents must be finite and >= 1");
    rep.lq.emplace_back(q, std::pow(lq(u, q), 1.0 / q));
    rep.w2r.emplace_back(q, std::pow(lq(u, q) + lq(du, q) + lq(hess, q), 1.0 / q));
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    if (r[i] >= 1.0) rep.decay_certificate = std::max(rep.decay_certificate, (std::abs(du[i]) + std::abs(u[i])) * std::exp(0.5 * r[i]));
  return rep;
}

double exp_tail_integral(double R, double alpha, double beta) {
  require(std::isfinite(R) && R >= 1.0, "R must be >= 1");
  require(std::isfinite(beta) && beta >= 0.5, "beta must be >= 1/2");
  require(std::isfinite(alpha), "alpha must be finite");
  const auto f = [&](double r) { return std::pow(r, -alpha) * std::exp(-beta * r); };
  // Fifty pieces of length 1/beta carry all but e^{-50} of the integral.
  const double h = 1.0 / beta;
  double sum = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double lo = R + k * h;
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, lo + h, 5, 1e-15);
  }
  const double X = R + 50.0 * h;
  // Leading term of the asymptotic expansion of the remainder.
  if (beta + alpha / X > 0.0) sum += std::pow(X, -alpha) * std::exp(-beta * X) / (beta + alpha / X);
  return sum;
}

}  // namespace choquard
