// Acceptance run: one PASS/FAIL line per criterion 1..12.
//
//   acceptance            all criteria
//   acceptance 4 6 11     a subset
//
// Exit status 0 iff every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "choquard/continuation.hpp"
#include "choquard/diagnostics.hpp"
#include "choquard/error.hpp"
#include "choquard/riesz.hpp"
#include "choquard/spectrum.hpp"

using namespace choquard;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ------------------------------------------------------------ shared states

const GridPtr& default_grid(int d) {
  static std::map<int, GridPtr> grids;
  auto& g = grids[d];
  if (!g) g = make_grid(d, 25.0, 600, 1.006);
  return g;
}

const GroundState& choquard_state(int d, double alpha, double p) {
  static std::map<std::tuple<int, double, double>, GroundState> states;
  const auto key = std::make_tuple(d, alpha, p);
  auto it = states.find(key);
  if (it == states.end()) it = states.emplace(key, solve_choquard(ChoquardParams::make(d, alpha, p), default_grid(d))).first;
  return it->second;
}

const GroundState& model_state(double p) {
  static std::map<double, GroundState> states;
  auto it = states.find(p);
  if (it == states.end()) it = states.emplace(p, solve_model(1, p, make_grid(1, 25.0, 2000, 1.0))).first;
  return it->second;
}

const std::vector<SweepRecord>& geometric_sweep() {
  static const std::vector<SweepRecord> recs = [] {
    SweepOptions opts;
    opts.reference = &choquard_state(3, 1.0, 2.0);
    opts.jobs = worker_count();
    return sweep_points(3, geometric_path(3, 4), default_grid(3), opts);
  }();
  return recs;
}

const std::vector<SweepRecord>& lattice_sweep() {
  static const std::vector<SweepRecord> recs = [] {
    SweepOptions opts;
    opts.reference = &choquard_state(3, 1.0, 2.0);
    opts.two_route = true;
    opts.continuation_steps = 2;
    opts.jobs = worker_count();
    const std::vector<double> alphas{0.98, 0.99, 1.0, 1.01, 1.02};
    const std::vector<double> ps{2.0, 2.005, 2.01, 2.015, 2.02};
    return sweep(3, alphas, ps, default_grid(3), opts);
  }();
  return recs;
}

double rel_sup_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

// ------------------------------------------------------------ criteria

void model_oracle(Verdict& v) {
  for (double p : {2.0, 3.0, 4.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& s = model_state(p);
    const double secs = seconds_since(t0);
    const double amp = std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0));
    double err = 0.0;
    for (std::size_t i = 0; i < s.field.size(); ++i) {
      const double r = s.field.grid->nodes()[i];
      if (r > 10.0) break;
      const double exact = amp * std::pow(1.0 / std::cosh((p - 1.0) * r / 2.0), 2.0 / (p - 1.0));
      err = std::max(err, std::abs(s.field.values[i] - exact));
    }
    v.detail << " p=" << p << ": err " << sci(err) << ", " << sci(secs) << " s;";
    v.require(s.converged, "converged");
    v.require(err <= 1e-6, "max error <= 1e-6");
    v.require(secs <= 10.0, "runtime <= 10 s");
  }
}

void newtonian_fast_path(Verdict& v) {
  for (int d = 3; d <= 5; ++d) {
    const auto g = make_grid(d, 12.0, 200, 1.006);
    const auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
    const double diff = rel_sup_diff(riesz_radial(f, d - 2.0).values,
                                     riesz_radial(f, d - 2.0, KernelMethod::angular).values);
    v.detail << " d=" << d << ": " << sci(diff) << ";";
    v.require(diff <= 1e-8, "relative difference <= 1e-8");
  }
}

void known_potentials(Verdict& v) {
  // r = 1 falls on a cell face of this uniform grid.
  const auto ball_grid = make_grid(3, 3999.5 / 1000.0, 4000, 1.0);
  const auto ball = RadialField::sample(ball_grid, [](double r) { return r < 1.0 ? 1.0 : 0.0; });
  const double at2 = interpolate(riesz_radial(ball, 1.0), 2.0);
  const auto g = make_grid(3, 45.0, 3000, 1.0);
  const auto e = RadialField::sample(g, [](double r) { return std::exp(-r); });
  const double at0 = interpolate(riesz_radial(e, 1.0), 0.0);
  const double err_ball = std::abs(at2 / (2.0 * pi / 3.0) - 1.0);
  const double err_exp = std::abs(at0 / (4.0 * pi) - 1.0);
  v.detail << " ball at r=2: " << at2 << " (rel " << sci(err_ball) << "); e^-r at 0: " << at0 << " (rel "
           << sci(err_exp) << ")";
  v.require(err_ball <= 1e-6, "ball potential to 1e-6");
  v.require(err_exp <= 1e-6, "4 pi to 1e-6");
}

const std::tuple<int, double, double> kPohozaevPoints[] = {{3, 1.0, 2.0}, {3, 2.0, 2.0}, {4, 2.0, 2.0}, {5, 3.0, 2.0}};

void pohozaev(Verdict& v) {
  for (const auto& [d, a, p] : kPohozaevPoints) {
    const auto& s = choquard_state(d, a, p);
    const auto rep = pohozaev_report(s);
    const double ratio_err = std::abs(rep.ratio_grad_mass / rep.predicted_ratio - 1.0);
    v.detail << " (" << d << "," << a << "," << p << "): identities " << sci(rep.max_relative()) << ", ratio "
             << sci(ratio_err) << ";";
    v.require(s.converged, "converged");
    v.require(rep.max_relative() <= 1e-4, "identities <= 1e-4");
    v.require(rep.ratio_defined && ratio_err <= 1e-3, "ratio to 1e-3");
  }
}

double lplus_q_error(const GroundState& s) {
  const auto op = assemble_lplus(s, 0);
  const auto lq = apply_lplus(s, 0, s.field.values);
  const double p = s.params.p;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lq.size(); ++i) {
    const double u = s.field.values[i];
    const double target = s.model ? -(p - 1.0) * std::pow(u, p) : -2.0 * (p - 1.0) * op.potential_V.values[i] * u;
    num = std::max(num, std::abs(lq[i] - target));
    den = std::max(den, std::abs(target));
  }
  return num / den;
}

void lplus_identity(Verdict& v) {
  double worst = 0.0;
  int count = 0;
  for (const auto& [d, a, p] : kPohozaevPoints) {
    const auto& s = choquard_state(d, a, p);
    if (!s.converged) continue;
    const double e = lplus_q_error(s);
    worst = std::max(worst, e);
    ++count;
    v.detail << " (" << d << "," << a << "," << p << "): " << sci(e) << ";";
  }
  for (double p : {2.0, 3.0, 4.0}) {
    const auto& s = model_state(p);
    if (!s.converged) continue;
    const double e = lplus_q_error(s);
    worst = std::max(worst, e);
    ++count;
    v.detail << " model p=" << p << ": " << sci(e) << ";";
  }
  v.require(count == 7, "all seven states converged");
  v.require(worst <= 1e-6, "relative error <= 1e-6");
}

void nondegeneracy(Verdict& v) {
  for (const auto& [d, a, p] : {std::tuple{3, 1.0, 2.0}, std::tuple{4, 2.0, 2.0}, std::tuple{5, 3.0, 2.0}}) {
    const auto& s = choquard_state(d, a, p);
    const auto rep = nondegeneracy_verdict(s);
    double gap0 = INFINITY;
    for (double e : rep.eigenvalues_ell0) gap0 = std::min(gap0, std::abs(e));
    v.detail << " (" << d << "," << a << "," << p << "): ell1 " << sci(rep.nearest_zero_ell1) << " corr "
             << rep.translation_correlation << ", ell0 gap " << sci(gap0) << " neg " << rep.negative_count_ell0;
    v.require(std::abs(rep.nearest_zero_ell1) <= 5e-3, "ell=1 eigenvalue in [-5e-3, 5e-3]");
    v.require(rep.translation_correlation > 0.99, "correlation with -Q' > 0.99");
    v.require(gap0 >= 0.05, "no ell=0 eigenvalue in (-0.05, 0.05)");
    v.require(rep.negative_count_ell0 >= 1, "a negative ell=0 eigenvalue");

    // Spacing halving on uniform grids, where discretization error dominates round-off.
    const auto params = ChoquardParams::make(d, a, p);
    const auto coarse = eig_smallest(assemble_lplus(solve_choquard(params, make_grid(d, 25.0, 150, 1.0)), 1), 1);
    const auto fine = eig_smallest(assemble_lplus(solve_choquard(params, make_grid(d, 25.0, 300, 1.0)), 1), 1);
    const double factor = std::abs(coarse[0].value) / std::abs(fine[0].value);
    v.detail << ", halving " << sci(coarse[0].value) << " -> " << sci(fine[0].value) << " (x" << sci(factor) << ");";
    v.require(factor >= 3.0, "ell=1 eigenvalue shrinks >= 3x under halving");
  }
}

void geometric_witness(Verdict& v) {
  const auto& recs = geometric_sweep();
  v.detail << " H1:";
  for (const auto& r : recs) v.detail << ' ' << sci(r.dist_to_newtonian.H1);
  v.detail << "; Linf:";
  for (const auto& r : recs) v.detail << ' ' << sci(r.dist_to_newtonian.Linf);
  bool decreasing = true;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    v.require(recs[k].converged, "converged at k=" + std::to_string(k));
    if (k > 0)
      decreasing = decreasing && recs[k].dist_to_newtonian.H1 < recs[k - 1].dist_to_newtonian.H1 &&
                   recs[k].dist_to_newtonian.Linf < recs[k - 1].dist_to_newtonian.Linf;
  }
  v.require(decreasing, "strictly decreasing distances");
  v.require(recs.back().dist_to_newtonian.H1 <= 1e-2, "final H1 distance <= 1e-2");
}

void two_route(Verdict& v) {
  const auto& recs = lattice_sweep();
  double worst = 0.0;
  int converged = 0;
  for (const auto& r : recs) {
    if (r.converged && r.two_route_linf) {
      ++converged;
      worst = std::max(worst, *r.two_route_linf);
    } else {
      v.detail << " failed at " << r.params.to_string() << ": " << r.error << ";";
    }
  }
  v.detail << " " << converged << "/" << recs.size() << " points, max Linf gap " << sci(worst);
  v.require(converged == static_cast<int>(recs.size()), "all 25 points converged by both routes");
  v.require(worst <= 1e-5, "Linf gap <= 1e-5");
}

void decay(Verdict& v) {
  double lowest = INFINITY;
  int count = 0;
  for (const auto* recs : {&geometric_sweep(), &lattice_sweep()})
    for (const auto& r : *recs) {
      if (!r.converged || r.params.p < 2.0) continue;
      ++count;
      if (!r.gamma) {
        v.require(false, "decay fit at " + r.params.to_string());
        continue;
      }
      lowest = std::min(lowest, *r.gamma);
    }
  const auto& m = model_state(3.0);
  const double gm = m.decay ? m.decay->gamma : NAN;
  v.detail << " lowest gamma over " << count << " sweep states " << sci(lowest) << "; model d=1 p=3 gamma " << gm;
  v.require(lowest >= 0.48, "gamma >= 0.48");
  v.require(std::abs(gm - 1.0) <= 0.01, "model gamma 1.00 +- 0.01");
}

void assumption_checker(Verdict& v) {
  for (const auto& [d, a, p] : {std::tuple{3, 1.0, 2.0}, std::tuple{4, 2.0, 2.0}}) {
    const auto params = ChoquardParams::make(d, a, p);
    const auto w = reference_witness(params);
    if (!w) {
      v.require(false, "reference witness available at " + params.to_string());
      continue;
    }
    const auto c = check_witness(params, *w);
    const double worst = *std::max_element(c.equality_residual.begin(), c.equality_residual.end());
    v.detail << " (" << d << "," << a << "," << p << ") witness: equality residual " << sci(worst) << ", intervals "
             << (c.intervals_ok ? "ok" : "violated") << ";";
    v.require(c.accepted(1e-12), "witness accepted at " + params.to_string());
  }
  const std::tuple<int, double, double> pts[] = {{5, 3.5, 2.0}, {5, 2.5, 2.05}, {5, 3.8, 2.0}, {4, 3.0, 2.0},
                                                 {3, 2.5, 2.0}, {3, 2.2, 2.5}, {5, 3.0, 2.1}};
  int feasible = 0;
  for (const auto& [d, a, p] : pts) {
    const auto params = ChoquardParams::make(d, a, p);
    const auto rep = assumption12_feasible(params);
    const bool ok = rep.applicable && rep.feasible && check_witness(params, *rep.witness).accepted();
    feasible += ok ? 1 : 0;
    v.require(ok, "feasible at " + params.to_string());
  }
  v.detail << " 2<alpha<d samples feasible: " << feasible << "/" << std::size(pts);
}

void tail_integral(Verdict& v) {
  double worst_exact = 0.0;
  for (double R = 1.0; R <= 20.0; R += 0.5)
    worst_exact = std::max(worst_exact, std::abs(exp_tail_integral(R, 0.0, 1.0) / std::exp(-R) - 1.0));
  double worst_scale = 0.0;
  for (double R : {2.0, 3.0, 7.5, 12.0})
    for (double a : {-2.0, -0.5, 1.0, 2.5})
      for (double b : {0.5, 1.0, 2.0, 3.0}) {
        // I(R; a, b) = b^{a-1} I(bR; a, 1)
        const double lhs = exp_tail_integral(R, a, b);
        const double rhs = std::pow(b, a - 1.0) * exp_tail_integral(b * R, a, 1.0);
        worst_scale = std::max(worst_scale, std::abs(lhs / rhs - 1.0));
      }
  constexpr double lo = 0.17, hi = 26.5;
  double qmin = INFINITY, qmax = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j <= 20; ++j)
      for (int k = 0; k <= 10; ++k) {
        const double R = 1 + i, a = -2 + 0.25 * j, b = 0.5 + 0.25 * k;
        const double q = exp_tail_integral(R, a, b) / (std::pow(R, -a) * std::exp(-b * R));
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
      }
  v.detail << " e^-R: " << sci(worst_exact) << "; scaling: " << sci(worst_scale) << "; ratio range [" << qmin << ", "
           << qmax << "] in [" << lo << ", " << hi << "]";
  v.require(worst_exact <= 1e-12, "I(R;0,1) = e^-R to 1e-12");
  v.require(worst_scale <= 1e-12, "scaling identity to 1e-12");
  v.require(qmin >= lo && qmax <= hi, "ratio within the frozen interval");
}

void monotonicity(Verdict& v) {
  using Profile = double (*)(double, int);
  const Profile profiles[] = {[](double r, int) { return std::exp(-r); }, [](double r, int) { return std::exp(-r * r); },
                              [](double r, int d) { return std::pow(1.0 + r * r, -d); }};
  int checked = 0, violations = 0;
  for (const auto& [d, alpha] : {std::pair{3, 1.0}, std::pair{3, 0.7}, std::pair{3, 1.6}, std::pair{4, 2.0},
                                 std::pair{5, 3.1}}) {
    const auto g = make_grid(d, 25.0, 200, 1.006);
    for (auto fn : profiles) {
      const double edge = fn(g->r_max(), d);
      auto f = RadialField::sample(g, [&](double r) { return std::max(fn(r, d) - edge, 0.0); });
      f.radially_decreasing = true;
      const auto pot = riesz_radial(f, alpha);
      for (std::size_t i = 0; i + 1 < g->size(); ++i) {
        const double r = g->nodes()[i];
        const double diff = pot.values[i + 1] - pot.values[i];
        const bool strict = interpolate(f, 2.0 * r / 3.0) > interpolate(f, 2.0 * r);
        ++checked;
        if (diff > 0.0 || (strict && !(diff < 0.0))) ++violations;
      }
    }
  }
  v.detail << " " << checked << " node differences, " << violations << " violations";
  v.require(violations == 0, "nonincreasing, strictly where f(2r/3) > f(2r)");
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {1, "model-equation oracle", model_oracle},
      {2, "Riesz fast-path equivalence", newtonian_fast_path},
      {3, "Riesz known values", known_potentials},
      {4, "Pohozaev certificates", pohozaev},
      {5, "L+Q identity", lplus_identity},
      {6, "non-degeneracy", nondegeneracy},
      {7, "geometric approach to the Newtonian state", geometric_witness},
      {8, "two-route consistency", two_route},
      {9, "decay", decay},
      {10, "exponent-assumption checker", assumption_checker},
      {11, "exponential tail integral", tail_integral},
      {12, "monotonicity of Riesz potentials", monotonicity},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failed += v.pass ? 0 : 1;
    std::printf("CRITERION %2d %s: %s:%s (%.1f s)\n", c.id, v.pass ? "PASS" : "FAIL", c.title, v.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
