#include "choquard/continuation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "choquard/error.hpp"
#include "choquard/spectrum.hpp"

namespace choquard {

namespace {

ChoquardParams lerp(const ChoquardParams& a, const ChoquardParams& b, double t) {
  if (t >= 1.0) return b;
  return {a.d, a.alpha + t * (b.alpha - a.alpha), a.p + t * (b.p - a.p)};
}

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

void finish(GroundState& s) {
  s.field.radially_decreasing = s.field.check_radially_decreasing();
  compute_norms(s);
  try {
    s.decay = fit_decay(s);
  } catch (const Error&) {
    s.decay.reset();
  }
}

}  // namespace

ContinuationResult newton_continue(const GroundState& base, const ChoquardParams& target, int steps,
                                   const SolverOptions& opts) {
  require(steps >= 1, "steps must be at least 1");
  require(!base.model, "continuation applies to the nonlocal equation");
  require(base.converged, "continuation needs a converged base state");
  require(target.d == base.params.d, "target dimension differs from the base state");
  const auto checked = ChoquardParams::make(target.d, target.alpha, target.p);
  if (!checked.in_window_para2())
    fail(ErrorCode::invalid_argument, "target outside the window 1/2 >= 1/p > (d-2)/(2d-alpha): " + checked.to_string());

  ContinuationResult out;
  out.state = base;
  if (checked == base.params) {
    out.fixed_point_residual = sup_norm(fixed_point_residual(base, opts.kernel));
    return out;
  }

  SolverOptions inner = opts;
  inner.throw_on_failure = false;
  double t = 0.0;
  double dt = 1.0 / steps;
  int failures = 0;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    GroundState trial = out.state;
    trial.params = lerp(base.params, checked, t_next);
    std::vector<double> history;
    out.newton_steps += newton_refine(trial, inner, &history);
    out.residual_history.insert(out.residual_history.end(), history.begin(), history.end());
    for (std::size_t k = 0; k + 1 < history.size(); ++k)
      if (history[k] <= 1e-3 && history[k] > 10.0 * trial.tolerance && history[k + 1] > 0.1 * history[k])
        out.quadratic_tail = false;
    if (trial.converged) {
      out.state = std::move(trial);
      t = t_next;
      ++out.increments;
      failures = 0;
      continue;
    }
    if (++failures > 10)
      fail(ErrorCode::not_converged, "Newton continuation diverged; last good parameter point " +
                                         lerp(base.params, checked, t).to_string());
    ++out.bisections;
    dt *= 0.5;
  }
  out.state.params = checked;
  finish(out.state);
  out.fixed_point_residual = sup_norm(fixed_point_residual(out.state, opts.kernel));
  return out;
}

std::vector<std::pair<double, double>> geometric_path(int d, int k_max, double a0, double p0) {
  require(k_max >= 0, "k_max must be nonnegative");
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= k_max; ++k) {
    const double f = std::ldexp(1.0, -k);
    pts.emplace_back(d - 2.0 + a0 * f, 2.0 + p0 * f);
  }
  return pts;
}

std::vector<SweepRecord> sweep_points(int d, const std::vector<std::pair<double, double>>& points,
                                      const GridPtr& grid, const SweepOptions& opts) {
  require(!points.empty(), "empty parameter lattice");
  require(opts.jobs >= 1, "jobs must be at least 1");
  require(grid != nullptr && grid->dim() == d, "grid dimension differs from d");
  for (const auto& [a, p] : points) {
    const auto q = ChoquardParams::make(d, a, p);
    if (!q.in_window_para2()) fail(ErrorCode::invalid_argument, "lattice point outside the window: " + q.to_string());
  }
  const auto newtonian = ChoquardParams::make(d, d - 2.0, 2.0);
  std::optional<GroundState> own;
  if (opts.reference == nullptr) {
    own = solve_choquard(newtonian, grid, opts.solver);
  } else {
    require(opts.reference->params == newtonian && opts.reference->converged, "reference must be the converged Newtonian state");
    require(opts.reference->field.grid && opts.reference->field.grid->same_as(*grid), "reference lives on another grid");
  }
  const GroundState& reference = opts.reference != nullptr ? *opts.reference : *own;

  std::vector<SweepRecord> records(points.size());
  const auto work = [&](std::size_t i) {
    SweepRecord& rec = records[i];
    rec.params = ChoquardParams::make(d, points[i].first, points[i].second);
    try {
      SolverOptions so = opts.solver;
      so.throw_on_failure = true;
      std::optional<GroundState> fresh;
      std::optional<GroundState> continued;
      if (!opts.continued || opts.two_route) fresh = solve_choquard(rec.params, grid, so);
      if (opts.continued || opts.two_route)
        continued = newton_continue(reference, rec.params, opts.continuation_steps, so).state;
      const GroundState& s = opts.continued ? *continued : *fresh;
      rec.converged = s.converged;
      rec.norms = s.norms;
      rec.residual = s.residual;
      if (s.decay) rec.gamma = s.decay->gamma;
      rec.dist_to_newtonian = state_distance(s.field, reference.field);
      if (opts.two_route) rec.two_route_linf = state_distance(fresh->field, continued->field).Linf;
      if (opts.spectral) {
        const auto nd = nondegeneracy_verdict(s, 0.05, 4, so.kernel);
        rec.nearest_zero_ell0 = nd.nearest_zero_ell0;
        rec.nearest_zero_ell1 = nd.nearest_zero_ell1;
      }
    } catch (const Error& e) {
      rec.converged = false;
      rec.error = e.what();
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(opts.jobs), points.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) work(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < points.size(); i = next++) work(i);
    });
  for (auto& th : pool) th.join();
  return records;
}

std::vector<SweepRecord> sweep(int d, const std::vector<double>& alphas, const std::vector<double>& ps,
                               const GridPtr& grid, const SweepOptions& opts) {
  std::vector<std::pair<double, double>> pts;
  for (double a : alphas)
    for (double p : ps) pts.emplace_back(a, p);
  return sweep_points(d, pts, grid, opts);
}

}  // namespace choquard
