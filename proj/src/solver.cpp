#include "choquard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "choquard/error.hpp"

namespace choquard {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

double signed_power(double u, double e) { return std::copysign(std::pow(std::abs(u), e), u); }

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

void check_state_grid(const GroundState& state) {
  require(state.field.grid != nullptr, "state needs a grid");
  require(state.field.grid->dim() == state.params.d, "grid dimension differs from d");
  if (state.field.values.size() != state.field.grid->size())
    fail(ErrorCode::grid_mismatch, "field length differs from grid size");
}

// Discrete problem B u + M u = M N(u) on one grid.
class Problem {
 public:
  Problem(const ChoquardParams& params, bool model, GridPtr grid, KernelMethod method)
      : params_(params), model_(model), grid_(std::move(grid)), method_(method), lap_(grid_, 0) {
    const auto m = grid_->masses();
    masses_.assign(m.begin(), m.end());
    SparseMatrix shifted = lap_.stiffness();
    for (std::size_t i = 0; i < masses_.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      shifted.coeffRef(k, k) += masses_[i];
    }
    for (int k = 0; k < shifted.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(shifted, k); it; ++it)
        row_sum_ = std::max(row_sum_, std::abs(it.value()) / masses_[static_cast<std::size_t>(it.row())]);
    shifted.makeCompressed();
    shifted_.compute(shifted);
    if (shifted_.info() != Eigen::Success) fail(ErrorCode::numerical, "factorization of -Δ + 1 failed");
  }

  const GridPtr& grid() const { return grid_; }
  const SectorLaplacian& laplacian() const { return lap_; }
  std::span<const double> masses() const { return masses_; }
  bool model() const { return model_; }
  const ChoquardParams& params() const { return params_; }

  /// Smallest sup-norm residual resolvable in double precision: rounding in u is
  /// amplified by the largest row of M^{-1}(B + M), which grows like 1/h^2 at the core.
  double roundoff_floor(std::span<const double> u) const {
    return std::numeric_limits<double>::epsilon() * row_sum_ * sup_norm(u);
  }

  double tolerance(std::span<const double> u, double tol) const { return std::max(tol, roundoff_floor(u)); }

  /// Degree of homogeneity of N.
  double degree() const { return model_ ? params_.p : 2.0 * params_.p - 1.0; }

  std::vector<double> nonlinearity(std::span<const double> u) const {
    const double p = params_.p;
    std::vector<double> out(u.size());
    if (model_) {
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = signed_power(u[i], p);
      return out;
    }
    const auto v = choquard_potential(params_, RadialField(grid_, {u.begin(), u.end()}), method_);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = v[i] * signed_power(u[i], p - 1.0);
    return out;
  }

  std::vector<double> residual(std::span<const double> u, std::span<const double> n) const {
    std::vector<double> r = lap_.apply(u);
    for (std::size_t i = 0; i < u.size(); ++i) r[i] += u[i] - n[i];
    return r;
  }

  /// <u, (-Δ+1)u> and <u, N(u)> in the operator inner product.
  std::pair<double, double> nehari(std::span<const double> u, std::span<const double> n) const {
    double a = lap_.dirichlet_form(u);
    double b = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      a += masses_[i] * u[i] * u[i];
      b += masses_[i] * u[i] * n[i];
    }
    return {a, b};
  }

  /// (-Δ + 1)^{-1} f.
  std::vector<double> resolve(std::span<const double> f) const {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = masses_[i] * f[i];
    Eigen::VectorXd w = shifted_.solve(rhs);
    return {w.data(), w.data() + w.size()};
  }

  /// Rescale u so that <u,(-Δ+1)u> = <u,N(u)>.
  void nehari_scale(std::vector<double>& u) const {
    const auto n = nonlinearity(u);
    const auto [a, b] = nehari(u, n);
    if (!(a > 0.0 && b > 0.0)) fail(ErrorCode::numerical, "nonpositive Nehari functional");
    const double c = std::pow(a / b, 1.0 / (degree() - 1.0));
    for (double& x : u) x *= c;
  }

 private:
  ChoquardParams params_;
  bool model_;
  GridPtr grid_;
  KernelMethod method_;
  SectorLaplacian lap_;
  std::vector<double> masses_;
  double row_sum_ = 0.0;
  Eigen::SimplicialLDLT<SparseMatrix> shifted_;
};

struct IterationResult {
  std::vector<double> u;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool stalled = false;
};

// Below this residual the fixed-point phase hands over to Newton.
constexpr double kHandover = 1e-6;

IterationResult petviashvili(const Problem& pb, std::vector<double> u, const SolverOptions& opts, int budget) {
  const double gamma = (pb.degree() + 1.0) / pb.degree();
  const double target = opts.newton_polish ? std::max(opts.tol, kHandover) : opts.tol;
  IterationResult out;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0; it <= budget; ++it) {
    const auto n = pb.nonlinearity(u);
    const double res = sup_norm(pb.residual(u, n));
    out.iterations = it;
    if (!std::isfinite(res)) {
      out.stalled = true;
      break;
    }
    if (res < best) {
      out.u = u;
      out.residual = res;
      if (res < 0.9 * best) since_best = 0;
      best = res;
    }
    if (res <= target) break;
    if (++since_best > 100) {
      out.stalled = true;
      break;
    }
    if (it == budget) break;
    const auto [a, b] = pb.nehari(u, n);
    if (!(a > 0.0 && b > 0.0)) {
      out.stalled = true;
      break;
    }
    const double m = std::pow(a / b, gamma);
    u = pb.resolve(n);
    for (double& x : u) x *= m;
  }
  return out;
}

// Preconditioned gradient flow u <- (1-tau) u + tau (-Δ+1)^{-1} N(u), kept on the Nehari manifold.
IterationResult gradient_flow(const Problem& pb, std::vector<double> u, const SolverOptions& opts, int budget) {
  constexpr double tau = 0.5;
  const double target = opts.newton_polish ? std::max(opts.tol, kHandover) : opts.tol;
  IterationResult out;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0; it <= budget; ++it) {
    pb.nehari_scale(u);
    const auto n = pb.nonlinearity(u);
    const double res = sup_norm(pb.residual(u, n));
    out.iterations = it;
    if (!std::isfinite(res)) {
      out.stalled = true;
      break;
    }
    if (res < best) {
      out.u = u;
      out.residual = res;
      if (res < 0.99 * best) since_best = 0;
      best = res;
    }
    if (res <= target) break;
    if (++since_best > 300) {
      out.stalled = true;
      break;
    }
    if (it == budget) break;
    const auto w = pb.resolve(n);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = (1.0 - tau) * u[i] + tau * w[i];
  }
  return out;
}

Eigen::MatrixXd jacobian(const GroundState& state, KernelMethod method) { return lplus_matrix(state, 0, method); }

// Newton step for the local model with the sparse Jacobian M^{-1}(B + M - M p|u|^{p-1}).
std::vector<double> model_newton_step(const Problem& pb, std::span<const double> u, std::span<const double> r) {
  const double p = pb.params().p;
  const auto m = pb.masses();
  SparseMatrix j = pb.laplacian().stiffness();
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    j.coeffRef(k, k) += m[i] * (1.0 - p * std::pow(std::abs(u[i]), p - 1.0));
    rhs[k] = -m[i] * r[i];
  }
  j.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(j);
  if (lu.info() != Eigen::Success) fail(ErrorCode::numerical, "singular Newton matrix");
  Eigen::VectorXd step = lu.solve(rhs);
  return {step.data(), step.data() + step.size()};
}

int newton_iterate(const Problem& pb, GroundState& state, const SolverOptions& opts, std::vector<double>* history) {
  auto& u = state.field.values;
  auto n = pb.nonlinearity(u);
  auto r = pb.residual(u, n);
  double res = sup_norm(r);
  if (history) history->push_back(res);
  int steps = 0;
  constexpr int max_steps = 40;
  while (res > pb.tolerance(u, opts.tol) && steps < max_steps) {
    std::vector<double> step;
    if (pb.model()) {
      step = model_newton_step(pb, u, r);
    } else {
      state.field.values = u;
      Eigen::MatrixXd j = jacobian(state, opts.kernel);
      Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
      Eigen::VectorXd s = j.partialPivLu().solve(rhs);
      step.assign(s.data(), s.data() + s.size());
    }
    // Step halving on residual increase.
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial(u.size());
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * step[i];
      const auto tn = pb.nonlinearity(trial);
      auto tr = pb.residual(trial, tn);
      const double tres = sup_norm(tr);
      if (std::isfinite(tres) && tres < res) {
        u = trial;
        r = std::move(tr);
        res = tres;
        accepted = true;
        break;
      }
    }
    ++steps;
    if (history) history->push_back(res);
    if (!accepted) break;
  }
  state.residual = res;
  state.tolerance = pb.tolerance(u, opts.tol);
  return steps;
}

std::vector<double> initial_guess(const Problem& pb) {
  const auto r = pb.grid()->nodes();
  std::vector<double> u(r.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-0.5 * r[i] * r[i]);
  pb.nehari_scale(u);
  return u;
}

GroundState run(const ChoquardParams& params, bool model, const GridPtr& grid, const SolverOptions& opts) {
  require(grid != nullptr, "solver needs a grid");
  require(grid->dim() == params.d, "grid dimension differs from d");
  require(opts.tol > 0.0 && opts.max_iter >= 0, "invalid solver options");
  Problem pb(params, model, grid, opts.kernel);

  GroundState state;
  state.params = params;
  state.model = model;

  auto u = initial_guess(pb);
  IterationResult it;
  if (opts.method == SolverMethod::petviashvili) {
    it = petviashvili(pb, u, opts, opts.max_iter);
    state.method = "petviashvili";
    const double target = opts.newton_polish ? std::max(opts.tol, kHandover) : opts.tol;
    if (it.residual > target && opts.fallback) {
      auto flow = gradient_flow(pb, it.u.empty() ? u : it.u, opts, std::max(0, opts.max_iter - it.iterations));
      flow.iterations += it.iterations;
      if (flow.residual < it.residual) {
        it = std::move(flow);
        state.method = "petviashvili+gradient_flow";
      } else {
        it.iterations = flow.iterations;
      }
    }
  } else {
    it = gradient_flow(pb, u, opts, opts.max_iter);
    state.method = "gradient_flow";
  }
  if (it.u.empty()) it.u = u;
  state.field = RadialField(grid, it.u);
  state.iterations = it.iterations;
  state.residual = it.residual;

  state.tolerance = pb.tolerance(state.field.values, opts.tol);
  if (opts.newton_polish && state.residual > state.tolerance && state.residual < 1e-2) {
    state.iterations += newton_iterate(pb, state, opts, nullptr);
    state.method += "+newton";
  }
  state.converged = state.residual <= state.tolerance;

  auto& v = state.field.values;
  if (state.converged && !v.empty() && v[0] < 0.0)
    for (double& x : v) x = -x;
  state.field.radially_decreasing = state.field.check_radially_decreasing();
  compute_norms(state);
  if (state.converged) {
    try {
      state.decay = fit_decay(state);
    } catch (const Error&) {
      state.decay.reset();
    }
  }
  if (!state.converged && opts.throw_on_failure)
    fail(ErrorCode::not_converged, "solver did not converge for " + params.to_string() +
                                       "; last residual " + std::to_string(state.residual));
  return state;
}

}  // namespace

std::vector<double> choquard_potential(const ChoquardParams& params, const RadialField& u, KernelMethod method) {
  require(u.grid != nullptr, "field needs a grid");
  require(u.grid->dim() == params.d, "grid dimension differs from d");
  std::vector<double> up(u.values.size());
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = std::pow(std::abs(u.values[i]), params.p);
  return riesz_radial(RadialField(u.grid, std::move(up)), params.alpha, method).values;
}

std::vector<double> equation_residual(const GroundState& state, KernelMethod method) {
  check_state_grid(state);
  Problem pb(state.params, state.model, state.field.grid, method);
  const auto& u = state.field.values;
  return pb.residual(u, pb.nonlinearity(u));
}

std::vector<double> fixed_point_residual(const GroundState& state, KernelMethod method) {
  check_state_grid(state);
  Problem pb(state.params, state.model, state.field.grid, method);
  const auto& u = state.field.values;
  auto w = pb.resolve(pb.nonlinearity(u));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] - w[i];
  return w;
}

GroundState solve_choquard(const ChoquardParams& params, const GridPtr& grid, const SolverOptions& opts) {
  const auto checked = ChoquardParams::make(params.d, params.alpha, params.p);
  if (!checked.in_window_para2())
    fail(ErrorCode::invalid_argument, "parameters outside the window 1/2 >= 1/p > (d-2)/(2d-alpha): " +
                                          checked.to_string());
  return run(checked, false, grid, opts);
}

GroundState solve_model(int d, double p, const GridPtr& grid, const SolverOptions& opts) {
  require(d >= 1, "dimension must be >= 1");
  require(std::isfinite(p) && p > 1.0, "p must exceed 1");
  if (d >= 3 && !(p < (d + 2.0) / (d - 2.0))) fail(ErrorCode::invalid_argument, "p is not subcritical for d >= 3");
  ChoquardParams params{d, 0.5 * d, p};
  return run(params, true, grid, opts);
}

int newton_refine(GroundState& state, const SolverOptions& opts, std::vector<double>* history) {
  check_state_grid(state);
  Problem pb(state.params, state.model, state.field.grid, opts.kernel);
  const int steps = newton_iterate(pb, state, opts, history);
  state.converged = state.residual <= state.tolerance;
  state.iterations += steps;
  state.field.radially_decreasing = state.field.check_radially_decreasing();
  compute_norms(state);
  if (!state.converged && opts.throw_on_failure)
    fail(ErrorCode::not_converged, "Newton iteration stalled at residual " + std::to_string(state.residual));
  return steps;
}

Eigen::MatrixXd lplus_matrix(const GroundState& state, int ell, KernelMethod method) {
  check_state_grid(state);
  if (ell != 0 && ell != 1) fail(ErrorCode::unsupported, "only sectors ell = 0 and ell = 1 are supported");
  const GridPtr& g = state.field.grid;
  const auto& q = state.field.values;
  const double p = state.params.p;
  const auto n = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd a = SectorLaplacian(g, ell).dense();
  a.diagonal().array() += 1.0;
  if (state.model) {
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) -= p * std::pow(std::abs(q[static_cast<std::size_t>(i)]), p - 1.0);
    return a;
  }
  const auto v = choquard_potential(state.params, state.field, method);
  auto kernel = sector_kernel(g, state.params.alpha, ell, method);
  Eigen::VectorXd w(n), wm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    a(i, i) -= (p - 1.0) * v[k] * std::pow(std::abs(q[k]), p - 2.0);
    w[i] = signed_power(q[k], p - 1.0);
    wm[i] = w[i] * kernel->masses[k];
  }
  a.noalias() -= p * w.asDiagonal() * kernel->matrix * wm.asDiagonal();
  return a;
}

void compute_norms(GroundState& state) {
  check_state_grid(state);
  const RadialGrid& g = *state.field.grid;
  const auto& u = state.field.values;
  const auto m = g.masses();
  double mass = 0.0;
  double linf = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mass += m[i] * u[i] * u[i];
    linf = std::max(linf, std::abs(u[i]));
  }
  mass *= g.sphere_area();
  const double grad = g.sphere_area() * SectorLaplacian(state.field.grid, 0).dirichlet_form(u);
  state.norms["L2"] = std::sqrt(mass);
  state.norms["grad_L2"] = std::sqrt(std::max(grad, 0.0));
  state.norms["H1"] = std::sqrt(std::max(mass + grad, 0.0));
  state.norms["Linf"] = linf;
}

DecayFit fit_decay(const GroundState& state) {
  check_state_grid(state);
  const RadialGrid& g = *state.field.grid;
  const int d = g.dim();
  DecayFit fit;
  fit.beta = d <= 2 ? 0.0 : 0.5 * (d - 1);
  fit.r_a = 0.3 * g.r_max();
  fit.r_b = 0.7 * g.r_max();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.nodes()[i];
    if (r < fit.r_a || r > fit.r_b) continue;
    const double q = state.field.values[i];
    if (!(q >= 1e-13)) fail(ErrorCode::numerical, "fit unreliable: tail values below 1e-13");
    const double y = std::log(q) + fit.beta * std::log(r);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    ++count;
  }
  if (count < 3) fail(ErrorCode::numerical, "fit unreliable: tail window holds fewer than 3 nodes");
  const double den = count * sxx - sx * sx;
  const double slope = (count * sxy - sx * sy) / den;
  const double icpt = (sy - slope * sx) / count;
  fit.gamma = -slope;
  fit.C = std::exp(icpt);
  return fit;
}

Distances state_distance(const RadialField& a, const RadialField& b) {
  require(a.grid && b.grid, "fields need grids");
  require(a.grid->dim() == b.grid->dim(), "fields live in different dimensions");
  const bool a_fine = a.grid->size() >= b.grid->size();
  const RadialField& fine = a_fine ? a : b;
  RadialField other = a.grid->same_as(*b.grid) ? (a_fine ? b : a) : resample(a_fine ? b : a, fine.grid);
  const RadialGrid& g = *fine.grid;
  std::vector<double> diff(g.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = fine.values[i] - other.values[i];
  Distances out;
  double mass = 0.0;
  const auto m = g.masses();
  for (std::size_t i = 0; i < diff.size(); ++i) {
    mass += m[i] * diff[i] * diff[i];
    out.Linf = std::max(out.Linf, std::abs(diff[i]));
  }
  mass *= g.sphere_area();
  const double grad = g.sphere_area() * SectorLaplacian(fine.grid, 0).dirichlet_form(diff);
  out.L2 = std::sqrt(mass);
  out.H1 = std::sqrt(std::max(mass + grad, 0.0));
  return out;
}

}  // namespace choquard
