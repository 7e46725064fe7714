#include "choquard/choquard.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "choquard/continuation.hpp"
#include "choquard/diagnostics.hpp"
#include "choquard/error.hpp"
#include "choquard/io.hpp"
#include "choquard/riesz.hpp"
#include "choquard/spectrum.hpp"

struct chq_grid {
  choquard::GridPtr grid;
};

struct chq_state {
  choquard::GroundState state;
};

namespace {

using namespace choquard;

thread_local std::string last_error;

chq_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return CHQ_INVALID_ARGUMENT;
    case ErrorCode::grid_mismatch: return CHQ_GRID_MISMATCH;
    case ErrorCode::not_converged: return CHQ_NOT_CONVERGED;
    case ErrorCode::unsupported: return CHQ_UNSUPPORTED;
    case ErrorCode::io: return CHQ_IO;
    case ErrorCode::numerical: return CHQ_NUMERICAL;
  }
  return CHQ_INTERNAL;
}

template <class F>
chq_status guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CHQ_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CHQ_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) fail(ErrorCode::invalid_argument, std::string(name) + " is NULL");
}

SolverOptions solver_options(const chq_solver_options* o) {
  SolverOptions s;
  if (o == nullptr) return s;
  s.tol = o->tol;
  s.max_iter = o->max_iter;
  s.method = o->method == CHQ_GRADIENT_FLOW ? SolverMethod::gradient_flow : SolverMethod::petviashvili;
  s.fallback = o->fallback != 0;
  s.newton_polish = o->newton_polish != 0;
  s.kernel = o->angular_kernel != 0 ? KernelMethod::angular : KernelMethod::automatic;
  return s;
}

double norm_or_zero(const GroundState& s, const char* key) {
  const auto it = s.norms.find(key);
  return it == s.norms.end() ? 0.0 : it->second;
}

chq_status finish_solve(GroundState&& s, chq_state** out) {
  *out = new chq_state{std::move(s)};
  if ((*out)->state.converged) return CHQ_OK;
  last_error = "solver did not converge: residual " + std::to_string((*out)->state.residual) + " after " +
               std::to_string((*out)->state.iterations) + " iterations";
  return CHQ_NOT_CONVERGED;
}

void copy_witness(const ExponentWitness& w, chq_witness* out) {
  const double e[7] = {w.r, w.r1, w.r2, w.r3, w.t, w.t1, w.s};
  std::copy(e, e + 7, out->e);
}

}  // namespace

extern "C" {

const char* chq_version(void) { return "1.0.0"; }

const char* chq_last_error(void) { return last_error.c_str(); }

const char* chq_status_name(chq_status status) {
  switch (status) {
    case CHQ_OK: return "ok";
    case CHQ_INVALID_ARGUMENT: return "invalid argument";
    case CHQ_GRID_MISMATCH: return "grid mismatch";
    case CHQ_NOT_CONVERGED: return "not converged";
    case CHQ_UNSUPPORTED: return "unsupported";
    case CHQ_IO: return "i/o error";
    case CHQ_NUMERICAL: return "numerical error";
    case CHQ_INTERNAL: return "internal error";
  }
  return "unknown status";
}

chq_status chq_grid_create(int d, double r_max, int n, double stretch, chq_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new chq_grid{make_grid(d, r_max, n, stretch)};
    return CHQ_OK;
  });
}

void chq_grid_free(chq_grid* grid) { delete grid; }

chq_status chq_grid_size(const chq_grid* grid, size_t* n) {
  return guarded([&] {
    need(grid, "grid");
    need(n, "n");
    *n = grid->grid->size();
    return CHQ_OK;
  });
}

chq_status chq_grid_nodes(const chq_grid* grid, double* r, size_t n) {
  return guarded([&] {
    need(grid, "grid");
    need(r, "r");
    require(n == grid->grid->size(), "buffer length differs from the grid size");
    std::copy(grid->grid->nodes().begin(), grid->grid->nodes().end(), r);
    return CHQ_OK;
  });
}

void chq_solver_options_default(chq_solver_options* opts) {
  if (opts == nullptr) return;
  const SolverOptions s;
  opts->tol = s.tol;
  opts->max_iter = s.max_iter;
  opts->method = CHQ_PETVIASHVILI;
  opts->fallback = s.fallback ? 1 : 0;
  opts->newton_polish = s.newton_polish ? 1 : 0;
  opts->angular_kernel = 0;
}

chq_status chq_solve(int d, double alpha, double p, const chq_grid* grid, const chq_solver_options* opts,
                     chq_state** out) {
  return guarded([&] {
    need(grid, "grid");
    need(out, "out");
    *out = nullptr;
    auto so = solver_options(opts);
    so.throw_on_failure = false;
    return finish_solve(solve_choquard(ChoquardParams::make(d, alpha, p), grid->grid, so), out);
  });
}

chq_status chq_solve_model(int d, double p, const chq_grid* grid, const chq_solver_options* opts, chq_state** out) {
  return guarded([&] {
    need(grid, "grid");
    need(out, "out");
    *out = nullptr;
    auto so = solver_options(opts);
    so.throw_on_failure = false;
    return finish_solve(solve_model(d, p, grid->grid, so), out);
  });
}

chq_status chq_state_zero(int d, double alpha, double p, int model, const chq_grid* grid, chq_state** out) {
  return guarded([&] {
    need(grid, "grid");
    need(out, "out");
    require(grid->grid->dim() == d, "grid dimension differs from d");
    GroundState s;
    s.params = ChoquardParams::make(d, alpha, p);
    s.model = model != 0;
    s.field = RadialField::zeros(grid->grid);
    s.method = "zero";
    *out = new chq_state{std::move(s)};
    return CHQ_OK;
  });
}

void chq_state_free(chq_state* state) { delete state; }

chq_status chq_state_get_info(const chq_state* state, chq_state_info* info) {
  return guarded([&] {
    need(state, "state");
    need(info, "info");
    const auto& s = state->state;
    *info = chq_state_info{};
    info->d = s.params.d;
    info->alpha = s.params.alpha;
    info->p = s.params.p;
    info->model = s.model ? 1 : 0;
    info->converged = s.converged ? 1 : 0;
    info->iterations = s.iterations;
    info->residual = s.residual;
    info->tolerance = s.tolerance;
    info->L2 = norm_or_zero(s, "L2");
    info->H1 = norm_or_zero(s, "H1");
    info->Linf = norm_or_zero(s, "Linf");
    info->grad_L2 = norm_or_zero(s, "grad_L2");
    info->has_decay = s.decay.has_value() ? 1 : 0;
    if (s.decay) {
      info->gamma = s.decay->gamma;
      info->decay_C = s.decay->C;
    }
    info->radially_decreasing = s.field.radially_decreasing ? 1 : 0;
    info->n = s.field.size();
    info->r_max = s.field.grid->r_max();
    info->stretch = s.field.grid->stretch();
    std::snprintf(info->method, sizeof info->method, "%s", s.method.c_str());
    return CHQ_OK;
  });
}

chq_status chq_state_values(const chq_state* state, double* values, size_t n) {
  return guarded([&] {
    need(state, "state");
    need(values, "values");
    require(n == state->state.field.size(), "buffer length differs from the grid size");
    std::copy(state->state.field.values.begin(), state->state.field.values.end(), values);
    return CHQ_OK;
  });
}

chq_status chq_state_save(const chq_state* state, const char* json_path) {
  return guarded([&] {
    need(state, "state");
    need(json_path, "json_path");
    write_state(state->state, json_path);
    return CHQ_OK;
  });
}

chq_status chq_state_load(const char* json_path, chq_state** out) {
  return guarded([&] {
    need(json_path, "json_path");
    need(out, "out");
    *out = nullptr;
    *out = new chq_state{read_state(json_path)};
    return CHQ_OK;
  });
}

chq_status chq_field_save_csv(const chq_state* state, const double* values, size_t n, const char* path) {
  return guarded([&] {
    need(state, "state");
    need(values, "values");
    need(path, "path");
    require(n == state->state.field.size(), "buffer length differs from the grid size");
    write_field_csv(RadialField(state->state.field.grid, std::vector<double>(values, values + n)), path);
    return CHQ_OK;
  });
}

chq_status chq_equation_residual(const chq_state* state, double* sup) {
  return guarded([&] {
    need(state, "state");
    need(sup, "sup");
    double m = 0.0;
    for (double x : equation_residual(state->state)) m = std::max(m, std::isnan(x) ? INFINITY : std::abs(x));
    *sup = m;
    return CHQ_OK;
  });
}

chq_status chq_pohozaev_report(const chq_state* state, chq_pohozaev* out) {
  return guarded([&] {
    need(state, "state");
    need(out, "out");
    const auto r = pohozaev_report(state->state);
    *out = chq_pohozaev{};
    out->nonlocal_energy = r.nonlocal_energy;
    out->grad_sq = r.grad_sq;
    out->mass_sq = r.mass_sq;
    for (int i = 0; i < 4; ++i) {
      out->residual[i] = r.residual[i];
      out->relative[i] = r.relative[i];
    }
    out->max_relative = r.max_relative();
    out->ratio_defined = r.ratio_defined ? 1 : 0;
    out->ratio_grad_mass = r.ratio_grad_mass;
    out->predicted_ratio = r.predicted_ratio;
    return CHQ_OK;
  });
}

chq_status chq_fit_decay(const chq_state* state, chq_decay* out) {
  return guarded([&] {
    need(state, "state");
    need(out, "out");
    const auto f = fit_decay(state->state);
    *out = chq_decay{f.gamma, f.C, f.beta, f.r_a, f.r_b};
    return CHQ_OK;
  });
}

chq_status chq_assumption12(int d, double alpha, double p, chq_feasibility* out) {
  return guarded([&] {
    need(out, "out");
    const auto r = assumption12_feasible(ChoquardParams::make(d, alpha, p));
    *out = chq_feasibility{};
    out->applicable = r.applicable ? 1 : 0;
    out->feasible = r.feasible ? 1 : 0;
    out->slack = r.slack;
    out->has_witness = r.witness.has_value() ? 1 : 0;
    if (r.witness) copy_witness(*r.witness, &out->witness);
    return CHQ_OK;
  });
}

chq_status chq_check_witness(int d, double alpha, double p, const chq_witness* w, double equality_residual[3],
                             int* intervals_ok) {
  return guarded([&] {
    need(w, "w");
    const ExponentWitness x{w->e[0], w->e[1], w->e[2], w->e[3], w->e[4], w->e[5], w->e[6]};
    const auto c = check_witness(ChoquardParams::make(d, alpha, p), x);
    if (equality_residual != nullptr) std::copy(c.equality_residual.begin(), c.equality_residual.end(), equality_residual);
    if (intervals_ok != nullptr) *intervals_ok = c.intervals_ok ? 1 : 0;
    return CHQ_OK;
  });
}

chq_status chq_reference_witness(int d, double alpha, double p, chq_witness* w, int* available) {
  return guarded([&] {
    need(w, "w");
    need(available, "available");
    const auto r = reference_witness(ChoquardParams::make(d, alpha, p));
    *available = r.has_value() ? 1 : 0;
    if (r) copy_witness(*r, w);
    return CHQ_OK;
  });
}

chq_status chq_exp_tail_integral(double R, double alpha, double beta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = exp_tail_integral(R, alpha, beta);
    return CHQ_OK;
  });
}

chq_status chq_riesz(const chq_grid* grid, double alpha, const double* f, size_t n, int angular_kernel, double* out) {
  return guarded([&] {
    need(grid, "grid");
    need(f, "f");
    need(out, "out");
    require(n == grid->grid->size(), "buffer length differs from the grid size");
    const RadialField field(grid->grid, std::vector<double>(f, f + n));
    const auto v = riesz_radial(field, alpha, angular_kernel != 0 ? KernelMethod::angular : KernelMethod::automatic);
    std::copy(v.values.begin(), v.values.end(), out);
    return CHQ_OK;
  });
}

chq_status chq_eig_smallest(const chq_state* state, int ell, int k, double* values, double* fields,
                            double* asymmetry) {
  return guarded([&] {
    need(state, "state");
    need(values, "values");
    const auto op = assemble_lplus(state->state, ell);
    const auto pairs = eig_smallest(op, k);
    const std::size_t n = state->state.field.size();
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      values[j] = pairs[j].value;
      if (fields != nullptr) std::copy(pairs[j].field.values.begin(), pairs[j].field.values.end(), fields + j * n);
    }
    if (asymmetry != nullptr) *asymmetry = op.asymmetry;
    return CHQ_OK;
  });
}

chq_status chq_nondegeneracy_verdict(const chq_state* state, double gap_tol, int k, chq_nondegeneracy* out) {
  return guarded([&] {
    need(state, "state");
    need(out, "out");
    const auto r = nondegeneracy_verdict(state->state, gap_tol, k);
    out->radial_kernel_trivial = r.radial_kernel_trivial ? 1 : 0;
    out->translation_mode_found = r.translation_mode_found ? 1 : 0;
    out->negative_count_ell0 = r.negative_count_ell0;
    out->nearest_zero_ell0 = r.nearest_zero_ell0;
    out->nearest_zero_ell1 = r.nearest_zero_ell1;
    out->translation_correlation = r.translation_correlation;
    return CHQ_OK;
  });
}

chq_status chq_continue(const chq_state* base, double alpha, double p, int steps, const chq_solver_options* opts,
                        chq_state** out, chq_continuation_info* info) {
  return guarded([&] {
    need(base, "base");
    need(out, "out");
    *out = nullptr;
    auto r = newton_continue(base->state, ChoquardParams::make(base->state.params.d, alpha, p), steps,
                             solver_options(opts));
    if (info != nullptr) {
      info->newton_steps = r.newton_steps;
      info->increments = r.increments;
      info->bisections = r.bisections;
      info->fixed_point_residual = r.fixed_point_residual;
      info->quadratic_tail = r.quadratic_tail ? 1 : 0;
    }
    *out = new chq_state{std::move(r.state)};
    return CHQ_OK;
  });
}

void chq_sweep_options_default(chq_sweep_options* opts) {
  if (opts == nullptr) return;
  const SweepOptions s;
  opts->continued = s.continued ? 1 : 0;
  opts->two_route = s.two_route ? 1 : 0;
  opts->continuation_steps = s.continuation_steps;
  opts->spectral = s.spectral ? 1 : 0;
  opts->jobs = s.jobs;
  chq_solver_options_default(&opts->solver);
}

chq_status chq_sweep(int d, const double* alphas, const double* ps, size_t npoints, const chq_grid* grid,
                     const chq_state* reference, const chq_sweep_options* opts, chq_sweep_record* out) {
  return guarded([&] {
    need(grid, "grid");
    require(npoints == 0 || (alphas != nullptr && ps != nullptr && out != nullptr), "point arrays are NULL");
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < npoints; ++i) pts.emplace_back(alphas[i], ps[i]);
    SweepOptions so;
    if (opts != nullptr) {
      so.continued = opts->continued != 0;
      so.two_route = opts->two_route != 0;
      so.continuation_steps = opts->continuation_steps;
      so.spectral = opts->spectral != 0;
      so.jobs = opts->jobs;
      so.solver = solver_options(&opts->solver);
    }
    so.reference = reference != nullptr ? &reference->state : nullptr;
    const auto recs = sweep_points(d, pts, grid->grid, so);
    for (size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      chq_sweep_record& o = out[i];
      o = chq_sweep_record{};
      o.alpha = r.params.alpha;
      o.p = r.params.p;
      o.converged = r.converged ? 1 : 0;
      const auto norm = [&](const char* key) {
        const auto it = r.norms.find(key);
        return it == r.norms.end() ? 0.0 : it->second;
      };
      o.L2 = norm("L2");
      o.H1 = norm("H1");
      o.Linf = norm("Linf");
      o.grad_L2 = norm("grad_L2");
      o.dist_L2 = r.dist_to_newtonian.L2;
      o.dist_H1 = r.dist_to_newtonian.H1;
      o.dist_Linf = r.dist_to_newtonian.Linf;
      o.has_gamma = r.gamma.has_value() ? 1 : 0;
      o.gamma = r.gamma.value_or(0.0);
      o.residual = r.residual;
      o.has_two_route = r.two_route_linf.has_value() ? 1 : 0;
      o.two_route_linf = r.two_route_linf.value_or(0.0);
      o.has_spectral = r.nearest_zero_ell0.has_value() ? 1 : 0;
      o.nearest_zero_ell0 = r.nearest_zero_ell0.value_or(0.0);
      o.nearest_zero_ell1 = r.nearest_zero_ell1.value_or(0.0);
      std::snprintf(o.error, sizeof o.error, "%s", r.error.c_str());
    }
    return CHQ_OK;
  });
}

}  // extern "C"
