/*
 * C interface to the choquard library.
 *
 * Handles are opaque and owned by the caller (free with the matching *_free).
 * Every function returns a chq_status; on failure chq_last_error() holds a message
 * for the calling thread until its next failing call.
 */
#ifndef CHOQUARD_H
#define CHOQUARD_H

#include <stddef.h>

#if defined(_WIN32)
#define CHQ_API __declspec(dllexport)
#else
#define CHQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chq_status {
  CHQ_OK = 0,
  CHQ_INVALID_ARGUMENT = 1,
  CHQ_GRID_MISMATCH = 2,
  CHQ_NOT_CONVERGED = 3,
  CHQ_UNSUPPORTED = 4,
  CHQ_IO = 5,
  CHQ_NUMERICAL = 6,
  CHQ_INTERNAL = 7
} chq_status;

typedef struct chq_grid chq_grid;
typedef struct chq_state chq_state;

CHQ_API const char* chq_version(void);
CHQ_API const char* chq_last_error(void);
CHQ_API const char* chq_status_name(chq_status status);

/* ---- grids ---- */

CHQ_API chq_status chq_grid_create(int d, double r_max, int n, double stretch, chq_grid** out);
CHQ_API void chq_grid_free(chq_grid* grid);
CHQ_API chq_status chq_grid_size(const chq_grid* grid, size_t* n);
/* Copies the n node radii into r. */
CHQ_API chq_status chq_grid_nodes(const chq_grid* grid, double* r, size_t n);

/* ---- ground states ---- */

typedef enum chq_method { CHQ_PETVIASHVILI = 0, CHQ_GRADIENT_FLOW = 1 } chq_method;

typedef struct chq_solver_options {
  double tol;
  int max_iter;
  chq_method method;
  int fallback;
  int newton_polish;
  /* Nonzero forces the angular-quadrature kernels even where a closed form exists. */
  int angular_kernel;
} chq_solver_options;

CHQ_API void chq_solver_options_default(chq_solver_options* opts);

/*
 * Ground state of the nonlocal equation on grid. A state is returned in *out also when
 * the iteration does not converge; the status is then CHQ_NOT_CONVERGED.
 */
CHQ_API chq_status chq_solve(int d, double alpha, double p, const chq_grid* grid,
                             const chq_solver_options* opts, chq_state** out);
/* Ground state of the local model -Δu + u = |u|^{p-1}u. */
CHQ_API chq_status chq_solve_model(int d, double p, const chq_grid* grid, const chq_solver_options* opts,
                                   chq_state** out);
/* The zero field on grid with the given parameters (free-operator checks). */
CHQ_API chq_status chq_state_zero(int d, double alpha, double p, int model, const chq_grid* grid, chq_state** out);
CHQ_API void chq_state_free(chq_state* state);

typedef struct chq_state_info {
  int d;
  double alpha;
  double p;
  int model;
  int converged;
  int iterations;
  double residual;
  double tolerance;
  double L2, H1, Linf, grad_L2;
  int has_decay;
  double gamma, decay_C;
  int radially_decreasing;
  size_t n;
  double r_max, stretch;
  char method[32];
} chq_state_info;

CHQ_API chq_status chq_state_get_info(const chq_state* state, chq_state_info* info);
CHQ_API chq_status chq_state_values(const chq_state* state, double* values, size_t n);

/* Writes json_path and the CSV profile next to it (same stem, .csv). */
CHQ_API chq_status chq_state_save(const chq_state* state, const char* json_path);
CHQ_API chq_status chq_state_load(const char* json_path, chq_state** out);

/* CSV (r, value) of values on the grid of state. */
CHQ_API chq_status chq_field_save_csv(const chq_state* state, const double* values, size_t n, const char* path);

/* ---- diagnostics ---- */

/* sup of the pointwise equation residual, recomputed from the stored profile. */
CHQ_API chq_status chq_equation_residual(const chq_state* state, double* sup);

typedef struct chq_pohozaev {
  double nonlocal_energy, grad_sq, mass_sq;
  double residual[4];
  double relative[4];
  double max_relative;
  int ratio_defined;
  double ratio_grad_mass;
  double predicted_ratio;
} chq_pohozaev;

CHQ_API chq_status chq_pohozaev_report(const chq_state* state, chq_pohozaev* out);

typedef struct chq_decay {
  double gamma, C, beta, r_a, r_b;
} chq_decay;

CHQ_API chq_status chq_fit_decay(const chq_state* state, chq_decay* out);

/* Exponents in the order r, r1, r2, r3, t, t1, s. */
typedef struct chq_witness {
  double e[7];
} chq_witness;

typedef struct chq_feasibility {
  int applicable;
  int feasible;
  double slack;
  int has_witness;
  chq_witness witness;
} chq_feasibility;

CHQ_API chq_status chq_assumption12(int d, double alpha, double p, chq_feasibility* out);
CHQ_API chq_status chq_check_witness(int d, double alpha, double p, const chq_witness* w,
                                     double equality_residual[3], int* intervals_ok);
/* *available is 0 where no closed-form witness is tabulated. */
CHQ_API chq_status chq_reference_witness(int d, double alpha, double p, chq_witness* w, int* available);

CHQ_API chq_status chq_exp_tail_integral(double R, double alpha, double beta, double* out);

/* ---- Riesz potentials ---- */

/* (|x|^{-alpha} * f)(r_i) for the radial profile f sampled at the n grid nodes. */
CHQ_API chq_status chq_riesz(const chq_grid* grid, double alpha, const double* f, size_t n, int angular_kernel,
                             double* out);

/* ---- spectrum ---- */

/*
 * k smallest eigenvalues of L+ in sector ell (0 or 1). fields, if not NULL, receives k*n
 * values (eigenfield j at fields[j*n]). asymmetry, if not NULL, receives the relative
 * asymmetry of the operator before symmetrization.
 */
CHQ_API chq_status chq_eig_smallest(const chq_state* state, int ell, int k, double* values, double* fields,
                                    double* asymmetry);

typedef struct chq_nondegeneracy {
  int radial_kernel_trivial;
  int translation_mode_found;
  int negative_count_ell0;
  double nearest_zero_ell0;
  double nearest_zero_ell1;
  double translation_correlation;
} chq_nondegeneracy;

CHQ_API chq_status chq_nondegeneracy_verdict(const chq_state* state, double gap_tol, int k, chq_nondegeneracy* out);

/* ---- continuation and sweeps ---- */

typedef struct chq_continuation_info {
  int newton_steps;
  int increments;
  int bisections;
  double fixed_point_residual;
  int quadratic_tail;
} chq_continuation_info;

CHQ_API chq_status chq_continue(const chq_state* base, double alpha, double p, int steps,
                                const chq_solver_options* opts, chq_state** out, chq_continuation_info* info);

typedef struct chq_sweep_options {
  int continued;
  int two_route;
  int continuation_steps;
  int spectral;
  int jobs;
  chq_solver_options solver;
} chq_sweep_options;

CHQ_API void chq_sweep_options_default(chq_sweep_options* opts);

typedef struct chq_sweep_record {
  double alpha, p;
  int converged;
  double L2, H1, Linf, grad_L2;
  double dist_L2, dist_H1, dist_Linf;
  int has_gamma;
  double gamma;
  double residual;
  int has_two_route;
  double two_route_linf;
  int has_spectral;
  double nearest_zero_ell0, nearest_zero_ell1;
  char error[256];
} chq_sweep_record;

/*
 * Solves at the npoints points (alphas[i], ps[i]) and writes one record per point in
 * input order. reference is the converged Newtonian state (d-2, 2) on grid, or NULL to
 * solve it here. Per-point failures are recorded, not returned.
 */
CHQ_API chq_status chq_sweep(int d, const double* alphas, const double* ps, size_t npoints, const chq_grid* grid,
                             const chq_state* reference, const chq_sweep_options* opts, chq_sweep_record* out);

#ifdef __cplusplus
}
#endif

#endif
