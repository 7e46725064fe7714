// choquard-lab: command-line front end over the choquard C API.
//
//   choquard-lab solve    --d 3 --alpha 1 --p 2 [--model] [grid/solver flags] --out-dir DIR
//   choquard-lab verify   DIR/Q.json
//   choquard-lab spectrum DIR/Q.json --ell 0|1|both --k 6 [--zero-field] [--dump-fields]
//   choquard-lab sweep    --d 3 --alphas ... --ps ... | --geometric K  [--jobs N] [--resume]
//   choquard-lab riesz    profile.csv --d 3 --alpha 1
//
// Every verb accepts --config FILE (JSON); explicit flags override the file. Exit codes:
// 0 success, 1 usage/config/input error, 2 numerical non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "choquard/choquard.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
  ApiError(chq_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  chq_status status;
};

void check(chq_status s) {
  if (s != CHQ_OK) throw ApiError(s, chq_last_error());
}

struct GridDeleter {
  void operator()(chq_grid* g) const { chq_grid_free(g); }
};
struct StateDeleter {
  void operator()(chq_state* s) const { chq_state_free(s); }
};
using Grid = std::unique_ptr<chq_grid, GridDeleter>;
using State = std::unique_ptr<chq_state, StateDeleter>;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------- configuration

struct RunConfig {
  int d = 3;
  double alpha = 1.0;
  double p = 2.0;
  bool model = false;
  double r_max = 25.0;
  int n = 600;
  double stretch = 1.006;
  chq_solver_options solver{};
  std::string out_dir = ".";

  // sweep
  std::vector<double> alphas;
  std::vector<double> ps;
  int geometric = -1;
  double a0 = 0.04;
  double p0 = 0.04;
  bool continued = false;
  bool two_route = false;
  int continuation_steps = 2;
  bool spectral = false;
  int jobs = 1;

  // spectrum
  std::string ell = "both";
  int k = 6;
  double gap_tol = 0.05;
  bool zero_field = false;
  bool dump_fields = false;

  RunConfig() { chq_solver_options_default(&solver); }
};

const char* method_name(chq_method m) { return m == CHQ_GRADIENT_FLOW ? "gradient_flow" : "petviashvili"; }

chq_method parse_method(const std::string& s) {
  if (s == "petviashvili") return CHQ_PETVIASHVILI;
  if (s == "gradient_flow") return CHQ_GRADIENT_FLOW;
  throw UsageError("unknown solver method '" + s + "' (petviashvili, gradient_flow)");
}

json to_json(const RunConfig& c) {
  return {
      {"d", c.d},
      {"alpha", c.alpha},
      {"p", c.p},
      {"model", c.model},
      {"grid", {{"r_max", c.r_max}, {"n", c.n}, {"stretch", c.stretch}}},
      {"solver",
       {{"tol", c.solver.tol},
        {"max_iter", c.solver.max_iter},
        {"method", method_name(c.solver.method)},
        {"fallback", c.solver.fallback != 0},
        {"newton_polish", c.solver.newton_polish != 0},
        {"angular_kernel", c.solver.angular_kernel != 0}}},
      {"out_dir", c.out_dir},
      {"sweep",
       {{"alphas", c.alphas},
        {"ps", c.ps},
        {"geometric", c.geometric},
        {"a0", c.a0},
        {"p0", c.p0},
        {"continued", c.continued},
        {"two_route", c.two_route},
        {"continuation_steps", c.continuation_steps},
        {"spectral", c.spectral},
        {"jobs", c.jobs}}},
      {"spectrum",
       {{"ell", c.ell}, {"k", c.k}, {"gap_tol", c.gap_tol}, {"zero_field", c.zero_field}, {"dump_fields", c.dump_fields}}},
  };
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw UsageError("unknown config key '" + where + item.key() + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void apply_json(const json& j, RunConfig& c) {
  reject_unknown(j, {"d", "alpha", "p", "model", "grid", "solver", "out_dir", "sweep", "spectrum"}, "");
  take(j, "d", c.d);
  take(j, "alpha", c.alpha);
  take(j, "p", c.p);
  take(j, "model", c.model);
  take(j, "out_dir", c.out_dir);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"r_max", "n", "stretch"}, "grid.");
    take(g, "r_max", c.r_max);
    take(g, "n", c.n);
    take(g, "stretch", c.stretch);
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    reject_unknown(s, {"tol", "max_iter", "method", "fallback", "newton_polish", "angular_kernel"}, "solver.");
    take(s, "tol", c.solver.tol);
    take(s, "max_iter", c.solver.max_iter);
    if (s.contains("method")) c.solver.method = parse_method(s["method"].get<std::string>());
    if (s.contains("fallback")) c.solver.fallback = s["fallback"].get<bool>() ? 1 : 0;
    if (s.contains("newton_polish")) c.solver.newton_polish = s["newton_polish"].get<bool>() ? 1 : 0;
    if (s.contains("angular_kernel")) c.solver.angular_kernel = s["angular_kernel"].get<bool>() ? 1 : 0;
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    reject_unknown(s,
                   {"alphas", "ps", "geometric", "a0", "p0", "continued", "two_route", "continuation_steps", "spectral",
                    "jobs"},
                   "sweep.");
    take(s, "alphas", c.alphas);
    take(s, "ps", c.ps);
    take(s, "geometric", c.geometric);
    take(s, "a0", c.a0);
    take(s, "p0", c.p0);
    take(s, "continued", c.continued);
    take(s, "two_route", c.two_route);
    take(s, "continuation_steps", c.continuation_steps);
    take(s, "spectral", c.spectral);
    take(s, "jobs", c.jobs);
  }
  if (j.contains("spectrum")) {
    const auto& s = j["spectrum"];
    reject_unknown(s, {"ell", "k", "gap_tol", "zero_field", "dump_fields"}, "spectrum.");
    if (s.contains("ell")) c.ell = s["ell"].is_string() ? s["ell"].get<std::string>() : std::to_string(s["ell"].get<int>());
    take(s, "k", c.k);
    take(s, "gap_tol", c.gap_tol);
    take(s, "zero_field", c.zero_field);
    take(s, "dump_fields", c.dump_fields);
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << text;
    if (!out) throw UsageError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Flag values that were given on the command line; everything else comes from the
// config file or the defaults.
struct Flags {
  std::optional<std::string> config;
  std::optional<int> d;
  std::optional<double> alpha, p;
  bool model = false;
  std::optional<double> r_max, stretch;
  std::optional<int> n;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> method;
  bool angular = false;
  std::optional<std::string> out_dir;

  std::optional<std::vector<double>> alphas, ps;
  std::optional<int> geometric;
  std::optional<double> a0, p0;
  bool continued = false, two_route = false, spectral = false;
  std::optional<int> continuation_steps, jobs;

  std::optional<std::string> ell;
  std::optional<int> k;
  std::optional<double> gap_tol;
  bool zero_field = false, dump_fields = false;
};

void add_grid_solver(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration");
  app->add_option("--out-dir", f.out_dir, "output directory (created if missing)");
  app->add_option("--r-max", f.r_max, "outer radius of the grid");
  app->add_option("--n", f.n, "number of grid nodes");
  app->add_option("--stretch", f.stretch, "asymptotic ratio of neighbouring spacings (1 = uniform)");
  app->add_option("--tol", f.tol, "residual tolerance");
  app->add_option("--max-iter", f.max_iter, "iteration cap");
  app->add_option("--method", f.method, "petviashvili or gradient_flow");
  app->add_flag("--angular-kernel", f.angular, "always use the angular-quadrature kernels");
}

RunConfig resolve(const Flags& f, std::optional<json> base = std::nullopt) {
  RunConfig c;
  if (base) apply_json(*base, c);
  if (f.config) apply_json(read_json(*f.config), c);
  if (f.d) c.d = *f.d;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.p) c.p = *f.p;
  if (f.model) c.model = true;
  if (f.r_max) c.r_max = *f.r_max;
  if (f.n) c.n = *f.n;
  if (f.stretch) c.stretch = *f.stretch;
  if (f.tol) c.solver.tol = *f.tol;
  if (f.max_iter) c.solver.max_iter = *f.max_iter;
  if (f.method) c.solver.method = parse_method(*f.method);
  if (f.angular) c.solver.angular_kernel = 1;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.alphas) c.alphas = *f.alphas;
  if (f.ps) c.ps = *f.ps;
  if (f.geometric) c.geometric = *f.geometric;
  if (f.a0) c.a0 = *f.a0;
  if (f.p0) c.p0 = *f.p0;
  if (f.continued) c.continued = true;
  if (f.two_route) c.two_route = true;
  if (f.spectral) c.spectral = true;
  if (f.continuation_steps) c.continuation_steps = *f.continuation_steps;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.ell) c.ell = *f.ell;
  if (f.k) c.k = *f.k;
  if (f.gap_tol) c.gap_tol = *f.gap_tol;
  if (f.zero_field) c.zero_field = true;
  if (f.dump_fields) c.dump_fields = true;
  return c;
}

fs::path prepare_out_dir(const RunConfig& c) {
  const fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

Grid make_grid(int d, const RunConfig& c) {
  chq_grid* g = nullptr;
  check(chq_grid_create(d, c.r_max, c.n, c.stretch, &g));
  return Grid(g);
}

std::vector<double> grid_nodes(const chq_grid* g) {
  size_t n = 0;
  check(chq_grid_size(g, &n));
  std::vector<double> r(n);
  check(chq_grid_nodes(g, r.data(), n));
  return r;
}

State load_state(const std::string& path) {
  chq_state* s = nullptr;
  check(chq_state_load(path.c_str(), &s));
  return State(s);
}

chq_state_info info_of(const chq_state* s) {
  chq_state_info info{};
  check(chq_state_get_info(s, &info));
  return info;
}

// ---------------------------------------------------------------- solve

int run_solve(const Flags& flags) {
  const RunConfig c = resolve(flags);
  const Grid grid = make_grid(c.d, c);
  chq_state* raw = nullptr;
  const chq_status st = c.model ? chq_solve_model(c.d, c.p, grid.get(), &c.solver, &raw)
                                : chq_solve(c.d, c.alpha, c.p, grid.get(), &c.solver, &raw);
  if (raw == nullptr) check(st);
  const State state(raw);
  const std::string failure = st == CHQ_OK ? std::string{} : chq_last_error();
  const fs::path dir = prepare_out_dir(c);
  check(chq_state_save(state.get(), (dir / "Q.json").string().c_str()));
  write_text(dir / "run.json", to_json(c).dump(2) + "\n");

  const auto info = info_of(state.get());
  if (info.model)
    std::printf("model d=%d p=%g", info.d, info.p);
  else
    std::printf("choquard d=%d alpha=%g p=%g", info.d, info.alpha, info.p);
  std::printf(" on n=%zu r_max=%g stretch=%g\n", info.n, info.r_max, info.stretch);
  std::printf("  %s after %d iterations (%s), residual %.3e, tolerance %.3e\n",
              info.converged ? "converged" : "NOT converged", info.iterations, info.method, info.residual,
              info.tolerance);
  std::printf("  L2 %.10g  H1 %.10g  Linf %.10g\n", info.L2, info.H1, info.Linf);
  if (info.has_decay) std::printf("  decay gamma %.6f\n", info.gamma);
  std::printf("  wrote %s, %s\n", (dir / "Q.json").string().c_str(), (dir / "Q.csv").string().c_str());
  if (st == CHQ_NOT_CONVERGED) {
    std::fprintf(stderr, "error: %s\n", failure.c_str());
    return 2;
  }
  check(st);
  return 0;
}

// ---------------------------------------------------------------- verify

struct Row {
  std::string check;
  std::string status;  // PASS, FAIL, SKIP
  std::string value;
  std::string bound;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

int run_verify(const std::string& path, const Flags& flags) {
  const RunConfig c = resolve(flags);
  State state;
  try {
    state = load_state(path);
  } catch (const ApiError& e) {
    throw UsageError(e.what());
  }
  const auto info = info_of(state.get());
  std::vector<Row> rows;
  const auto add = [&](std::string name, bool ok, std::string value, std::string bound) {
    rows.push_back({std::move(name), ok ? "PASS" : "FAIL", std::move(value), std::move(bound)});
  };
  const auto skip = [&](std::string name, std::string why) { rows.push_back({std::move(name), "SKIP", "", why}); };

  add("converged flag", info.converged != 0, info.converged ? "true" : "false", "true");

  double residual = 0.0;
  check(chq_equation_residual(state.get(), &residual));
  const double res_bound = std::max(10.0 * info.tolerance, 1e-8);
  add("equation residual (recomputed)", residual <= res_bound, sci(residual), "<= " + sci(res_bound));

  add("positive, radially nonincreasing", info.radially_decreasing != 0, info.radially_decreasing ? "yes" : "no",
      "yes");

  chq_pohozaev poh{};
  const chq_status poh_status = chq_pohozaev_report(state.get(), &poh);
  if (poh_status == CHQ_OK) {
    add("Pohozaev/Nehari identities", poh.max_relative <= 1e-4, sci(poh.max_relative), "<= 1e-4 relative");
    if (poh.ratio_defined) {
      const double rel = std::abs(poh.ratio_grad_mass / poh.predicted_ratio - 1.0);
      add("|grad Q|^2 / |Q|^2 ratio", rel <= 1e-3,
          num(poh.ratio_grad_mass) + " vs " + num(poh.predicted_ratio), "rel. <= 1e-3");
    } else {
      skip("|grad Q|^2 / |Q|^2 ratio", "undefined at these parameters");
    }
  } else {
    add("Pohozaev/Nehari identities", false, chq_last_error(), "computable");
  }

  chq_decay decay{};
  const chq_status decay_status = chq_fit_decay(state.get(), &decay);
  if (decay_status != CHQ_OK) {
    add("exponential decay fit", false, chq_last_error(), "fit exists");
  } else if (info.model) {
    add("exponential decay rate", std::abs(decay.gamma - 1.0) <= 0.01, num(decay.gamma), "1 +- 0.01");
  } else if (info.p >= 2.0) {
    add("exponential decay rate", decay.gamma >= 0.48, num(decay.gamma), ">= 0.48");
  } else {
    rows.push_back({"exponential decay rate", "SKIP", num(decay.gamma), "no bound for p < 2"});
  }

  if (info.model) {
    skip("exponent assumption", "local model");
  } else {
    chq_feasibility feas{};
    check(chq_assumption12(info.d, info.alpha, info.p, &feas));
    if (!feas.applicable)
      skip("exponent assumption", "outside its parameter range");
    else
      add("exponent assumption", feas.feasible != 0, feas.feasible ? "feasible, slack " + sci(feas.slack) : "infeasible",
          "feasible");
  }

  bool all = true;
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.check.size());
  if (info.model)
    std::printf("verify %s  (model, d=%d p=%g)\n", path.c_str(), info.d, info.p);
  else
    std::printf("verify %s  (d=%d alpha=%g p=%g)\n", path.c_str(), info.d, info.alpha, info.p);
  json report = json::array();
  for (const auto& r : rows) {
    all = all && r.status != "FAIL";
    std::printf("  %-4s  %-*s  %-28s %s\n", r.status.c_str(), static_cast<int>(width), r.check.c_str(),
                r.value.c_str(), r.bound.c_str());
    report.push_back({{"check", r.check}, {"status", r.status}, {"value", r.value}, {"bound", r.bound}});
  }
  std::printf("%s\n", all ? "all checks passed" : "some checks FAILED");

  const fs::path dir = prepare_out_dir(c);
  json out = {{"state", path}, {"passed", all}, {"checks", report}};
  write_text(dir / "verify.json", out.dump(2) + "\n");
  return all ? 0 : 2;
}

// ---------------------------------------------------------------- spectrum

int run_spectrum(const std::string& path, const Flags& flags) {
  const RunConfig c = resolve(flags);
  std::vector<int> sectors;
  if (c.ell == "both")
    sectors = {0, 1};
  else if (c.ell == "0" || c.ell == "1")
    sectors = {c.ell == "0" ? 0 : 1};
  else
    throw UsageError("unsupported sector --ell " + c.ell + " (0, 1 or both)");
  if (c.k < 1 || c.k > 10) throw UsageError("--k must be in 1..10");

  State loaded;
  try {
    loaded = load_state(path);
  } catch (const ApiError& e) {
    throw UsageError(e.what());
  }
  const auto info = info_of(loaded.get());
  State state;
  if (c.zero_field) {
    chq_grid* g = nullptr;
    check(chq_grid_create(info.d, info.r_max, static_cast<int>(info.n), info.stretch, &g));
    const Grid grid(g);
    chq_state* z = nullptr;
    check(chq_state_zero(info.d, info.alpha, info.p, info.model, grid.get(), &z));
    state.reset(z);
  } else {
    state = std::move(loaded);
  }

  const fs::path dir = prepare_out_dir(c);
  json report = {{"state", path},
                 {"params", {{"d", info.d}, {"alpha", info.alpha}, {"p", info.p}, {"model", info.model != 0}}},
                 {"zero_field", c.zero_field},
                 {"k", c.k}};
  json sectors_json = json::array();
  std::printf("L+ spectrum for %s%s\n", path.c_str(), c.zero_field ? " (zero field)" : "");
  for (int ell : sectors) {
    std::vector<double> values(static_cast<std::size_t>(c.k));
    std::vector<double> fields;
    if (c.dump_fields) fields.resize(static_cast<std::size_t>(c.k) * info.n);
    double asym = 0.0;
    check(chq_eig_smallest(state.get(), ell, c.k, values.data(), c.dump_fields ? fields.data() : nullptr, &asym));
    std::printf("  ell=%d:", ell);
    for (double v : values) std::printf(" %.6e", v);
    std::printf("\n");
    json sj = {{"ell", ell}, {"eigenvalues", values}, {"asymmetry", asym}};
    if (c.dump_fields) {
      json files = json::array();
      for (int j = 0; j < c.k; ++j) {
        const std::string name = "eigenfield_l" + std::to_string(ell) + "_" + std::to_string(j) + ".csv";
        check(chq_field_save_csv(state.get(), fields.data() + static_cast<std::size_t>(j) * info.n, info.n,
                                 (dir / name).string().c_str()));
        files.push_back(name);
      }
      sj["eigenfields"] = files;
    }
    sectors_json.push_back(sj);
  }
  report["sectors"] = sectors_json;

  if (!c.zero_field && sectors.size() == 2) {
    chq_nondegeneracy nd{};
    check(chq_nondegeneracy_verdict(state.get(), c.gap_tol, c.k, &nd));
    const bool nondegenerate = nd.radial_kernel_trivial && nd.translation_mode_found;
    report["verdict"] = {{"gap_tol", c.gap_tol},
                         {"radial_kernel_trivial", nd.radial_kernel_trivial != 0},
                         {"translation_mode_found", nd.translation_mode_found != 0},
                         {"negative_count_ell0", nd.negative_count_ell0},
                         {"nearest_zero_ell0", nd.nearest_zero_ell0},
                         {"nearest_zero_ell1", nd.nearest_zero_ell1},
                         {"translation_correlation", nd.translation_correlation},
                         {"nondegenerate", nondegenerate}};
    std::printf("  radial kernel trivial: %s, translation mode: %s (correlation %.6f), negative ell=0: %d\n",
                nd.radial_kernel_trivial ? "yes" : "no", nd.translation_mode_found ? "yes" : "no",
                nd.translation_correlation, nd.negative_count_ell0);
    std::printf("  verdict: %s\n", nondegenerate ? "non-degenerate in sectors 0 and 1" : "degenerate or unresolved");
  }
  write_text(dir / "spectrum.json", report.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- sweep

const char* kSweepHeader =
    "index,alpha,p,converged,L2,H1,Linf,grad_L2,dist_L2,dist_H1,dist_Linf,gamma,residual,two_route_linf,"
    "nearest_zero_ell0,nearest_zero_ell1,error\n";

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::string csv_row(std::size_t index, const chq_sweep_record& r) {
  std::ostringstream o;
  o << index << ',' << num(r.alpha) << ',' << num(r.p) << ',' << (r.converged ? 1 : 0);
  for (double x : {r.L2, r.H1, r.Linf, r.grad_L2, r.dist_L2, r.dist_H1, r.dist_Linf}) o << ',' << num(x);
  o << ',' << (r.has_gamma ? num(r.gamma) : "") << ',' << num(r.residual);
  o << ',' << (r.has_two_route ? num(r.two_route_linf) : "");
  o << ',' << (r.has_spectral ? num(r.nearest_zero_ell0) : "") << ',' << (r.has_spectral ? num(r.nearest_zero_ell1) : "");
  o << ',' << csv_text(r.error);
  return o.str();
}

std::vector<std::pair<double, double>> lattice(const RunConfig& c) {
  std::vector<std::pair<double, double>> pts;
  if (c.geometric >= 0) {
    if (!c.alphas.empty() || !c.ps.empty()) throw UsageError("--geometric excludes --alphas/--ps");
    for (int k = 0; k <= c.geometric; ++k) {
      const double f = std::ldexp(1.0, -k);
      pts.emplace_back(c.d - 2.0 + c.a0 * f, 2.0 + c.p0 * f);
    }
    return pts;
  }
  for (double a : c.alphas)
    for (double p : c.ps) pts.emplace_back(a, p);
  return pts;
}

// Everything that determines the CSV; scheduling knobs (jobs, max points) are excluded.
json fingerprint(const RunConfig& c, const std::vector<std::pair<double, double>>& pts) {
  json j = to_json(c);
  j.erase("out_dir");
  j.erase("spectrum");
  j.erase("alpha");
  j.erase("p");
  j.erase("model");
  j["sweep"].erase("jobs");
  json points = json::array();
  for (const auto& [a, p] : pts) points.push_back({a, p});
  j["points"] = points;
  return j;
}

int run_sweep(const Flags& flags, bool resume, std::optional<int> max_points) {
  std::optional<json> base;
  std::optional<fs::path> manifest_path;
  json completed = json::object();
  if (resume) {
    RunConfig probe = resolve(flags);
    manifest_path = fs::path(probe.out_dir) / "manifest.json";
    const json m = read_json(*manifest_path);
    if (!m.contains("config") || !m.contains("rows")) throw UsageError(manifest_path->string() + ": not a sweep manifest");
    base = m.at("config");
    completed = m.at("rows");
  }
  RunConfig c = resolve(flags, base);
  if (manifest_path) c.out_dir = manifest_path->parent_path().string();
  if (c.model) throw UsageError("sweeps run on the nonlocal equation only");
  if (c.jobs < 1) throw UsageError("--jobs must be at least 1");
  const auto pts = lattice(c);
  if (pts.empty()) throw UsageError("empty parameter lattice");
  const json fp = fingerprint(c, pts);
  if (resume) {
    const json m = read_json(*manifest_path);
    if (m.at("fingerprint") != fp) throw UsageError("flags change the run recorded in " + manifest_path->string());
  }
  const fs::path dir = prepare_out_dir(c);
  const Grid grid = make_grid(c.d, c);

  std::vector<std::optional<std::string>> rows(pts.size());
  for (const auto& item : completed.items()) {
    const std::size_t i = std::stoul(item.key());
    if (i >= pts.size()) throw UsageError("manifest row index out of range");
    rows[i] = item.value().get<std::string>();
  }

  chq_sweep_options so{};
  chq_sweep_options_default(&so);
  so.continued = c.continued;
  so.two_route = c.two_route;
  so.continuation_steps = c.continuation_steps;
  so.spectral = c.spectral;
  so.jobs = c.jobs;
  so.solver = c.solver;

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!rows[i]) todo.push_back(i);

  const auto save = [&](bool complete) {
    json done = json::object();
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i]) done[std::to_string(i)] = *rows[i];
    json m = {{"config", to_json(c)}, {"fingerprint", fp}, {"points", pts.size()}, {"complete", complete},
              {"csv", "sweep.csv"}, {"rows", done}};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
    std::string csv = kSweepHeader;
    for (const auto& r : rows)
      if (r) csv += *r + "\n";
    write_text(dir / "sweep.csv", csv);
  };

  State reference;
  if (!todo.empty()) {
    chq_state* ref = nullptr;
    const chq_status st = chq_solve(c.d, c.d - 2.0, 2.0, grid.get(), &c.solver, &ref);
    reference.reset(ref);
    check(st);
  }

  std::size_t budget = max_points ? static_cast<std::size_t>(std::max(0, *max_points)) : todo.size();
  std::size_t pos = 0;
  while (pos < todo.size() && budget > 0) {
    const std::size_t chunk = std::min({static_cast<std::size_t>(c.jobs), todo.size() - pos, budget});
    std::vector<double> as, ps;
    for (std::size_t j = 0; j < chunk; ++j) {
      as.push_back(pts[todo[pos + j]].first);
      ps.push_back(pts[todo[pos + j]].second);
    }
    std::vector<chq_sweep_record> recs(chunk);
    check(chq_sweep(c.d, as.data(), ps.data(), chunk, grid.get(), reference.get(), &so, recs.data()));
    for (std::size_t j = 0; j < chunk; ++j) {
      const std::size_t i = todo[pos + j];
      rows[i] = csv_row(i, recs[j]);
      std::printf("  [%zu/%zu] alpha=%.6g p=%.6g %s H1 dist %.4e%s%s\n", i + 1, pts.size(), recs[j].alpha, recs[j].p,
                  recs[j].converged ? "converged" : "FAILED", recs[j].dist_H1, recs[j].error[0] ? "  " : "",
                  recs[j].error);
    }
    pos += chunk;
    budget -= chunk;
    save(false);
  }

  const bool complete = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.has_value(); });
  save(complete);
  std::printf("wrote %s and %s (%s)\n", (dir / "sweep.csv").string().c_str(), (dir / "manifest.json").string().c_str(),
              complete ? "complete" : "partial");
  if (!complete) return 0;
  for (const auto& r : rows) {
    // converged is the fourth column
    std::size_t comma = 0;
    for (int k = 0; k < 3; ++k) comma = r->find(',', comma) + 1;
    if (r->compare(comma, 1, "1") != 0) return 2;
  }
  return 0;
}

// ---------------------------------------------------------------- riesz

std::vector<std::pair<double, double>> read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::string line;
  std::vector<std::pair<double, double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) {
      if (line_no == 1) continue;
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected two columns r,value");
    }
    try {
      std::size_t ea = 0, eb = 0;
      const double r = std::stod(a, &ea);
      const double v = std::stod(b, &eb);
      rows.emplace_back(r, v);
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header
      throw UsageError(path + ":" + std::to_string(line_no) + ": not a number");
    }
  }
  if (rows.size() < 2) throw UsageError(path + ": need at least two profile rows");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].first > rows[i - 1].first)) throw UsageError(path + ": r column must be increasing");
  return rows;
}

// Piecewise-linear resampling; constant below the first radius, zero beyond the last.
std::vector<double> resample(const std::vector<std::pair<double, double>>& prof, const std::vector<double>& r) {
  std::vector<double> out(r.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = r[i];
    if (x <= prof.front().first) {
      out[i] = prof.front().second;
      continue;
    }
    if (x > prof.back().first) {
      out[i] = 0.0;
      continue;
    }
    while (prof[j + 1].first < x) ++j;
    const double t = (x - prof[j].first) / (prof[j + 1].first - prof[j].first);
    out[i] = (1.0 - t) * prof[j].second + t * prof[j + 1].second;
  }
  return out;
}

int run_riesz(const std::string& path, const Flags& flags) {
  const RunConfig c = resolve(flags);
  const auto prof = read_profile(path);
  const fs::path dir = prepare_out_dir(c);
  const Grid grid = make_grid(c.d, c);
  const auto r = grid_nodes(grid.get());
  bool on_grid = prof.size() == r.size();
  for (std::size_t i = 0; on_grid && i < r.size(); ++i)
    on_grid = std::abs(prof[i].first - r[i]) <= 1e-12 * std::max(1.0, r[i]);
  std::vector<double> f(r.size());
  if (on_grid)
    for (std::size_t i = 0; i < r.size(); ++i) f[i] = prof[i].second;
  else
    f = resample(prof, r);
  std::vector<double> v(r.size());
  check(chq_riesz(grid.get(), c.alpha, f.data(), f.size(), c.solver.angular_kernel, v.data()));
  std::string csv = "r,value\n";
  for (std::size_t i = 0; i < r.size(); ++i) csv += num(r[i]) + "," + num(v[i]) + "\n";
  write_text(dir / "riesz.csv", csv);
  std::printf("Riesz potential (d=%d, alpha=%g) of %s%s; potential at r=%.4g: %.10g\n", c.d, c.alpha, path.c_str(),
              on_grid ? "" : " (resampled onto the grid)", r.front(), v.front());
  std::printf("wrote %s\n", (dir / "riesz.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states, Riesz potentials and linearized spectra of the Choquard equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", chq_version());
  Flags f;
  std::string state_path;
  std::string profile_path;
  bool resume = false;
  std::optional<int> max_points;

  auto* solve = app.add_subcommand("solve", "compute a ground state; writes Q.json and Q.csv");
  solve->add_option("--d", f.d, "dimension");
  solve->add_option("--alpha", f.alpha, "Riesz exponent, 0 < alpha < d");
  solve->add_option("--p", f.p, "nonlinearity exponent");
  solve->add_flag("--model", f.model, "local model -Δu + u = |u|^{p-1}u instead");
  add_grid_solver(solve, f);

  auto* verify = app.add_subcommand("verify", "check a stored ground state; exit 0 iff all checks pass");
  verify->add_option("state", state_path, "state JSON written by solve")->required();
  verify->add_option("--config", f.config, "JSON run configuration");
  verify->add_option("--out-dir", f.out_dir, "directory for verify.json");

  auto* spectrum = app.add_subcommand("spectrum", "smallest eigenvalues of the linearized operator");
  spectrum->add_option("state", state_path, "state JSON written by solve")->required();
  spectrum->add_option("--ell", f.ell, "sector: 0, 1 or both");
  spectrum->add_option("--k", f.k, "eigenvalues per sector (1..10)");
  spectrum->add_option("--gap-tol", f.gap_tol, "eigenvalues closer to 0 count as kernel");
  spectrum->add_flag("--zero-field", f.zero_field, "use the zero field on the same grid");
  spectrum->add_flag("--dump-fields", f.dump_fields, "write eigenfields as CSV");
  spectrum->add_option("--config", f.config, "JSON run configuration");
  spectrum->add_option("--out-dir", f.out_dir, "directory for spectrum.json");

  auto* sweep = app.add_subcommand("sweep", "solve over a parameter lattice; writes sweep.csv and manifest.json");
  sweep->add_option("--d", f.d, "dimension");
  sweep->add_option("--alphas", f.alphas, "alpha values")->expected(1, -1);
  sweep->add_option("--ps", f.ps, "p values")->expected(1, -1);
  sweep->add_option("--geometric", f.geometric, "points (d-2 + a0 2^-k, 2 + p0 2^-k), k = 0..K");
  sweep->add_option("--a0", f.a0, "alpha offset of the geometric path");
  sweep->add_option("--p0", f.p0, "p offset of the geometric path");
  sweep->add_flag("--continued", f.continued, "continue from the Newtonian state instead of solving afresh");
  sweep->add_flag("--two-route", f.two_route, "run both routes and record their gap");
  sweep->add_option("--continuation-steps", f.continuation_steps, "increments per continuation");
  sweep->add_flag("--spectral", f.spectral, "record nearest-to-zero eigenvalues");
  sweep->add_option("--jobs", f.jobs, "worker threads");
  sweep->add_flag("--resume", resume, "continue the run recorded in <out-dir>/manifest.json");
  sweep->add_option("--max-points", max_points, "stop after this many new points (the manifest stays partial)");
  add_grid_solver(sweep, f);

  auto* riesz = app.add_subcommand("riesz", "Riesz potential of a radial profile given as CSV r,value");
  riesz->add_option("profile", profile_path, "CSV with columns r,value")->required();
  riesz->add_option("--d", f.d, "dimension");
  riesz->add_option("--alpha", f.alpha, "Riesz exponent, 0 < alpha < d");
  add_grid_solver(riesz, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return run_solve(f);
    if (*verify) return run_verify(state_path, f);
    if (*spectrum) return run_spectrum(state_path, f);
    if (*sweep) return run_sweep(f, resume, max_points);
    if (*riesz) return run_riesz(profile_path, f);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ApiError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.status == CHQ_NOT_CONVERGED ? 2 : 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: configuration: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
