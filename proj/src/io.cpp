#include "choquard/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "choquard/error.hpp"

namespace choquard {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json grid_json(const RadialGrid& g) {
  return {{"d", g.dim()}, {"n", g.size()}, {"r_max", g.r_max()}, {"stretch", g.stretch()}};
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json parse_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::io, path.string() + ": " + e.what());
  }
}

}  // namespace

void write_field_csv(const RadialField& f, const fs::path& path) {
  require(f.grid != nullptr, "field has no grid");
  require_same_grid(*f.grid, f);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << "r,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << fmt17(f.grid->nodes()[i]) << ',' << fmt17(f.values[i]) << '\n';
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

RadialField read_field_csv(const fs::path& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("r,value", 0) != 0)
    fail(ErrorCode::io, path.string() + ": expected header r,value");
  std::vector<double> values;
  const auto nodes = grid->nodes();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double r = 0.0, v = 0.0;
    char* end = nullptr;
    r = std::strtod(line.c_str(), &end);
    if (end == nullptr || *end != ',') fail(ErrorCode::io, path.string() + ": malformed row '" + line + "'");
    const char* rest = end + 1;
    v = std::strtod(rest, &end);
    if (end == rest) fail(ErrorCode::io, path.string() + ": malformed row '" + line + "'");
    const std::size_t i = values.size();
    if (i >= nodes.size()) fail(ErrorCode::grid_mismatch, path.string() + ": more rows than grid nodes");
    if (std::abs(r - nodes[i]) > 1e-12 * std::max(1.0, nodes[i]))
      fail(ErrorCode::grid_mismatch, path.string() + ": r column does not match the grid at row " + std::to_string(i + 1));
    values.push_back(v);
  }
  if (values.size() != nodes.size())
    fail(ErrorCode::grid_mismatch, path.string() + ": " + std::to_string(values.size()) + " rows for " +
                                       std::to_string(nodes.size()) + " grid nodes");
  return RadialField(grid, std::move(values));
}

std::string field_json(const RadialField& f) {
  require(f.grid != nullptr, "field has no grid");
  json j = {{"grid", grid_json(*f.grid)},
            {"r", std::vector<double>(f.grid->nodes().begin(), f.grid->nodes().end())},
            {"values", f.values}};
  return j.dump(2);
}

void write_state(const GroundState& s, const fs::path& json_path) {
  require(s.field.grid != nullptr, "state has no grid");
  fs::path csv_path = json_path;
  csv_path.replace_extension(".csv");
  json j;
  j["params"] = {{"d", s.params.d}, {"alpha", s.params.alpha}, {"p", s.params.p}};
  j["model"] = s.model;
  j["grid"] = grid_json(*s.field.grid);
  j["converged"] = s.converged;
  j["residual"] = s.residual;
  j["tolerance"] = s.tolerance;
  j["iterations"] = s.iterations;
  j["method"] = s.method;
  j["radially_decreasing"] = s.field.radially_decreasing;
  j["norms"] = s.norms;
  if (s.decay)
    j["decay"] = {{"gamma", s.decay->gamma}, {"C", s.decay->C}, {"beta", s.decay->beta},
                  {"r_a", s.decay->r_a}, {"r_b", s.decay->r_b}};
  else
    j["decay"] = nullptr;
  j["profile"] = csv_path.filename().string();

  write_field_csv(s.field, csv_path);
  std::ofstream out(json_path);
  if (!out) fail(ErrorCode::io, "cannot write " + json_path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::io, "write failed: " + json_path.string());
}

GroundState read_state(const fs::path& json_path) {
  const json j = parse_file(json_path);
  GroundState s;
  try {
    const auto& g = j.at("grid");
    const auto grid = make_grid(g.at("d").get<int>(), g.at("r_max").get<double>(), g.at("n").get<int>(),
                                g.at("stretch").get<double>());
    const auto& p = j.at("params");
    s.params = ChoquardParams::make(p.at("d").get<int>(), p.at("alpha").get<double>(), p.at("p").get<double>());
    require(s.params.d == grid->dim(), "state dimension differs from its grid");
    s.model = j.value("model", false);
    s.converged = j.at("converged").get<bool>();
    s.residual = j.at("residual").get<double>();
    s.tolerance = j.value("tolerance", 0.0);
    s.iterations = j.at("iterations").get<int>();
    s.method = j.value("method", std::string{});
    s.norms = j.at("norms").get<std::map<std::string, double>>();
    if (j.contains("decay") && !j["decay"].is_null()) {
      const auto& dj = j["decay"];
      s.decay = DecayFit{dj.at("gamma").get<double>(), dj.at("C").get<double>(), dj.at("beta").get<double>(),
                         dj.at("r_a").get<double>(), dj.at("r_b").get<double>()};
    }
    const fs::path profile = json_path.parent_path() / j.at("profile").get<std::string>();
    s.field = read_field_csv(profile, grid);
    s.field.radially_decreasing = s.field.check_radially_decreasing();
  } catch (const json::exception& e) {
    fail(ErrorCode::io, json_path.string() + ": " + e.what());
  }
  return s;
}

}  // namespace choquard
