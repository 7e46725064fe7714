#pragma once

#include <filesystem>
#include <string>

#include "choquard/solver.hpp"

namespace choquard {

/// r,value rows with 17 significant digits (exact round trip).
void write_field_csv(const RadialField& f, const std::filesystem::path& path);
/// Values of a CSV written by write_field_csv; the r column must equal grid's nodes.
RadialField read_field_csv(const std::filesystem::path& path, const GridPtr& grid);

/// JSON envelope {grid: {d, n, r_max, stretch}, r: [...], values: [...]}.
std::string field_json(const RadialField& f);

/// Writes <stem>.json (params, grid, norms, decay, residual, iterations, ...) and the
/// profile <stem>.csv next to it.
void write_state(const GroundState& state, const std::filesystem::path& json_path);
/// Reads a state written by write_state; the grid is rebuilt from the JSON metadata.
GroundState read_state(const std::filesystem::path& json_path);

}  // namespace choquard
