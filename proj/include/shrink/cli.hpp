#pragma once

// Subcommands of the `shrink` tool as library functions. Each one maps a
// RunConfig to the exact text the tool prints.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "shrink/hypergeom.hpp"
#include "shrink/json_io.hpp"
#include "shrink/risksim.hpp"
#include "shrink/shrinkage.hpp"

namespace shrink::cli {

enum class Format { Json, Csv, Table };
Format parse_format(const std::string& s);
const char* to_string(Format f);

struct RunConfig {
  HyperParams hp{5, 5, -1.0, 0.0, 0.0};
  std::string input;
  bool intercept = false;
  std::vector<double> grid;  // w (phi), |theta| (simulate), z (identities); empty = default
  risksim::SphericalErrorModel model = risksim::SphericalErrorModel::normal();
  std::int64_t count = 100000;
  std::uint64_t seed = 1;
  double sigma2 = 1.0;
  bool spherical = false;  // check: b = -a-2 family
  hypergeom::HypergeomParams hypergeom{1.5, 2.5, 5.0};
  Format format = Format::Json;
};

// Keys: hp, input, intercept, grid, model, count, seed, sigma2, spherical,
// hypergeom, format. `grid` is a list or {"lo", "hi", "points", "scale"}
// with scale "log" (default) or "linear". Unknown keys are rejected.
RunConfig config_from_json(const Json& j, RunConfig base = {});
RunConfig load_config(const std::string& path);
Json config_to_json(const RunConfig& cfg);

// "lo,hi,n" -> n points, log or linear spacing.
std::vector<double> parse_grid_range(const std::string& spec, bool log_scale);
// "x1,x2,..."
std::vector<double> parse_list(const std::string& spec);

std::vector<double> default_theta_grid();  // 0, 1, ..., 9
std::vector<double> default_z_grid();      // 0.05, 0.15, ..., 0.95

// Cells of a CSV or plain-text table. Reals print with 17 significant
// digits in CSV and 6 in tables; NaN prints as "nan".
using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

struct Table {
  std::vector<std::pair<std::string, Cell>> header_notes;  // "# key=value" lines
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_real(double x, int digits = 17);
std::string render_csv(const Table& t);
std::string render_table(const Table& t);

struct Output {
  Json json;
  Table table;
};

std::string render(const Output& out, Format f);

Output cmd_estimate(const RunConfig& cfg);
Output cmd_phi(const RunConfig& cfg);
Output cmd_check(const RunConfig& cfg);
Output cmd_simulate(const RunConfig& cfg);
Output cmd_identities(const RunConfig& cfg);

// Dispatch by subcommand name; ValidationError for an unknown name.
std::string run(const std::string& subcommand, const RunConfig& cfg);

}  // namespace shrink::cli
