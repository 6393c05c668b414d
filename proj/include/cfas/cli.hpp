#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cfas::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "CFAS_OUTPUT_DIR";

enum ExitCode : int { kOk = 0, kUsage = 2, kCapacity = 3, kSolver = 4 };

/// Every tunable of every subcommand. Keys of the JSON form are the long flag
/// names, so a config file mirrors the command line.
struct RunConfig {
  std::string command;

  int dim = 0;
  std::vector<double> sides;
  double kappa = 0.0;
  double phi = 0.0;
  std::optional<double> theta;  // unset: pi/2 whatever the angle unit
  double gain_ratio = 1.0;
  bool degrees = false;
  std::string corr = "jakes";
  std::optional<double> corr_a;

  // Threshold: exactly one of these is used.
  std::optional<double> x;
  std::optional<std::string> x_grid;
  std::optional<double> u;
  std::optional<std::string> u_grid;
  std::optional<double> u_db;
  std::optional<std::string> u_db_grid;

  // Simulation.
  std::size_t replicates = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::optional<double> spacing;
  std::size_t point_cap = 40000;
  std::string steering = "as-listed";

  // LCR.
  double t1 = 0.0;
  int quad_order = 64;
  std::string integrand = "derived";
  std::string kappa_grid = "0:14:15";
  std::string phi_grid = "0:1.5707963267948966:16";
  double target = 0.01;

  // Equivalent size.
  double t_ray = 1.0;
  std::string mapping = "same-raw-threshold";

  std::string output;  // empty: stdout, or $CFAS_OUTPUT_DIR/<command>.<format>
  std::string format = "csv";
  std::string manifest;  // empty: <output>.manifest.json when output is a file

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);

/// Parses "a:b:n" (n evenly spaced points from a to b) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& spec);

/// Shortest round-trip decimal, independent of the global locale.
std::string format_double(double value);

/// Runs one command line (args excludes the program name). Results go to the
/// output file or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cfas::cli
