#include "cfas/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <variant>

#include "cfas/chansim.hpp"
#include "cfas/equiv.hpp"
#include "cfas/errors.hpp"
#include "cfas/hsp.hpp"
#include "cfas/lcr.hpp"

namespace cfas::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Area ratios the table3 command is checked against (rows t_ray 0.5..2, columns kappa 1, 4, 7).
constexpr double kReferenceAreaRatios[4][3] = {
    {6.25, 41.42, 77.44}, {7.90, 70.39, 131.10}, {9.65, 100.88, 205.83}, {11.25, 132.37, 305.03}};

// Angles a hair above pi/2 (e.g. a grid end written as 1.5708) are clamped.
constexpr double kAngleSlack = 1e-3;

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return csv_field(v);
      },
      cell);
}

json cell_json(const Cell& cell) {
  return std::visit([](const auto& v) -> json { return v; }, cell);
}

void write_table(const Table& table, const std::string& format, std::ostream& os) {
  if (format == "json") {
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[table.header[i]] = cell_json(row[i]);
      rows.push_back(std::move(obj));
    }
    os << rows.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << csv_field(table.header[i]);
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

struct RunInfo {
  double jitter = 0.0;
  json details = json::object();
};

int emit(const RunConfig& cfg, const Table& table, const RunInfo& info, std::chrono::steady_clock::time_point start,
         std::ostream& out) {
  std::string path = cfg.output;
  if (path.empty()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir)
      path = (std::filesystem::path(dir) / (cfg.command + "." + cfg.format)).string();
  }
  if (path.empty()) {
    write_table(table, cfg.format, out);
  } else {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open output file '" + path + "'");
    write_table(table, cfg.format, file);
  }

  std::string manifest_path = cfg.manifest;
  if (manifest_path.empty() && !path.empty()) manifest_path = path + ".manifest.json";
  if (!manifest_path.empty()) {
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"parameters", cfg},     {"seed", cfg.seed},           {"jitter", info.jitter},
                     {"wall_time_ms", elapsed}, {"version", kVersion}, {"details", info.details}};
    std::ofstream file(manifest_path, std::ios::binary);
    if (!file) throw UsageError("cannot open manifest file '" + manifest_path + "'");
    file << manifest.dump(2) << '\n';
  }
  return kOk;
}

double to_radians(double value, bool degrees) { return degrees ? value * std::numbers::pi / 180.0 : value; }

double checked_phi(double phi) {
  const double half_pi = std::numbers::pi / 2;
  if (phi > half_pi && phi <= half_pi + kAngleSlack) return half_pi;
  if (!(phi >= 0.0 && phi <= half_pi)) throw UsageError("--phi must lie in [0, pi/2] radians");
  return phi;
}

double theta(const RunConfig& cfg) {
  return cfg.theta ? to_radians(*cfg.theta, cfg.degrees) : std::numbers::pi / 2;
}

ChannelParams channel(const RunConfig& cfg) {
  ChannelParams params{cfg.kappa, checked_phi(to_radians(cfg.phi, cfg.degrees)), theta(cfg), cfg.gain_ratio};
  if (!(params.kappa >= 0.0) || !std::isfinite(params.kappa)) throw UsageError("--kappa must be >= 0");
  if (!(params.gain_ratio > 0.0)) throw UsageError("--gain-ratio must be > 0");
  if (!(params.theta >= 0.0 && params.theta <= std::numbers::pi)) throw UsageError("--theta must lie in [0, pi]");
  return params;
}

CorrelationModel correlation(const RunConfig& cfg) {
  if (cfg.corr == "jakes") {
    if (cfg.corr_a) throw UsageError("--corr-a only applies to --corr quadratic");
    return CorrelationModel::jakes();
  }
  if (cfg.corr == "quadratic") {
    const double a = cfg.corr_a.value_or(std::numbers::pi * std::numbers::pi);
    if (!(a > 0.0)) throw UsageError("--corr-a must be > 0");
    return CorrelationModel::quadratic(a);
  }
  throw UsageError("--corr must be 'jakes' or 'quadratic'");
}

Geometry geometry(const RunConfig& cfg) {
  if (cfg.dim < 0 || cfg.dim > 3) throw UsageError("--dim must be 0, 1, 2 or 3");
  if (static_cast<int>(cfg.sides.size()) != cfg.dim)
    throw UsageError("--sides must list " + std::to_string(cfg.dim) + " side length(s) for --dim " +
                     std::to_string(cfg.dim));
  for (double t : cfg.sides)
    if (!(t >= 0.0) || !std::isfinite(t)) throw UsageError("--sides values must be >= 0");
  return Geometry{cfg.sides};
}

void check_format(const RunConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be 'csv' or 'json'");
}

// Resolves the threshold options into normalized x values.
std::vector<double> x_values(const RunConfig& cfg, const ChannelParams& params) {
  const int given = cfg.x.has_value() + cfg.x_grid.has_value() + cfg.u.has_value() + cfg.u_grid.has_value() +
                    cfg.u_db.has_value() + cfg.u_db_grid.has_value();
  if (given != 1) throw UsageError("give exactly one of --x, --x-grid, --u, --u-grid, --u-db, --u-db-grid");
  auto from_u = [&](const std::vector<double>& us) {
    std::vector<double> xs;
    for (double u : us) {
      if (!(u > 0.0)) throw UsageError("thresholds u must be > 0");
      xs.push_back(hsp::normalize_threshold(u, params).x);
    }
    return xs;
  };
  auto from_db = [](const std::vector<double>& dbs) {
    std::vector<double> us;
    for (double db : dbs) us.push_back(std::pow(10.0, db / 10.0));
    return us;
  };
  std::vector<double> xs;
  if (cfg.x) xs = {*cfg.x};
  if (cfg.x_grid) xs = parse_grid(*cfg.x_grid);
  if (cfg.u) xs = from_u({*cfg.u});
  if (cfg.u_grid) xs = from_u(parse_grid(*cfg.u_grid));
  if (cfg.u_db) xs = from_u(from_db({*cfg.u_db}));
  if (cfg.u_db_grid) xs = from_u(from_db(parse_grid(*cfg.u_db_grid)));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) throw UsageError("thresholds must be positive and finite");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw UsageError("threshold grid must be strictly increasing");
  }
  return xs;
}

lcr::LcrIntegrand integrand(const RunConfig& cfg) {
  if (cfg.integrand == "derived") return lcr::LcrIntegrand::Derived;
  if (cfg.integrand == "erfi") return lcr::LcrIntegrand::Erfi;
  throw UsageError("--integrand must be 'derived' or 'erfi'");
}

chansim::SteeringConvention steering(const RunConfig& cfg) {
  if (cfg.steering == "as-listed") return chansim::SteeringConvention::AsListed;
  if (cfg.steering == "embedded") return chansim::SteeringConvention::Embedded;
  throw UsageError("--steering must be 'as-listed' or 'embedded'");
}

int cmd_hsp(const RunConfig& cfg, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto params = channel(cfg);
  const auto geom = geometry(cfg);
  const auto corr = correlation(cfg);
  const auto rows = hsp::hsp_sweep(cfg.dim, params, geom, x_values(cfg, params), corr);
  Table table{{"x", "u", "hsp", "asymptotic"}, {}};
  for (const auto& r : rows) table.rows.push_back({r.x, r.u, r.hsp, r.asymptotic});
  return emit(cfg, table, {}, start, out);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto params = channel(cfg);
  const auto geom = geometry(cfg);
  const auto corr = correlation(cfg);
  if (cfg.replicates < 100) throw UsageError("--replicates must be >= 100");
  if (cfg.workers < 1) throw UsageError("--workers must be >= 1");

  chansim::GridSpec grid{cfg.dim, cfg.sides, cfg.spacing.value_or(cfg.dim == 3 ? 0.025 : 0.01), cfg.point_cap};
  if (!(grid.spacing > 0.0)) throw UsageError("--spacing must be > 0");
  const auto xs = x_values(cfg, params);
  std::vector<double> us;
  for (double x : xs) us.push_back(hsp::denormalize_threshold(x, params).u);

  chansim::SimOptions options;
  options.replicates = cfg.replicates;
  options.seed = cfg.seed;
  options.workers = cfg.workers;
  options.convention = steering(cfg);
  chansim::SimDiagnostics diag;
  std::vector<chansim::HspEstimate> estimates;
  try {
    estimates = chansim::estimate_hsp_curve(params, grid, corr, us, options, &diag);
  } catch (const ConvergenceError& e) {
    // J0(2 pi d) is a planar correlation; on a 3D lattice it has negative eigenvalues.
    if (cfg.dim == 3 && corr.family == CorrelationFamily::Jakes)
      throw ConvergenceError(std::string(e.what()) +
                             "; the jakes kernel is not positive definite in 3D, use --corr quadratic");
    throw;
  }

  Table table{{"u", "x", "p_hat", "stderr", "replicates", "analytic"}, {}};
  for (const auto& e : estimates)
    table.rows.push_back({e.u, e.x, e.p_hat, e.stderr_, static_cast<long long>(e.replicates),
                          hsp::hsp_closed(cfg.dim, params, geom, e.x, corr)});
  RunInfo info;
  info.jitter = diag.jitter;
  info.details = {{"grid_points", diag.points}, {"spacing", grid.spacing}};
  return emit(cfg, table, info, start, out);
}

int cmd_lcr(const RunConfig& cfg, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto params = channel(cfg);
  const auto corr = correlation(cfg);
  if (!(cfg.t1 >= 0.0)) throw UsageError("--t1 must be >= 0");
  const auto form = integrand(cfg);
  Table table{{"x", "rate", "imag_residual", "hsp_lcr", "hsp_eec", "difference"}, {}};
  for (double x : x_values(cfg, params)) {
    const auto rate = lcr::lcr_rate(params, x, cfg.quad_order, form, corr);
    const double q0 = hsp::hsp_closed(0, params, Geometry{}, x, corr);
    const double by_lcr = q0 + cfg.t1 * rate.rate;
    const double by_eec = hsp::hsp_closed(1, params, Geometry{{cfg.t1}}, x, corr);
    table.rows.push_back({x, rate.rate, rate.imag_residual, by_lcr, by_eec, by_lcr - by_eec});
  }
  return emit(cfg, table, {}, start, out);
}

int cmd_lcr_map(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto corr = correlation(cfg);
  if (!(cfg.target > 0.0 && cfg.target < 0.5)) throw UsageError("--target must lie in (0, 0.5)");
  if (!(cfg.t1 >= 0.0)) throw UsageError("--t1 must be >= 0");
  const auto kappas = parse_grid(cfg.kappa_grid);
  std::vector<double> phis;
  for (double phi : parse_grid(cfg.phi_grid)) phis.push_back(checked_phi(to_radians(phi, cfg.degrees)));
  for (double k : kappas)
    if (!(k >= 0.0)) throw UsageError("--kappa-grid values must be >= 0");

  lcr::DiscrepancyOptions options;
  options.theta = theta(cfg);
  if (!(options.theta >= 0.0 && options.theta <= std::numbers::pi)) throw UsageError("--theta must lie in [0, pi]");
  options.quad_order = cfg.quad_order;
  options.integrand = integrand(cfg);
  const auto rows = lcr::discrepancy_map(kappas, phis, cfg.t1, cfg.target, options, corr);

  Table table{{"kappa", "phi", "x", "difference", "status"}, {}};
  int failures = 0;
  for (const auto& r : rows) {
    table.rows.push_back({r.kappa, r.phi, r.x, r.difference, r.ok ? std::string("ok") : r.message});
    if (!r.ok) {
      ++failures;
      err << "error: solver failed at kappa=" << format_double(r.kappa) << " phi=" << format_double(r.phi) << ": "
          << r.message << '\n';
    }
  }
  emit(cfg, table, {}, start, out);
  return failures ? kSolver : kOk;
}

int cmd_equiv(const RunConfig& cfg, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto corr = correlation(cfg);
  const auto mapping = equiv::mapping_from_string(cfg.mapping);
  const auto r = equiv::solve_equivalent_side(cfg.t_ray, cfg.kappa, cfg.target, corr, mapping);
  Table table{{"t_ray", "kappa", "target", "x0", "x", "t_rice", "area_ratio", "iterations", "non_physical"}, {}};
  table.rows.push_back({r.t_ray, r.kappa, cfg.target, r.x0, r.x, r.t_rice, r.area_ratio,
                        static_cast<long long>(r.iterations), r.non_physical});
  RunInfo info;
  info.details = {{"mapping", equiv::to_string(mapping)}};
  return emit(cfg, table, info, start, out);
}

int cmd_table3(const RunConfig& cfg, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto corr = correlation(cfg);
  const auto mapping = equiv::mapping_from_string(cfg.mapping);
  const auto grid = equiv::table3(corr, mapping);
  Table table{{"t_ray", "kappa", "area_ratio", "reference", "rel_error", "t_rice", "x0", "x"}, {}};
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < grid[i].size(); ++k) {
      const auto& r = grid[i][k];
      const double ref = kReferenceAreaRatios[i][k];
      const double rel = (r.area_ratio - ref) / ref;
      worst = std::max(worst, std::abs(rel));
      table.rows.push_back({r.t_ray, r.kappa, r.area_ratio, ref, rel, r.t_rice, r.x0, r.x});
    }
  }
  RunInfo info;
  info.details = {{"mapping", equiv::to_string(mapping)},
                  {"max_rel_error", worst},
                  {"reference_reproduced", worst <= 0.005}};
  return emit(cfg, table, info, start, out);
}

// Long flag name -> config key, shared by the parser and the JSON form.
void add_channel(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--kappa", cfg.kappa, "Ricean K-factor (linear)");
  sub->add_option("--phi", cfg.phi, "LoS azimuth (radians unless --degrees)");
  sub->add_option_function<double>("--theta", [&cfg](double v) { cfg.theta = v; },
                                   "LoS elevation (radians unless --degrees, default pi/2)");
  sub->add_option("--gain-ratio", cfg.gain_ratio, "beta E_s / sigma^2 (linear)");
  sub->add_flag("--degrees", cfg.degrees, "Angles are given in degrees");
}

void add_corr(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--corr", cfg.corr, "Correlation family: jakes | quadratic");
  sub->add_option_function<double>("--corr-a", [&cfg](double v) { cfg.corr_a = v; },
                                   "Small-lag curvature a of the quadratic family");
}

void add_geometry(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--dim", cfg.dim, "Dimension 0..3");
  sub->add_option_function<std::string>(
      "--sides", [&cfg](const std::string& s) { cfg.sides = s.empty() ? std::vector<double>{} : parse_grid(s); },
      "Comma-separated side lengths in wavelengths");
}

void add_thresholds(CLI::App* sub, RunConfig& cfg) {
  sub->add_option_function<double>("--x", [&cfg](double v) { cfg.x = v; }, "Normalized threshold");
  sub->add_option_function<std::string>("--x-grid", [&cfg](const std::string& v) { cfg.x_grid = v; },
                                        "Normalized thresholds, a:b:n or comma list");
  sub->add_option_function<double>("--u", [&cfg](double v) { cfg.u = v; }, "Raw SNR threshold (linear)");
  sub->add_option_function<std::string>("--u-grid", [&cfg](const std::string& v) { cfg.u_grid = v; },
                                        "Raw SNR thresholds (linear)");
  sub->add_option_function<double>("--u-db", [&cfg](double v) { cfg.u_db = v; }, "Raw SNR threshold in dB");
  sub->add_option_function<std::string>("--u-db-grid", [&cfg](const std::string& v) { cfg.u_db_grid = v; },
                                        "Raw SNR thresholds in dB");
}

void add_output(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--output,-o", cfg.output, "Output file (default stdout or $" + std::string(kOutputDirEnv) + ")");
  sub->add_option("--format", cfg.format, "csv | json");
  sub->add_option("--manifest", cfg.manifest, "Run manifest path");
  sub->add_option("--config", "JSON config file; flags override its values");
}

// Returns the value of --config if present, without running the full parser.
std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_grid(const std::string& spec) {
  auto number = [&](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      throw UsageError("invalid number '" + std::string(s) + "' in grid '" + spec + "'");
    return v;
  };
  std::vector<std::string_view> parts;
  const std::string_view all(spec);
  if (all.find(':') != std::string_view::npos) {
    std::size_t begin = 0;
    for (std::size_t pos; (pos = all.find(':', begin)) != std::string_view::npos; begin = pos + 1)
      parts.push_back(all.substr(begin, pos - begin));
    parts.push_back(all.substr(begin));
    if (parts.size() != 3) throw UsageError("range grid must look like start:stop:count, got '" + spec + "'");
    const double a = number(parts[0]);
    const double b = number(parts[1]);
    const double n = number(parts[2]);
    if (n < 1 || n != std::floor(n) || n > 1e7) throw UsageError("grid count must be a positive integer in '" + spec + "'");
    const auto count = static_cast<std::size_t>(n);
    if (count == 1) return {a};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.back() = b;
    return out;
  }
  std::vector<double> out;
  std::size_t begin = 0;
  for (std::size_t pos; (pos = all.find(',', begin)) != std::string_view::npos; begin = pos + 1)
    out.push_back(number(all.substr(begin, pos - begin)));
  out.push_back(number(all.substr(begin)));
  return out;
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"dim", c.dim},
           {"sides", c.sides},
           {"kappa", c.kappa},
           {"phi", c.phi},
           {"gain-ratio", c.gain_ratio},
           {"degrees", c.degrees},
           {"corr", c.corr},
           {"replicates", c.replicates},
           {"seed", c.seed},
           {"workers", c.workers},
           {"point-cap", c.point_cap},
           {"steering", c.steering},
           {"t1", c.t1},
           {"quad-order", c.quad_order},
           {"integrand", c.integrand},
           {"kappa-grid", c.kappa_grid},
           {"phi-grid", c.phi_grid},
           {"target", c.target},
           {"t-ray", c.t_ray},
           {"mapping", c.mapping},
           {"output", c.output},
           {"format", c.format},
           {"manifest", c.manifest}};
  auto put = [&j](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  put("theta", c.theta);
  put("corr-a", c.corr_a);
  put("x", c.x);
  put("x-grid", c.x_grid);
  put("u", c.u);
  put("u-grid", c.u_grid);
  put("u-db", c.u_db);
  put("u-db-grid", c.u_db_grid);
  put("spacing", c.spacing);
}

void from_json(const json& j, RunConfig& c) {
  static const std::vector<std::string> kKnown = {
      "command", "dim",   "sides",   "kappa",    "phi",       "theta",     "gain-ratio", "degrees",  "corr",
      "corr-a",  "x",     "x-grid",  "u",        "u-grid",    "u-db",      "u-db-grid",  "replicates", "seed",
      "workers", "spacing", "point-cap", "steering", "t1",      "quad-order", "integrand", "kappa-grid", "phi-grid",
      "target",  "t-ray", "mapping", "output",   "format",    "manifest"};
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) throw UsageError("unknown config key '" + key + "'");

  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  // Grids may be written either as "a:b:n" strings or as JSON arrays.
  auto grid_string = [&j](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (v.is_string()) return v.get<std::string>();
    std::string joined;
    for (const auto& e : v) joined += (joined.empty() ? "" : ",") + format_double(e.get<double>());
    return joined;
  };
  auto get_opt = [&j](const char* key, std::optional<double>& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  get("command", c.command);
  get("dim", c.dim);
  if (j.contains("sides")) {
    const auto& v = j.at("sides");
    c.sides = v.is_string() ? (v.get<std::string>().empty() ? std::vector<double>{} : parse_grid(v.get<std::string>()))
                            : v.get<std::vector<double>>();
  }
  get("kappa", c.kappa);
  get("phi", c.phi);
  get_opt("theta", c.theta);
  get("gain-ratio", c.gain_ratio);
  get("degrees", c.degrees);
  get("corr", c.corr);
  get_opt("corr-a", c.corr_a);
  get_opt("x", c.x);
  if (auto g = grid_string("x-grid")) c.x_grid = g;
  get_opt("u", c.u);
  if (auto g = grid_string("u-grid")) c.u_grid = g;
  get_opt("u-db", c.u_db);
  if (auto g = grid_string("u-db-grid")) c.u_db_grid = g;
  get("replicates", c.replicates);
  get("seed", c.seed);
  get("workers", c.workers);
  get_opt("spacing", c.spacing);
  get("point-cap", c.point_cap);
  get("steering", c.steering);
  get("t1", c.t1);
  get("quad-order", c.quad_order);
  get("integrand", c.integrand);
  if (auto g = grid_string("kappa-grid")) c.kappa_grid = *g;
  if (auto g = grid_string("phi-grid")) c.phi_grid = *g;
  get("target", c.target);
  get("t-ray", c.t_ray);
  get("mapping", c.mapping);
  get("output", c.output);
  get("format", c.format);
  get("manifest", c.manifest);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    if (auto path = find_config(args)) {
      std::ifstream file(*path);
      if (!file) throw UsageError("cannot read config file '" + *path + "'");
      cfg = json::parse(file).get<RunConfig>();
    }

    CLI::App app{"High-SNR probabilities of continuous fluid antennas in Ricean fading"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto* hsp_cmd = app.add_subcommand("hsp", "Closed-form HSP over a threshold grid");
    add_geometry(hsp_cmd, cfg);
    add_channel(hsp_cmd, cfg);
    add_corr(hsp_cmd, cfg);
    add_thresholds(hsp_cmd, cfg);
    add_output(hsp_cmd, cfg);

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo HSP from correlated Ricean fields");
    add_geometry(sim_cmd, cfg);
    add_channel(sim_cmd, cfg);
    add_corr(sim_cmd, cfg);
    add_thresholds(sim_cmd, cfg);
    add_output(sim_cmd, cfg);
    sim_cmd->add_option("--replicates", cfg.replicates, "Number of field replicates");
    sim_cmd->add_option("--seed", cfg.seed, "Master seed");
    sim_cmd->add_option("--workers", cfg.workers, "Worker threads (results do not depend on it)");
    sim_cmd->add_option_function<double>("--spacing", [&cfg](double v) { cfg.spacing = v; },
                                         "Grid step in wavelengths (default 0.01, 0.025 in 3D)");
    sim_cmd->add_option("--point-cap", cfg.point_cap, "Maximum number of grid points");
    sim_cmd->add_option("--steering", cfg.steering, "2D LoS phase convention: as-listed | embedded");

    auto* lcr_cmd = app.add_subcommand("lcr", "Level crossing rate and 1D LCR-based HSP");
    add_channel(lcr_cmd, cfg);
    add_corr(lcr_cmd, cfg);
    add_thresholds(lcr_cmd, cfg);
    add_output(lcr_cmd, cfg);
    lcr_cmd->add_option("--t1", cfg.t1, "Line length in wavelengths");
    lcr_cmd->add_option("--quad-order", cfg.quad_order, "Gauss-Legendre order");
    lcr_cmd->add_option("--integrand", cfg.integrand, "derived | erfi");

    auto* map_cmd = app.add_subcommand("lcr-map", "LCR minus EEC HSP over a (kappa, phi) grid");
    add_corr(map_cmd, cfg);
    add_output(map_cmd, cfg);
    map_cmd->add_option("--kappa-grid", cfg.kappa_grid, "K-factors, a:b:n or comma list");
    map_cmd->add_option("--phi-grid", cfg.phi_grid, "Azimuths, a:b:n or comma list");
    map_cmd->add_option_function<double>("--theta", [&cfg](double v) { cfg.theta = v; }, "LoS elevation");
    map_cmd->add_flag("--degrees", cfg.degrees, "Angles are given in degrees");
    map_cmd->add_option("--t1", cfg.t1, "Line length in wavelengths");
    map_cmd->add_option("--target", cfg.target, "HSP that fixes the threshold");
    map_cmd->add_option("--quad-order", cfg.quad_order, "Gauss-Legendre order");
    map_cmd->add_option("--integrand", cfg.integrand, "derived | erfi");

    auto* equiv_cmd = app.add_subcommand("equiv", "Ricean side length matching a Rayleigh square");
    add_corr(equiv_cmd, cfg);
    add_output(equiv_cmd, cfg);
    equiv_cmd->add_option("--t-ray", cfg.t_ray, "Rayleigh side length in wavelengths");
    equiv_cmd->add_option("--kappa", cfg.kappa, "Ricean K-factor");
    equiv_cmd->add_option("--target", cfg.target, "Target HSP");
    equiv_cmd->add_option("--mapping", cfg.mapping, "same-raw-threshold | ricean-calibrated");

    auto* table_cmd = app.add_subcommand("table3", "Ricean/Rayleigh area ratios for HSP 0.01");
    add_corr(table_cmd, cfg);
    add_output(table_cmd, cfg);
    table_cmd->add_option("--mapping", cfg.mapping, "same-raw-threshold | ricean-calibrated");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(kVersion) + "\n" : app.help());
        return kOk;
      }
      err << "error: " << e.what() << '\n';
      return kUsage;
    }

    check_format(cfg);
    if (hsp_cmd->parsed()) return cfg.command = "hsp", cmd_hsp(cfg, out);
    if (sim_cmd->parsed()) return cfg.command = "simulate", cmd_simulate(cfg, out);
    if (lcr_cmd->parsed()) return cfg.command = "lcr", cmd_lcr(cfg, out);
    if (map_cmd->parsed()) return cfg.command = "lcr-map", cmd_lcr_map(cfg, out, err);
    if (equiv_cmd->parsed()) return cfg.command = "equiv", cmd_equiv(cfg, out);
    if (table_cmd->parsed()) return cfg.command = "table3", cmd_table3(cfg, out);
    return kUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kCapacity;
  } catch (const ConvergenceError& e) {
    err << "error: solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::overflow_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad config: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cfas::cli
