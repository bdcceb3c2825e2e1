#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tunneltime/depletion.hpp"
#include "tunneltime/probabilities.hpp"

namespace tunneltime {

/// Everything a run depends on. Defaults are the reference parameter set.
struct RunConfig {
  BarrierConfig barrier;
  PacketConfig packet;
  std::size_t n_k = 4096;
  QuadratureRule rule = QuadratureRule::trapezoid;
  TimeGrid time_grid;
  double spectral_after = 10.0;
  double epsilon = 0.01;
  FitWindow fit_window;
  ComplexRect region;
  std::filesystem::path out_dir = "out";

  QuadratureSpec quadrature() const { return QuadratureSpec::around(packet, n_k, rule); }
  /// True when the physical parameters match the reference set, so that the
  /// reference-value checks apply.
  bool reference_parameters() const;
  void validate() const;
};

/// Sets one field from its textual key (v0, d, m, k_av, delta, x0, n_k, rule,
/// dt_fine, fine_end, dt_coarse, t_max, spectral_after, epsilon, fit_lo, fit_hi,
/// region_re_lo, region_re_hi, region_im_lo, region_im_hi, out_dir).
/// Throws std::invalid_argument naming the key on unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// key=value lines; '#' starts a comment; duplicate and unknown keys are rejected.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<text>");
RunConfig parse_config_file(const std::filesystem::path& path);

/// File (optional, may be empty) first, then overrides in order; the result is validated.
RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

/// Ordered key/value echo of every setting, parseable by parse_config_text.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

enum class Stage { snapshot, trace, times, stationary, poles, fit, all };
Stage parse_stage(std::string_view name);
const char* to_string(Stage s);

struct Check {
  enum class Kind { within, below, above };
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // band half-width for within; the bound itself for below/above
  Kind kind = Kind::within;
  bool pass = false;

  std::string band() const;
};

Check check_within(std::string name, double value, double expected, double tolerance);
Check check_below(std::string name, double value, double bound);
Check check_above(std::string name, double value, double bound);

struct OutputFile {
  std::string name;
  std::string sha256;
};

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::string version;
  std::vector<std::string> stages;
  std::vector<OutputFile> outputs;
  std::vector<std::pair<std::string, double>> wall_seconds;
  std::vector<Check> checks;
  std::size_t workers = 1;

  bool all_passed() const;
};

/// Runs the requested stage (and whatever it depends on), writes CSVs, report.txt
/// and manifest.json into cfg.out_dir. Stage failures are rethrown as
/// std::runtime_error prefixed with the stage name.
RunManifest run(const RunConfig& cfg, Stage stage, std::size_t workers);
RunManifest run_all(const RunConfig& cfg, std::size_t workers);

/// Writes the bytes to a temporary sibling and renames it over the target.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

const char* version();

}  // namespace tunneltime
