#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "tunneltime/parallel.hpp"
#include "tunneltime/run.hpp"

namespace {

// Flag name -> configuration key.
const std::vector<std::pair<std::string, std::string>> kFlags = {
    {"--v0", "v0"},           {"--d", "d"},           {"--m", "m"},
    {"--k-av", "k_av"},       {"--delta", "delta"},   {"--x0", "x0"},
    {"--epsilon", "epsilon"}, {"--t-max", "t_max"},   {"--n-k", "n_k"},
    {"--rule", "rule"},       {"--fit-lo", "fit_lo"}, {"--fit-hi", "fit_hi"},
    {"--out-dir", "out_dir"},
};

struct Options {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_options(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config_path, "key=value configuration file")
      ->check(CLI::ExistingFile);
  for (const auto& [flag, key] : kFlags) {
    cmd->add_option_function<std::string>(
        flag, [&opts, key = key](const std::string& v) { opts.values[key] = v; },
        "overrides '" + key + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian packet scattering on a rectangular barrier: times, traces and poles"};
  app.set_version_flag("--version", tunneltime::version());
  app.require_subcommand(1);

  Options opts;
  const char* names[] = {"snapshot", "trace", "times", "stationary", "poles", "fit", "all"};
  const char* help[] = {
      "psi(x, t) at t = 0, 0.9, 1.9, 2.7",
      "P1, P2, P3 versus time",
      "dwell, transmission and reflection times",
      "phase and Larmor-clock times at k_av, k_R, k_T",
      "complex zeros of the amplitude denominator",
      "exponential tail fits",
      "every stage",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(names); ++i) {
    subs.push_back(app.add_subcommand(names[i], help[i]));
    add_options(subs.back(), opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string chosen;
  for (auto* s : subs) {
    if (s->parsed()) chosen = s->get_name();
  }

  tunneltime::RunConfig cfg;
  try {
    std::vector<std::pair<std::string, std::string>> overrides(opts.values.begin(), opts.values.end());
    cfg = tunneltime::parse_config(opts.config_path, overrides);
  } catch (const std::exception& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return 2;
  }

  tunneltime::RunManifest manifest;
  try {
    manifest = tunneltime::run(cfg, tunneltime::parse_stage(chosen), tunneltime::worker_count());
  } catch (const std::exception& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 3;
  }

  std::size_t failed = 0;
  for (const auto& c : manifest.checks) {
    if (c.pass) continue;
    ++failed;
    fmt::print("FAIL {} = {:.6g} (band {})\n", c.name, c.value, c.band());
  }
  fmt::print("{} checks, {} failed; outputs in {}\n", manifest.checks.size(), failed,
             cfg.out_dir.string());
  return failed == 0 ? 0 : 1;
}
