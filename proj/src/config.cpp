#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "tunneltime/run.hpp"

namespace tunneltime {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw std::invalid_argument(fmt::format("{}: expected a finite number, got '{}'", key, v));
  }
  return out;
}

std::size_t to_count(std::string_view key, std::string_view v) {
  v = trim(v);
  unsigned long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw std::invalid_argument(fmt::format("{}: expected a non-negative integer, got '{}'", key, v));
  }
  return static_cast<std::size_t>(out);
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

Setter number(double RunConfig::*outer) {
  return [outer](RunConfig& c, std::string_view k, std::string_view v) { c.*outer = to_double(k, v); };
}

template <class Part>
Setter member(Part RunConfig::*part, double Part::*field) {
  return [part, field](RunConfig& c, std::string_view k, std::string_view v) {
    (c.*part).*field = to_double(k, v);
  };
}

const std::vector<std::pair<std::string_view, Setter>>& setters() {
  static const std::vector<std::pair<std::string_view, Setter>> table = {
      {"v0", member(&RunConfig::barrier, &BarrierConfig::v0)},
      {"d", member(&RunConfig::barrier, &BarrierConfig::d)},
      {"m", member(&RunConfig::barrier, &BarrierConfig::m)},
      {"k_av", member(&RunConfig::packet, &PacketConfig::k_av)},
      {"delta", member(&RunConfig::packet, &PacketConfig::delta)},
      {"x0", member(&RunConfig::packet, &PacketConfig::x0)},
      {"n_k", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_k = to_count(k, v); }},
      {"rule",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         v = trim(v);
         if (v == "trapezoid") {
           c.rule = QuadratureRule::trapezoid;
         } else if (v == "simpson") {
           c.rule = QuadratureRule::simpson;
         } else {
           throw std::invalid_argument(fmt::format("{}: expected trapezoid or simpson, got '{}'", k, v));
         }
       }},
      {"dt_fine", member(&RunConfig::time_grid, &TimeGrid::dt_fine)},
      {"fine_end", member(&RunConfig::time_grid, &TimeGrid::fine_end)},
      {"dt_coarse", member(&RunConfig::time_grid, &TimeGrid::dt_coarse)},
      {"t_max", member(&RunConfig::time_grid, &TimeGrid::t_max)},
      {"spectral_after", number(&RunConfig::spectral_after)},
      {"epsilon", number(&RunConfig::epsilon)},
      {"fit_lo", member(&RunConfig::fit_window, &FitWindow::t_lo)},
      {"fit_hi", member(&RunConfig::fit_window, &FitWindow::t_hi)},
      {"region_re_lo", member(&RunConfig::region, &ComplexRect::re_lo)},
      {"region_re_hi", member(&RunConfig::region, &ComplexRect::re_hi)},
      {"region_im_lo", member(&RunConfig::region, &ComplexRect::im_lo)},
      {"region_im_hi", member(&RunConfig::region, &ComplexRect::im_hi)},
      {"out_dir",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         v = trim(v);
         if (v.empty()) throw std::invalid_argument(fmt::format("{}: must not be empty", k));
         c.out_dir = std::string(v);
       }},
  };
  return table;
}

}  // namespace

bool RunConfig::reference_parameters() const {
  const RunConfig ref;
  return barrier.v0 == ref.barrier.v0 && barrier.d == ref.barrier.d && barrier.m == ref.barrier.m &&
         packet.k_av == ref.packet.k_av && packet.delta == ref.packet.delta &&
         packet.x0 == ref.packet.x0 && epsilon == ref.epsilon &&
         fit_window.t_lo == ref.fit_window.t_lo && fit_window.t_hi == ref.fit_window.t_hi &&
         time_grid.t_max == ref.time_grid.t_max;
}

void RunConfig::validate() const {
  barrier.validate();
  packet.validate();
  quadrature().validate(packet);
  time_grid.validate();
  region.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon: must be > 0");
  if (!(spectral_after >= 0.0)) throw std::invalid_argument("spectral_after: must be >= 0");
  if (!(fit_window.t_hi > fit_window.t_lo) || fit_window.t_lo < 0.0) {
    throw std::invalid_argument("fit_lo/fit_hi: need 0 <= fit_lo < fit_hi");
  }
  if (fit_window.t_lo >= time_grid.t_max) {
    throw std::invalid_argument("fit_lo: must be below t_max");
  }
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      set(cfg, key, value);
      return;
    }
  }
  throw std::invalid_argument(fmt::format("unknown configuration key '{}'", key));
}

RunConfig parse_config_text(std::string_view text, std::string_view source) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("{}:{}: expected key=value, got '{}'", source, line_no, line));
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.emplace(key).second) {
      throw std::invalid_argument(fmt::format("{}:{}: duplicate key '{}'", source, line_no, key));
    }
    try {
      apply_setting(cfg, key, line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : parse_config_file(path);
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  auto num = [](double v) { return fmt::format("{}", v); };
  return {
      {"v0", num(c.barrier.v0)},
      {"d", num(c.barrier.d)},
      {"m", num(c.barrier.m)},
      {"k_av", num(c.packet.k_av)},
      {"delta", num(c.packet.delta)},
      {"x0", num(c.packet.x0)},
      {"n_k", fmt::format("{}", c.n_k)},
      {"rule", to_string(c.rule)},
      {"dt_fine", num(c.time_grid.dt_fine)},
      {"fine_end", num(c.time_grid.fine_end)},
      {"dt_coarse", num(c.time_grid.dt_coarse)},
      {"t_max", num(c.time_grid.t_max)},
      {"spectral_after", num(c.spectral_after)},
      {"epsilon", num(c.epsilon)},
      {"fit_lo", num(c.fit_window.t_lo)},
      {"fit_hi", num(c.fit_window.t_hi)},
      {"region_re_lo", num(c.region.re_lo)},
      {"region_re_hi", num(c.region.re_hi)},
      {"region_im_lo", num(c.region.im_lo)},
      {"region_im_hi", num(c.region.im_hi)},
      {"out_dir", c.out_dir.string()},
  };
}

}  // namespace tunneltime
