#include "tunneltime/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "tunneltime/stationary_times.hpp"
#include "tunneltime/times.hpp"

#ifndef TUNNELTIME_VERSION
#define TUNNELTIME_VERSION "0.0.0"
#endif

namespace tunneltime {

namespace {

// Reference values for the default parameter set, with their tolerance bands.
namespace ref {
constexpr double kMomenta[] = {9.9, 9.696, 10.327};
constexpr double kPhase[] = {0.143, 0.0843, 1.011};
constexpr double kDwell[] = {0.140, 0.079, 1.008};
constexpr double kTrans[] = {2.357, NAN, 1.248};
constexpr double kRefl[] = {0.140, 0.079, NAN};
constexpr double kTol[] = {0.005, 0.005, 0.01};
constexpr double kR = 0.86, kT = 0.14, kProbTol = 0.01;
constexpr double kKr = 9.696, kKt = 10.327, kMomentumTol = 0.005;
constexpr double kTauD = 0.93, kTauDTol = 0.02;
constexpr double kTauT = 3.39, kTauR = 0.55, kGatedTol = 0.05;
constexpr double kTauDep = 16.19, kTauDepTol = 0.2;
constexpr double kPoleX = 10.03, kPoleXTol = 1e-3;
constexpr double kPoleY = -3.0565e-3, kPoleYTol = 1e-6;
constexpr double kPoleTau = 16.31, kPoleTauTol = 0.01;
}  // namespace ref

constexpr double kSnapshotTimes[] = {0.0, 0.9, 1.9, 2.7};

std::string num(double v) { return fmt::format("{:.12g}", v); }
std::string sci(double v) { return fmt::format("{:.12e}", v); }

class Report {
 public:
  void put(std::string key, std::string value) { lines_.emplace_back(std::move(key), std::move(value)); }
  void put(std::string key, double value) { put(std::move(key), num(value)); }
  std::string text(const std::vector<Check>& checks) const {
    std::string out;
    for (const auto& [k, v] : lines_) out += k + "=" + v + "\n";
    std::size_t failed = 0;
    for (const auto& c : checks) {
      out += fmt::format("check.{}.value={}\n", c.name, num(c.value));
      out += fmt::format("check.{}.band={}\n", c.name, c.band());
      out += fmt::format("check.{}.status={}\n", c.name, c.pass ? "pass" : "fail");
      if (!c.pass) ++failed;
    }
    out += fmt::format("summary.checks={}\nsummary.failed={}\nsummary.status={}\n", checks.size(),
                       failed, failed == 0 ? "pass" : "fail");
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

struct Context {
  const RunConfig& cfg;
  std::size_t workers;
  RunManifest manifest;
  Report report;
  std::unique_ptr<PacketModel> model;
  std::optional<Asymptotics> asym;
  std::optional<ProbabilityTrace> trace;
  std::optional<PoleResult> pole;
  std::vector<cplx> zeros;
  bool reference = false;

  void check(Check c) { manifest.checks.push_back(std::move(c)); }

  void emit(const std::string& name, const std::string& bytes) {
    write_atomic(cfg.out_dir / name, bytes);
    manifest.outputs.push_back({name, sha256_hex(bytes)});
  }

  template <class F>
  void timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      f();
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("stage '{}' failed: {}", stage, e.what()));
    }
    const auto t1 = std::chrono::steady_clock::now();
    manifest.wall_seconds.emplace_back(stage, std::chrono::duration<double>(t1 - t0).count());
  }
};

void ensure_model(Context& c) {
  if (c.model) return;
  c.timed("model", [&] {
    c.model = std::make_unique<PacketModel>(c.cfg.barrier, c.cfg.packet, c.cfg.quadrature());
    c.asym = asymptotics(*c.model);
  });
  const Asymptotics& a = *c.asym;
  c.report.put("asymptotics.r", a.r_prob);
  c.report.put("asymptotics.t", a.t_prob);
  c.report.put("asymptotics.k_r", a.k_r_defined() ? num(a.k_r) : "undefined");
  c.report.put("asymptotics.k_t", a.k_t_defined() ? num(a.k_t) : "undefined");
  c.check(check_below("asymptotics.r_plus_t_minus_1", std::abs(a.r_prob + a.t_prob - 1.0), 1e-10));
  if (c.reference) {
    c.check(check_within("asymptotics.r", a.r_prob, ref::kR, ref::kProbTol));
    c.check(check_within("asymptotics.t", a.t_prob, ref::kT, ref::kProbTol));
    c.check(check_within("asymptotics.k_r", a.k_r, ref::kKr, ref::kMomentumTol));
    c.check(check_within("asymptotics.k_t", a.k_t, ref::kKt, ref::kMomentumTol));
  }
}

void stage_snapshot(Context& c) {
  ensure_model(c);
  c.timed("snapshot", [&] {
    const double lo = c.cfg.packet.x0 - 15.0;
    const double hi = -lo;
    const double dx = 0.02;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / dx)) + 1;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo + dx * static_cast<double>(i);
    std::string csv = "t,x,re_psi,im_psi,abs2_psi\n";
    for (double t : kSnapshotTimes) {
      const auto psi = c.model->snapshot(x, t);
      for (std::size_t i = 0; i < n; ++i) {
        csv += fmt::format("{},{},{},{},{}\n", num(t), num(x[i]), sci(psi[i].real()),
                           sci(psi[i].imag()), sci(std::norm(psi[i])));
      }
    }
    c.emit("snapshot.csv", csv);
  });
}

void ensure_trace(Context& c, bool write_csv) {
  ensure_model(c);
  if (c.trace) return;
  c.timed("trace", [&] {
    TraceOptions o;
    o.time_grid = c.cfg.time_grid;
    o.spectral_after = c.cfg.spectral_after;
    o.workers = c.workers;
    c.trace = build_trace(*c.model, o);
  });
  const ProbabilityTrace& tr = *c.trace;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (double p : {tr.p1[i], tr.p2[i], tr.p3[i]}) {
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  }
  c.report.put("trace.samples", fmt::format("{}", tr.size()));
  c.report.put("trace.max_conservation_error", tr.max_conservation_error);
  c.check(check_below("trace.conservation", tr.max_conservation_error, kConservationTolerance));
  c.check(check_above("trace.min_probability", lo, -1e-6));
  c.check(check_below("trace.max_probability", hi, 1.0 + 1e-6));
  c.check(check_below("trace.p3_final_minus_t", std::abs(tr.p3.back() - c.asym->t_prob), 0.01));

  c.timed("p2_cross_check", [&] {
    std::vector<double> ts(20);
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = 50.0 * static_cast<double>(i) / 19.0;
    const auto spatial = RegionIntegrator(*c.model).barrier_probability(ts, c.workers);
    const auto spectral = SpectralP2(*c.model).at(ts, c.workers);
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(spatial[i] - spectral[i]));
    c.report.put("trace.p2_spectral_vs_spatial", worst);
    c.check(check_below("trace.p2_spectral_vs_spatial", worst, 1e-4));
  });

  if (!write_csv) return;
  std::string csv = "t,p1,p2,p3,total,p2_method\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    csv += fmt::format("{},{},{},{},{},{}\n", num(tr.times[i]), sci(tr.p1[i]), sci(tr.p2[i]),
                       sci(tr.p3[i]), sci(tr.p1[i] + tr.p2[i] + tr.p3[i]), to_string(tr.method[i]));
  }
  c.emit("trace.csv", csv);
}

void stage_stationary(Context& c) {
  ensure_model(c);
  c.timed("stationary", [&] {
    struct Row {
      std::string label;
      double k;
    };
    std::vector<Row> rows = {{"k_av", c.cfg.packet.k_av}};
    if (c.asym->k_r_defined()) rows.push_back({"k_r", c.asym->k_r});
    if (c.asym->k_t_defined()) rows.push_back({"k_t", c.asym->k_t});
    if (c.reference) {
      rows.push_back({"k_r_reference", ref::kMomenta[1]});
      rows.push_back({"k_t_reference", ref::kMomenta[2]});
    }
    std::string csv = "label,k,tau_phase,tau_b_dwell,tau_b_trans,tau_b_refl\n";
    for (const auto& r : rows) {
      const auto s = buttiker_times(c.cfg.barrier, r.k);
      const double ph = phase_time(c.cfg.barrier, r.k);
      csv += fmt::format("{},{},{},{},{},{}\n", r.label, num(r.k), num(ph), num(s.tau_b_dwell),
                         num(s.tau_b_trans), num(s.tau_b_refl));
    }
    c.emit("stationary.csv", csv);

    if (!c.reference) return;
    const char* labels[] = {"k_av", "k_r", "k_t"};
    for (int j = 0; j < 3; ++j) {
      const double k = ref::kMomenta[j];
      const auto s = buttiker_times(c.cfg.barrier, k);
      const std::string at = labels[j];
      c.check(check_within("stationary.tau_phase." + at, phase_time(c.cfg.barrier, k), ref::kPhase[j], ref::kTol[j]));
      c.check(check_within("stationary.tau_b_dwell." + at, s.tau_b_dwell, ref::kDwell[j], ref::kTol[j]));
      if (!std::isnan(ref::kTrans[j])) {
        c.check(check_within("stationary.tau_b_trans." + at, s.tau_b_trans, ref::kTrans[j], ref::kTol[j]));
      }
      if (!std::isnan(ref::kRefl[j])) {
        c.check(check_within("stationary.tau_b_refl." + at, s.tau_b_refl, ref::kRefl[j], ref::kTol[j]));
      }
    }
  });
}

void stage_times(Context& c) {
  ensure_trace(c, false);
  c.timed("times", [&] {
    TimesOptions o;
    o.epsilon = c.cfg.epsilon;
    o.window = c.cfg.fit_window;
    const TimesReport r = characteristic_times(*c.trace, *c.asym, o);
    c.report.put("times.epsilon", r.epsilon);
    c.report.put("times.t_epsilon", r.t_epsilon);
    c.report.put("times.tau_d", r.tau_d);
    c.report.put("times.tau_t", r.tau_t);
    c.report.put("times.tau_r", r.tau_r);
    c.report.put("times.tau_r_negative_part", r.tau_r_negative);
    c.report.put("times.residual", r.residual);
    c.report.put("times.tau_d_from_t_epsilon", r.tau_d_shared);
    c.report.put("times.residual_shared_limit", r.residual_shared);
    const double bd = stationary_dwell_time(c.cfg.barrier, c.cfg.packet.k_av);
    c.report.put("times.stationary_dwell_at_k_av", bd);
    c.check(check_above("times.tau_d_over_stationary_dwell", r.tau_d / bd, 3.0));
    c.check(check_below("times.residual_shared_limit", std::abs(r.residual_shared), 1e-6));

    TimesOptions h = o;
    h.horizon = std::min(29.0, c.cfg.time_grid.t_max);
    const TimesReport hr = characteristic_times(*c.trace, *c.asym, h);
    c.report.put("times.horizon", *h.horizon);
    c.report.put("times.horizon.tau_d", hr.tau_d);
    c.report.put("times.horizon.tau_t", hr.tau_t);
    c.report.put("times.horizon.tau_r", hr.tau_r);

    if (!c.reference) return;
    c.check(check_within("times.tau_d", r.tau_d, ref::kTauD, ref::kTauDTol));
    c.check(check_within("times.tau_t", r.tau_t, ref::kTauT, ref::kGatedTol));
    c.check(check_within("times.tau_r", r.tau_r, ref::kTauR, ref::kGatedTol));
    c.check(check_below("times.residual", std::abs(r.residual), 0.05));
    c.check(check_below("times.tau_r_negative_part", std::abs(r.tau_r_negative), 0.05));
  });
}

void stage_poles(Context& c) {
  c.timed("poles", [&] {
    const BarrierConfig& b = c.cfg.barrier;
    c.zeros = find_zeros(b, c.cfg.region);
    const ZeroCount count = count_zeros(b, c.cfg.region);
    std::vector<cplx> momenta;
    std::string csv = "re_z,im_z,re_k,im_k,u_residual,opaque_residual,tau\n";
    for (cplx z : c.zeros) {
      const cplx k = b.k0() * z;
      momenta.push_back(k);
      const double xy = k.real() * k.imag();
      csv += fmt::format("{},{},{},{},{},{},{}\n", num(z.real()), sci(z.imag()), num(k.real()),
                         sci(k.imag()), sci(std::abs(u_of_z(b, z)) / u_scale(b, z)),
                         sci(opaque_relation_residual(b, z)), num(b.m / (2.0 * std::abs(xy))));
    }
    c.emit("poles.csv", csv);
    PoleResult p = depletion_from_poles(momenta, b.m);
    p.zero_count = count.count;
    p.region = c.cfg.region;
    c.pole = p;
    c.report.put("poles.distinct_zeros", fmt::format("{}", c.zeros.size()));
    c.report.put("poles.contour_count", fmt::format("{}", count.count));
    c.report.put("poles.contour_residual", count.residual);
    c.report.put("poles.x", p.zero.real());
    c.report.put("poles.y", p.zero.imag());
    c.report.put("poles.tau", p.tau_from_pole);
    c.check(check_within("poles.count_matches_newton", static_cast<double>(count.count),
                         static_cast<double>(c.zeros.size()), 0.0));
    double worst = 0.0;
    for (cplx z : c.zeros) worst = std::max(worst, opaque_relation_residual(b, z));
    c.check(check_below("poles.opaque_residual", worst, 1e-8));
    if (!c.reference) return;
    c.check(check_within("poles.x", p.zero.real(), ref::kPoleX, ref::kPoleXTol));
    c.check(check_within("poles.y", p.zero.imag(), ref::kPoleY, ref::kPoleYTol));
    c.check(check_within("poles.tau", p.tau_from_pole, ref::kPoleTau, ref::kPoleTauTol));
  });
}

void stage_fit(Context& c) {
  ensure_trace(c, false);
  if (!c.pole) stage_poles(c);
  c.timed("fit", [&] {
    const auto& tr = *c.trace;
    struct Series {
      std::string name;
      std::vector<double> values;
    };
    std::vector<Series> series = {{"p2", tr.p2}};
    if (c.asym->r_prob > 0.0) series.push_back({"unreflected", unreflected_fraction(tr, *c.asym)});
    if (c.asym->t_prob > 0.0) series.push_back({"untransmitted", untransmitted_fraction(tr, *c.asym)});
    std::string csv = "series,amplitude,tau_dep,correlation,t_lo,t_hi,samples\n";
    std::vector<FitResult> fits;
    for (const auto& s : series) {
      const FitResult f = fit_exponential_tail(tr.times, s.values, c.cfg.fit_window);
      fits.push_back(f);
      csv += fmt::format("{},{},{},{},{},{},{}\n", s.name, sci(f.amplitude), num(f.tau_dep),
                         num(f.correlation), num(f.window.t_lo), num(f.window.t_hi), f.samples);
      c.report.put("fit." + s.name + ".tau_dep", f.tau_dep);
      c.report.put("fit." + s.name + ".correlation", f.correlation);
    }
    c.emit("fits.csv", csv);
    const double tau2 = fits.front().tau_dep;
    for (std::size_t i = 1; i < fits.size(); ++i) {
      c.check(check_within("fit." + series[i].name + ".tau_dep_vs_p2", fits[i].tau_dep, tau2, 0.2));
    }
    const double rel = std::abs(tau2 - c.pole->tau_from_pole) / c.pole->tau_from_pole;
    c.report.put("fit.p2_vs_pole_relative", rel);
    c.check(check_below("fit.p2_vs_pole_relative", rel, 0.015));
    if (!c.reference) return;
    c.check(check_within("fit.p2.tau_dep", tau2, ref::kTauDep, ref::kTauDepTol));
    c.check(check_below("fit.p2.correlation", fits.front().correlation, -0.9999));
  });
}


}  // namespace

std::string Check::band() const {
  switch (kind) {
    case Kind::within: return fmt::format("{}+-{}", num(expected), num(tolerance));
    case Kind::below: return fmt::format("<{}", num(tolerance));
    case Kind::above: return fmt::format(">{}", num(tolerance));
  }
  return {};
}

Check check_within(std::string name, double value, double expected, double tolerance) {
  Check c{std::move(name), value, expected, tolerance, Check::Kind::within, false};
  c.pass = std::abs(value - expected) <= tolerance;
  return c;
}

Check check_below(std::string name, double value, double bound) {
  Check c{std::move(name), value, bound, bound, Check::Kind::below, false};
  c.pass = value < bound;
  return c;
}

Check check_above(std::string name, double value, double bound) {
  Check c{std::move(name), value, bound, bound, Check::Kind::above, false};
  c.pass = value > bound;
  return c;
}

bool RunManifest::all_passed() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::snapshot, Stage::trace, Stage::times, Stage::stationary, Stage::poles,
                  Stage::fit, Stage::all}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument(fmt::format("unknown stage '{}'", name));
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::snapshot: return "snapshot";
    case Stage::trace: return "trace";
    case Stage::times: return "times";
    case Stage::stationary: return "stationary";
    case Stage::poles: return "poles";
    case Stage::fit: return "fit";
    case Stage::all: return "all";
  }
  return "unknown";
}

const char* version() { return TUNNELTIME_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("short write to '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

RunManifest run(const RunConfig& cfg, Stage stage, std::size_t workers) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  Context c{cfg, workers == 0 ? 1 : workers, {}, {}, nullptr, {}, {}, {}, {}, cfg.reference_parameters()};
  c.manifest.config = config_entries(cfg);
  c.manifest.version = version();
  c.manifest.workers = c.workers;
  c.report.put("run.version", version());
  c.report.put("run.stage", to_string(stage));
  c.report.put("run.reference_checks", c.reference ? "enabled" : "disabled");

  const bool everything = stage == Stage::all;
  auto want = [&](Stage s) { return everything || stage == s; };
  if (want(Stage::stationary)) stage_stationary(c);
  if (want(Stage::poles)) stage_poles(c);
  if (want(Stage::snapshot)) stage_snapshot(c);
  if (want(Stage::trace)) ensure_trace(c, true);
  if (want(Stage::times)) stage_times(c);
  if (want(Stage::fit)) stage_fit(c);
  for (Stage s : {Stage::stationary, Stage::poles, Stage::snapshot, Stage::trace, Stage::times, Stage::fit}) {
    if (want(s)) c.manifest.stages.emplace_back(to_string(s));
  }

  c.emit("report.txt", c.report.text(c.manifest.checks));

  nlohmann::ordered_json j;
  j["tool"] = "tunneltime";
  j["version"] = c.manifest.version;
  j["stages"] = c.manifest.stages;
  nlohmann::ordered_json conf;
  for (const auto& [k, v] : c.manifest.config) conf[k] = v;
  j["config"] = conf;
  nlohmann::ordered_json outs;
  for (const auto& o : c.manifest.outputs) outs[o.name] = o.sha256;
  j["sha256"] = outs;
  nlohmann::ordered_json wall;
  for (const auto& [s, sec] : c.manifest.wall_seconds) wall[s] = sec;
  j["wall_seconds"] = wall;
  j["workers"] = c.manifest.workers;
  j["checks_passed"] = c.manifest.all_passed();
  write_atomic(cfg.out_dir / "manifest.json", j.dump(2) + "\n");
  return c.manifest;
}

RunManifest run_all(const RunConfig& cfg, std::size_t workers) { return run(cfg, Stage::all, workers); }

}  // namespace tunneltime
