#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tunneltime/run.hpp"

using namespace tunneltime;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tunneltime_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> files_in(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
  return out;
}

// A fast configuration: coarse time sampling, horizon long enough for the tail rule.
RunConfig quick(const fs::path& out) {
  RunConfig c = parse_config_text(
      "dt_fine = 0.05\n"
      "dt_coarse = 0.5\n"
      "t_max = 70\n"
      "fit_lo = 30\n"
      "fit_hi = 70\n");
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("empty configuration gives the reference parameters") {
  const RunConfig c = parse_config_text("");
  CHECK(c.barrier.v0 == 50.0);
  CHECK(c.barrier.d == 2.0);
  CHECK(c.barrier.m == 1.0);
  CHECK(c.packet.k_av == 9.9);
  CHECK(c.packet.delta == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.packet.x0 == -15.0);
  CHECK(c.n_k == 4096);
  CHECK(c.epsilon == 0.01);
  CHECK(c.reference_parameters());
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config text parsing") {
  const RunConfig c = parse_config_text("# comment\n v0 = 40  # trailing\n\nrule=simpson\nn_k=2049\n");
  CHECK(c.barrier.v0 == 40.0);
  CHECK(c.rule == QuadratureRule::simpson);
  CHECK(c.n_k == 2049);
  CHECK_FALSE(c.reference_parameters());
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      RunConfig c = parse_config_text(text);
      c.validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("delta = -1").find("delta") != std::string::npos);
  CHECK(message("k_av = 2").find("k_av") != std::string::npos);
  CHECK(message("colour = 3").find("colour") != std::string::npos);
  CHECK(message("v0 = abc").find("v0") != std::string::npos);
  CHECK(message("v0 = 1\nv0 = 2").find("duplicate") != std::string::npos);
  CHECK(message("just words").find("key=value") != std::string::npos);
  CHECK(message("rule = midpoint").find("rule") != std::string::npos);
  CHECK(message("n_k = 4096\nrule = simpson").find("odd") != std::string::npos);
}

TEST_CASE("file and overrides") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  const fs::path file = dir / "run.cfg";
  std::ofstream(file) << "k_av = 9.5\nepsilon = 0.02\n";
  const RunConfig c = parse_config(file, {{"epsilon", "0.005"}, {"out_dir", "elsewhere"}});
  CHECK(c.packet.k_av == 9.5);
  CHECK(c.epsilon == 0.005);
  CHECK(c.out_dir == fs::path("elsewhere"));
  CHECK_THROWS_AS(parse_config(dir / "missing.cfg", {}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config({}, {{"delta", "-1"}}), std::invalid_argument);
}

TEST_CASE("config echo round-trips") {
  RunConfig c;
  c.barrier.v0 = 37.5;
  c.packet.delta = 1.4142135623730951;
  c.time_grid.t_max = 80.0;
  c.out_dir = "x";
  std::string text;
  for (const auto& [k, v] : config_entries(c)) text += k + "=" + v + "\n";
  const RunConfig back = parse_config_text(text);
  CHECK(config_entries(back) == config_entries(c));
}

TEST_CASE("stage names") {
  for (const char* name : {"snapshot", "trace", "times", "stationary", "poles", "fit", "all"}) {
    CHECK(std::string(to_string(parse_stage(name))) == name);
  }
  CHECK_THROWS_AS(parse_stage("plot"), std::invalid_argument);
}

TEST_CASE("checks and bands") {
  CHECK(check_within("a", 1.0, 1.01, 0.02).pass);
  CHECK_FALSE(check_within("a", 1.0, 1.05, 0.02).pass);
  CHECK(check_within("a", 1.0, 1.05, 0.02).band() == "1.05+-0.02");
  CHECK(check_below("b", 1e-7, 1e-6).pass);
  CHECK_FALSE(check_below("b", 1e-6, 1e-6).pass);
  CHECK(check_above("c", 5.0, 3.0).pass);
  CHECK(check_above("c", 5.0, 3.0).band() == ">3");
}

TEST_CASE("sha256 and atomic writes") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  write_atomic(dir / "a.txt", "first");
  write_atomic(dir / "a.txt", "second");
  CHECK(slurp(dir / "a.txt") == "second");
  CHECK(files_in(dir) == std::set<std::string>{"a.txt"});
}

TEST_CASE("stationary stage alone emits only the table") {
  RunConfig c;
  c.out_dir = scratch("stationary");
  const RunManifest m = run(c, Stage::stationary, 1);
  CHECK(files_in(c.out_dir) == std::set<std::string>{"stationary.csv", "report.txt", "manifest.json"});
  const std::string csv = slurp(c.out_dir / "stationary.csv");
  CHECK(csv.rfind("label,k,tau_phase,tau_b_dwell,tau_b_trans,tau_b_refl\n", 0) == 0);
  CHECK(csv.find("\nk_av,9.9,") != std::string::npos);
  for (const auto& check : m.checks) {
    if (check.name.rfind("stationary.", 0) == 0) CHECK_MESSAGE(check.pass, check.name);
  }
  const auto j = nlohmann::json::parse(slurp(c.out_dir / "manifest.json"));
  CHECK(j["version"] == version());
  CHECK(j["config"]["v0"] == "50");
  CHECK(j["sha256"]["stationary.csv"] == sha256_hex(csv));
  CHECK(j["wall_seconds"].contains("stationary"));
}

TEST_CASE("poles stage report") {
  RunConfig c;
  c.out_dir = scratch("poles");
  const RunManifest m = run(c, Stage::poles, 1);
  CHECK(m.all_passed());
  const std::string report = slurp(c.out_dir / "report.txt");
  CHECK(report.find("poles.contour_count=4\n") != std::string::npos);
  CHECK(report.find("check.poles.tau.band=16.31+-0.01\n") != std::string::npos);
  CHECK(report.find("summary.status=pass\n") != std::string::npos);
}

TEST_CASE("full runs are byte-identical for any worker count") {
  const RunConfig a = quick(scratch("det1"));
  const RunConfig b = quick(scratch("det3"));
  const RunManifest ma = run_all(a, 1);
  const RunManifest mb = run_all(b, 3);
  CHECK_FALSE(a.reference_parameters());
  std::map<std::string, std::string> ha;
  std::map<std::string, std::string> hb;
  for (const auto& o : ma.outputs) ha[o.name] = o.sha256;
  for (const auto& o : mb.outputs) hb[o.name] = o.sha256;
  CHECK(ha.size() == 6);
  for (const auto& [name, h] : ha) {
    CAPTURE(name);
    CHECK(h == hb[name]);
    CHECK(sha256_hex(slurp(a.out_dir / name)) == h);
  }
  for (const char* f : {"snapshot.csv", "trace.csv", "stationary.csv", "poles.csv", "fits.csv"}) {
    CHECK(slurp(a.out_dir / f) == slurp(b.out_dir / f));
  }
  const std::string trace = slurp(a.out_dir / "trace.csv");
  CHECK(trace.rfind("t,p1,p2,p3,total,p2_method\n", 0) == 0);
  // reference bands are not applied away from the reference parameters
  for (const auto& c : ma.checks) CHECK_MESSAGE(c.name != "times.tau_d", "reference check applied");
  CHECK(ma.all_passed());
}

TEST_CASE("stage failures carry the stage name") {
  RunConfig c = quick(scratch("fail"));
  c.fit_window = {68.0, 70.0};  // too few samples for a fit
  try {
    run(c, Stage::fit, 1);
    FAIL("expected a stage failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("stage 'fit'") != std::string::npos);
  }
}
