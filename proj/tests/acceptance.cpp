// Acceptance gate: one line per criterion, exit status 1 if any is red.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "tunneltime/depletion.hpp"
#include "tunneltime/parallel.hpp"
#include "tunneltime/probabilities.hpp"
#include "tunneltime/stationary_times.hpp"
#include "tunneltime/times.hpp"

using namespace tunneltime;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void expect(bool ok, std::string what) {
    pass = pass && ok;
    details.push_back(fmt::format("{}{}", ok ? "" : "!", what));
  }
  void within(const std::string& name, double value, double expected, double tol) {
    expect(std::abs(value - expected) <= tol, fmt::format("{}={:.6g} ({:.6g}+-{:g})", name, value, expected, tol));
  }
  void below(const std::string& name, double value, double bound) {
    expect(value < bound, fmt::format("{}={:.3g} (<{:g})", name, value, bound));
  }
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  std::string line = fmt::format("[{}] {:2d} {}:", o.pass ? "PASS" : "FAIL", id, title);
  for (const auto& d : o.details) line += " " + d;
  std::puts(line.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void info(const std::string& text) {
  std::puts(("       " + text).c_str());
  std::fflush(stdout);
}

const BarrierConfig kBarrier{};
const PacketConfig kPacket{};

Outcome unitarity() {
  Outcome o;
  const double k0 = kBarrier.k0();
  std::mt19937_64 rng(1234567);
  std::uniform_real_distribution<double> wide(0.01, 3.0 * k0);
  std::uniform_real_distribution<double> near(-1e-3, 1e-3);
  std::vector<double> ks = {k0, std::nextafter(k0, 0.0), std::nextafter(k0, 2.0 * k0)};
  while (ks.size() < 900) ks.push_back(wide(rng));
  while (ks.size() < 1000) ks.push_back(k0 * (1.0 + near(rng)));
  double worst = 0.0;
  for (double k : ks) {
    const ScatteringSet s = scattering_set(kBarrier, k);
    worst = std::max(worst, std::abs(std::norm(s.a_refl) + std::norm(s.d_trans) - 1.0));
  }
  o.below(fmt::format("max||A|^2+|D|^2-1| over {} momenta", ks.size()), worst, 1e-12);
  return o;
}

Outcome table() {
  Outcome o;
  const double ks[] = {9.9, 9.696, 10.327};
  const double phase[] = {0.143, 0.0843, 1.011};
  const double dwell[] = {0.140, 0.079, 1.008};
  const double trans[] = {2.357, NAN, 1.248};
  const double refl[] = {0.140, 0.079, NAN};
  const double tol[] = {0.005, 0.005, 0.01};
  for (int j = 0; j < 3; ++j) {
    const auto s = buttiker_times(kBarrier, ks[j]);
    const std::string at = fmt::format("@{}", ks[j]);
    o.within("ph" + at, phase_time(kBarrier, ks[j]), phase[j], tol[j]);
    o.within("BD" + at, s.tau_b_dwell, dwell[j], tol[j]);
    if (!std::isnan(trans[j])) o.within("BT" + at, s.tau_b_trans, trans[j], tol[j]);
    if (!std::isnan(refl[j])) o.within("BR" + at, s.tau_b_refl, refl[j], tol[j]);
  }
  return o;
}

Outcome asymptotic(const Asymptotics& a) {
  Outcome o;
  o.within("T", a.t_prob, 0.14, 0.01);
  o.within("R", a.r_prob, 0.86, 0.01);
  o.within("k_R", a.k_r, 9.696, 0.005);
  o.within("k_T", a.k_t, 10.327, 0.005);
  return o;
}

Outcome free_particle() {
  Outcome o;
  BarrierConfig free = kBarrier;
  free.v0 = 0.0;
  const PacketModel model(free, kPacket, QuadratureSpec::around(kPacket));
  double worst = 0.0;
  for (double t : {0.0, 1.0, 2.7, 10.0, 50.0}) {
    const double c = kPacket.x0 + kPacket.k_av * t;
    const double w = oracle::free_width(kPacket.delta, free.m, t);
    std::vector<double> x;
    for (double s = -6.0; s <= 6.0; s += 0.05) x.push_back(c + s * w);
    const auto psi = model.snapshot(x, t);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const cplx ref = oracle::free_packet(kPacket.k_av, kPacket.delta, kPacket.x0, free.m, x[i], t);
      worst = std::max(worst, std::abs(psi[i] - ref));
    }
  }
  o.below("max|psi-psi_free|", worst, 1e-6);
  const Asymptotics a = asymptotics(model);
  o.below("|T-1|", std::abs(a.t_prob - 1.0), 1e-12);
  o.below("R", a.r_prob, 1e-12);
  return o;
}

Outcome poles(PoleResult& pole) {
  Outcome o;
  const auto zeros = find_zeros(kBarrier);
  const ZeroCount count = count_zeros(kBarrier);
  o.expect(count.count == static_cast<long>(zeros.size()),
           fmt::format("contour={} newton={} (equal)", count.count, zeros.size()));
  std::vector<cplx> momenta;
  for (cplx z : zeros) momenta.push_back(kBarrier.k0() * z);
  pole = depletion_from_poles(momenta, kBarrier.m);
  return o;
}

}  // namespace

int main() {
  const std::size_t workers = worker_count();
  std::printf("acceptance: workers=%zu\n", workers);

  report(1, "unitarity", unitarity());
  report(2, "stationary table", table());

  const PacketModel model(kBarrier, kPacket, QuadratureSpec::around(kPacket));
  const Asymptotics asym = asymptotics(model);
  report(3, "asymptotics", asymptotic(asym));

  // Trace, conservation and the spectral cross-check.
  std::optional<ProbabilityTrace> trace;
  Outcome conservation;
  try {
    TraceOptions opt;
    opt.workers = workers;
    trace = build_trace(model, opt);
    conservation.below("max|P1+P2+P3-1|", trace->max_conservation_error, 1e-5);
  } catch (const ConservationError& e) {
    conservation.expect(false, fmt::format("conservation broken at t={} (total {})", e.time(), e.total()));
  }
  {
    std::vector<double> ts(20);
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = 100.0 * static_cast<double>(i) / 19.0;
    const auto spatial = RegionIntegrator(model).barrier_probability(ts, workers);
    const auto spectral = SpectralP2(model).at(ts, workers);
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(spatial[i] - spectral[i]));
    conservation.below("max|P2_spectral-P2_spatial| at 20 times", worst, 1e-4);
  }

  PoleResult pole;
  const Outcome count = poles(pole);

  if (trace) {
    const TimesReport r = characteristic_times(*trace, asym, {});

    Outcome headline;
    headline.within("tau_D", r.tau_d, 0.93, 0.02);
    headline.within("tau_T", r.tau_t, 3.39, 0.05);
    headline.within("tau_R", r.tau_r, 0.55, 0.05);
    report(4, "headline times", headline);
    info(fmt::format("t_eps={:.6g} at eps={}", r.t_epsilon, r.epsilon));
    TimesOptions h;
    h.horizon = 29.0;
    const TimesReport hr = characteristic_times(*trace, asym, h);
    info(fmt::format("horizon t<=29, no tails: tau_D={:.4f} tau_T={:.4f} tau_R={:.4f}", hr.tau_d, hr.tau_t,
                     hr.tau_r));
    for (double eps : {0.005, 0.02}) {
      TimesOptions g;
      g.epsilon = eps;
      const TimesReport gr = characteristic_times(*trace, asym, g);
      info(fmt::format("eps={}: t_eps={:.4f} tau_T={:.4f} tau_R={:.4f}", eps, gr.t_epsilon, gr.tau_t, gr.tau_r));
    }

    Outcome conditional;
    conditional.below("|tau_D-(T tau_T+R tau_R)|", std::abs(r.residual), 0.05);
    conditional.below("shared lower limit", std::abs(r.residual_shared), 1e-6);
    report(5, "conditional relation", conditional);

    Outcome dep;
    const FitResult f2 = fit_exponential_tail(trace->times, trace->p2, FitWindow{});
    const FitResult f1 = fit_exponential_tail(trace->times, unreflected_fraction(*trace, asym), FitWindow{});
    const FitResult f3 = fit_exponential_tail(trace->times, untransmitted_fraction(*trace, asym), FitWindow{});
    dep.within("tau_dep(P2)", f2.tau_dep, 16.19, 0.2);
    dep.expect(f2.correlation <= -0.9999, fmt::format("r={:.7f} (<=-0.9999)", f2.correlation));
    dep.within("tau_dep(P1)", f1.tau_dep, f2.tau_dep, 0.2);
    dep.within("tau_dep(P3)", f3.tau_dep, f2.tau_dep, 0.2);
    dep.within("x", pole.zero.real(), 10.03, 1e-3);
    dep.within("y", pole.zero.imag(), -3.0565e-3, 1e-6);
    dep.within("m/2|xy|", pole.tau_from_pole, 16.31, 0.01);
    dep.below("|fit-pole|/pole", std::abs(f2.tau_dep - pole.tau_from_pole) / pole.tau_from_pole, 0.015);
    report(6, "depletion", dep);
    const FitResult late = fit_exponential_tail(trace->times, trace->p2, FitWindow{40.0, 100.0});
    info(fmt::format("window [40,100]: tau_dep={:.4f} r={:.7f}", late.tau_dep, late.correlation));

    report(7, "conservation", conservation);
    report(8, "free particle", free_particle());

    Outcome thesis;
    const double bd = buttiker_times(kBarrier, kPacket.k_av).tau_b_dwell;
    thesis.expect(r.tau_d > 3.0 * bd, fmt::format("tau_D={:.4f} > 3*{:.4f}", r.tau_d, bd));
    report(9, "packet vs stationary dwell", thesis);
  } else {
    Outcome missing;
    missing.expect(false, "no trace");
    for (int id : {4, 5, 6}) report(id, "needs trace", missing);
    report(7, "conservation", conservation);
    report(8, "free particle", free_particle());
    report(9, "needs trace", missing);
  }
  report(10, "zero count", count);

  std::printf("acceptance: %d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
