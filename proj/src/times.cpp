#include "tunneltime/times.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tunneltime {

namespace {

constexpr double kMaxTailFraction = 0.01;

double tail_remainder(const Tail& tail, double t_end) {
  if (!tail) return 0.0;
  return tail->amplitude * tail->tau_dep * std::exp(-t_end / tail->tau_dep);
}

// Trapezoid of f over [t_lower, t_upper] on the trace grid, interpolating linearly at the ends.
double integrate_range(std::span<const double> t, std::span<const double> f, double t_lower,
                       double t_upper) {
  if (t.size() < 2) throw std::invalid_argument("trace needs at least two samples");
  if (t_lower < t.front() || t_upper > t.back() || t_lower > t_upper) {
    throw std::invalid_argument("integration limits [" + std::to_string(t_lower) + ", " +
                                std::to_string(t_upper) + "] outside the trace");
  }
  auto value_at = [&](std::size_t i, double x) {
    const double s = (x - t[i]) / (t[i + 1] - t[i]);
    return f[i] + s * (f[i + 1] - f[i]);
  };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double a = std::max(t[i], t_lower);
    const double b = std::min(t[i + 1], t_upper);
    if (b <= a) continue;
    sum += 0.5 * (b - a) * (value_at(i, a) + value_at(i, b));
  }
  return sum;
}

double with_tail(std::span<const double> t, std::span<const double> f, double t_lower,
                 const Tail& tail, const char* what) {
  const double finite = integrate_range(t, f, t_lower, t.back());
  const double rest = tail_remainder(tail, t.back());
  if (std::abs(rest) > kMaxTailFraction * std::abs(finite)) {
    throw std::runtime_error(std::string(what) + ": tail remainder " + std::to_string(rest) +
                             " exceeds 1% of the finite integral " + std::to_string(finite) +
                             "; extend t_max");
  }
  return finite + rest;
}

void require_same_length(const ProbabilityTrace& tr) {
  if (tr.p1.size() != tr.size() || tr.p2.size() != tr.size() || tr.p3.size() != tr.size()) {
    throw std::invalid_argument("trace arrays differ in length");
  }
}

}  // namespace

std::vector<double> untransmitted_fraction(const ProbabilityTrace& trace, const Asymptotics& asym) {
  if (!(asym.t_prob > 0.0)) throw std::invalid_argument("transmission time needs T > 0");
  std::vector<double> f(trace.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 - trace.p3[i] / asym.t_prob;
  return f;
}

std::vector<double> unreflected_fraction(const ProbabilityTrace& trace, const Asymptotics& asym) {
  if (!(asym.r_prob > 0.0)) throw std::invalid_argument("reflection time needs R > 0");
  std::vector<double> f(trace.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 - trace.p1[i] / asym.r_prob;
  return f;
}

double dwell_time(const ProbabilityTrace& trace, const Tail& tail, double t_lower) {
  require_same_length(trace);
  return with_tail(trace.times, trace.p2, t_lower, tail, "dwell_time");
}

double t_epsilon(const ProbabilityTrace& trace, double eps) {
  require_same_length(trace);
  const auto& t = trace.times;
  const auto& p = trace.p2;
  if (!(eps > 0.0)) throw std::invalid_argument("t_epsilon: eps must be > 0");
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    const double seg = 0.5 * h * (p[i] + p[i + 1]);
    if (cum + seg >= eps) {
      auto partial = [&](double s) { return cum + p[i] * s + 0.5 * (p[i + 1] - p[i]) * s * s / h; };
      double lo = 0.0;
      double hi = h;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t[i]); ++it) {
        const double mid = 0.5 * (lo + hi);
        (partial(mid) < eps ? lo : hi) = mid;
      }
      return t[i] + 0.5 * (lo + hi);
    }
    cum += seg;
  }
  throw std::invalid_argument("t_epsilon: eps = " + std::to_string(eps) +
                              " is not below the accumulated dwell " + std::to_string(cum));
}

double transmission_time_from(const ProbabilityTrace& trace, const Asymptotics& asym,
                              double t_lower, const Tail& tail) {
  require_same_length(trace);
  const auto f = untransmitted_fraction(trace, asym);
  return with_tail(trace.times, f, t_lower, tail, "transmission_time");
}

double reflection_time_from(const ProbabilityTrace& trace, const Asymptotics& asym,
                            double t_lower, const Tail& tail) {
  require_same_length(trace);
  const auto f = unreflected_fraction(trace, asym);
  return with_tail(trace.times, f, t_lower, tail, "reflection_time");
}

double transmission_time(const ProbabilityTrace& trace, const Asymptotics& asym, double eps,
                         const Tail& tail) {
  return transmission_time_from(trace, asym, t_epsilon(trace, eps), tail);
}

double reflection_time(const ProbabilityTrace& trace, const Asymptotics& asym, double eps,
                       const Tail& tail) {
  return reflection_time_from(trace, asym, t_epsilon(trace, eps), tail);
}

TimesReport characteristic_times(const ProbabilityTrace& trace, const Asymptotics& asym,
                                 const TimesOptions& options) {
  require_same_length(trace);
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  TimesReport r;
  r.epsilon = options.epsilon;
  r.r_prob = asym.r_prob;
  r.t_prob = asym.t_prob;

  ProbabilityTrace tr = trace;
  if (options.horizon) {
    const double h = *options.horizon;
    if (!(h > tr.times.front()) || h > tr.times.back()) {
      throw std::invalid_argument("horizon outside the trace");
    }
    // Cut at the last sample not beyond the horizon.
    const auto n = static_cast<std::size_t>(
        std::upper_bound(tr.times.begin(), tr.times.end(), h) - tr.times.begin());
    tr.times.resize(n);
    tr.p1.resize(n);
    tr.p2.resize(n);
    tr.p3.resize(n);
    tr.method.resize(n);
  }

  const auto trans = untransmitted_fraction(tr, asym);
  const auto refl = unreflected_fraction(tr, asym);
  if (options.tails && !options.horizon) {
    r.tail_p2 = fit_exponential_tail(tr.times, tr.p2, options.window);
    r.tail_trans = fit_exponential_tail(tr.times, trans, options.window);
    r.tail_refl = fit_exponential_tail(tr.times, refl, options.window);
  }

  r.t_epsilon = t_epsilon(tr, options.epsilon);
  r.tau_d = dwell_time(tr, r.tail_p2);
  r.tau_t = transmission_time_from(tr, asym, r.t_epsilon, r.tail_trans);
  r.tau_r = reflection_time_from(tr, asym, r.t_epsilon, r.tail_refl);
  r.residual = conditional_check(r);

  std::vector<double> negative(refl.size());
  std::transform(refl.begin(), refl.end(), negative.begin(),
                 [](double v) { return std::min(v, 0.0); });
  r.tau_r_negative = integrate_range(tr.times, negative, r.t_epsilon, tr.times.back());

  r.tau_d_shared = dwell_time(tr, r.tail_p2, r.t_epsilon);
  r.residual_shared = r.tau_d_shared - (r.t_prob * r.tau_t + r.r_prob * r.tau_r);
  return r;
}

double conditional_check(const TimesReport& report) {
  return report.tau_d - (report.t_prob * report.tau_t + report.r_prob * report.tau_r);
}

}  // namespace tunneltime
