#pragma once

#include <optional>

#include "tunneltime/depletion.hpp"
#include "tunneltime/probabilities.hpp"

namespace tunneltime {

/// Exponential remainder beyond the last trace sample. nullopt adds nothing.
using Tail = std::optional<FitResult>;

/// int_{t_lower}^{t_max} P2 dt (trapezoid on the trace grid) plus the tail remainder.
/// Throws std::runtime_error if the remainder exceeds 1% of the finite part.
double dwell_time(const ProbabilityTrace& trace, const Tail& tail, double t_lower = 0.0);

/// Time at which int_0^t P2 reaches eps. P2 is linear between samples; the
/// crossing inside the bracketing interval is found by bisection.
double t_epsilon(const ProbabilityTrace& trace, double eps);

double transmission_time(const ProbabilityTrace& trace, const Asymptotics& asym, double eps,
                         const Tail& tail);
double reflection_time(const ProbabilityTrace& trace, const Asymptotics& asym, double eps,
                       const Tail& tail);

/// Same integrands with an explicit lower limit instead of t_eps.
double transmission_time_from(const ProbabilityTrace& trace, const Asymptotics& asym,
                              double t_lower, const Tail& tail);
double reflection_time_from(const ProbabilityTrace& trace, const Asymptotics& asym,
                            double t_lower, const Tail& tail);

/// 1 - P3/T and 1 - P1/R sampled on the trace grid.
std::vector<double> untransmitted_fraction(const ProbabilityTrace& trace, const Asymptotics& asym);
std::vector<double> unreflected_fraction(const ProbabilityTrace& trace, const Asymptotics& asym);

struct TimesOptions {
  double epsilon = 0.01;
  FitWindow window;
  /// Fit and add exponential tails; off when the trace is already fully decayed.
  bool tails = true;
  /// Integrate only up to this time and drop the tails.
  std::optional<double> horizon;
};

struct TimesReport {
  double tau_d = 0.0;
  double tau_t = 0.0;
  double tau_r = 0.0;
  double epsilon = 0.0;
  double t_epsilon = 0.0;
  double r_prob = 0.0;
  double t_prob = 0.0;
  double residual = 0.0;  // tau_d - (T tau_t + R tau_r)
  /// Part of tau_r coming from stretches where 1 - P1/R < 0.
  double tau_r_negative = 0.0;
  /// Variant with every integral starting at t_eps.
  double tau_d_shared = 0.0;
  double residual_shared = 0.0;
  Tail tail_p2;
  Tail tail_trans;
  Tail tail_refl;
};

/// Needs T > 0 and R > 0.
TimesReport characteristic_times(const ProbabilityTrace& trace, const Asymptotics& asym,
                                 const TimesOptions& options = {});

double conditional_check(const TimesReport& report);

}  // namespace tunneltime
