#pragma once

#include "tunneltime/barrier.hpp"

namespace tunneltime {

/// Phase and Larmor-clock (Buttiker) times of a monochromatic state.
struct StationaryTimes {
  double k = 0.0;
  double tau_phase = 0.0;
  double tau_b_dwell = 0.0;
  double tau_b_trans = 0.0;
  double tau_b_refl = 0.0;
  /// d ln[D e^{2ikd}] / dV0 and d ln[A e^{2ikd}] / dV0
  cplx g_trans;
  cplx g_refl;
};

/// Energy derivative of arg[D(k) e^{2ikd}], by Richardson-refined central differences in k.
/// Throws std::runtime_error if the phase moves by pi/2 or more across the stencil.
double phase_time(const BarrierConfig& cfg, double k);

/// (m/k) * int_{-d}^{d} |psi_k|^2 dx, closed form.
double stationary_dwell_time(const BarrierConfig& cfg, double k);

StationaryTimes buttiker_times(const BarrierConfig& cfg, double k);

}  // namespace tunneltime
