#include "tunneltime/stationary_times.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tunneltime {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kRelStep = 1e-5;
constexpr double kAgreement = 1e-6;
constexpr int kMaxHalvings = 6;

double abs_floor_rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Central difference at step h and h/2, halving until the two agree, then one
// Richardson step. `stencil(h)` must return the central difference at h.
template <class Stencil>
cplx refined_derivative(Stencil stencil, double h, const char* what) {
  cplx coarse = stencil(h);
  for (int i = 0; i <= kMaxHalvings; ++i) {
    const cplx fine = stencil(0.5 * h);
    if (abs_floor_rel(coarse, fine) <= kAgreement || std::abs(fine - coarse) < 1e-13) {
      return (4.0 * fine - coarse) / 3.0;
    }
    h *= 0.5;
    coarse = fine;
  }
  throw std::runtime_error(std::string(what) + ": finite-difference estimates did not settle");
}

cplx transmitted(const BarrierConfig& cfg, double k) {
  return detail::amplitudes_with_kappa(cfg, k, std::sqrt(cplx{cfg.k0_squared() - k * k, 0.0}))
             .d_trans *
         std::exp(2.0 * I * k * cfg.d);
}

cplx reflected(const BarrierConfig& cfg, double k) {
  return detail::amplitudes_with_kappa(cfg, k, std::sqrt(cplx{cfg.k0_squared() - k * k, 0.0}))
             .a_refl *
         std::exp(2.0 * I * k * cfg.d);
}

BarrierConfig with_height(BarrierConfig cfg, double v0) {
  cfg.v0 = v0;
  return cfg;
}

}  // namespace

double phase_time(const BarrierConfig& cfg, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("phase_time: momentum must be > 0");
  const cplx centre = transmitted(cfg, k);
  auto stencil = [&](double h) {
    const double up = std::arg(transmitted(cfg, k + h) / centre);
    const double down = std::arg(centre / transmitted(cfg, k - h));
    if (std::abs(up) >= 0.5 * std::numbers::pi || std::abs(down) >= 0.5 * std::numbers::pi) {
      throw std::runtime_error("phase_time: phase unwrapping ambiguous, step too large");
    }
    return cplx{(up + down) / (2.0 * h), 0.0};
  };
  const double dphase_dk = refined_derivative(stencil, kRelStep * k, "phase_time").real();
  return cfg.m / k * dphase_dk;
}

double stationary_dwell_time(const BarrierConfig& cfg, double k) {
  const InteriorCoeffs c = interior_coeffs(cfg, k);
  return cfg.m / k * interior_overlap(cfg.d, c, c).real();
}

StationaryTimes buttiker_times(const BarrierConfig& cfg, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("buttiker_times: momentum must be > 0");
  const double v0 = cfg.v0;
  const double h0 = kRelStep * (v0 > 0.0 ? v0 : 1.0);
  auto log_derivative = [&](auto amplitude) {
    auto stencil = [&](double h) {
      const cplx up = amplitude(with_height(cfg, v0 + h), k);
      const cplx down = amplitude(with_height(cfg, v0 - h), k);
      return std::log(up / down) / (2.0 * h);
    };
    return refined_derivative(stencil, h0, "buttiker_times");
  };

  StationaryTimes st;
  st.k = k;
  st.g_trans = log_derivative(transmitted);
  st.g_refl = log_derivative(reflected);
  st.tau_b_trans = std::abs(st.g_trans);
  st.tau_b_refl = std::abs(st.g_refl);
  st.tau_b_dwell = stationary_dwell_time(cfg, k);
  st.tau_phase = phase_time(cfg, k);
  return st;
}

}  // namespace tunneltime
