#pragma once

#include <complex>

namespace tunneltime {

using cplx = std::complex<double>;

/// Rectangular barrier V(x) = v0 for |x| < d, 0 outside, in units with hbar = 1.
struct BarrierConfig {
  double v0 = 50.0;
  double d = 2.0;
  double m = 1.0;

  /// Momentum of a particle whose energy equals the barrier top, k0 = sqrt(2 m v0).
  double k0() const;
  double k0_squared() const { return 2.0 * m * v0; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// cosh(kappa L) and sinh(kappa L)/kappa as functions of kappa^2.
///
/// Both are entire in kappa^2, so the pair is independent of the sign chosen
/// for kappa and finite at kappa = 0.
struct EvenPair {
  cplx ch;
  cplx sh;
};
EvenPair even_pair(cplx kappa, double length);

/// Stationary amplitudes at real momentum k.
///
/// Outside the barrier psi_k = e^{ikx} + A e^{-ikx} (x < -d) and D e^{ikx}
/// (x > d); inside psi_k = B e^{kappa x} + C e^{-kappa x}. B and C are stored
/// on the branch Re kappa >= 0 (below the top) / Im kappa >= 0 (above); they
/// diverge individually at k = k0 where only the even/odd combination
/// (InteriorCoeffs) stays finite.
struct ScatteringSet {
  double k = 0.0;
  cplx a_refl;
  cplx b_grow;
  cplx c_decay;
  cplx d_trans;
  cplx u_val;
};

/// psi_k(x) inside the barrier written as even * cosh(kappa x) + odd * sinh(kappa x)/kappa.
struct InteriorCoeffs {
  cplx kappa;
  cplx even;
  cplx odd;
};

cplx kappa_squared(const BarrierConfig& cfg, cplx k);

ScatteringSet scattering_set(const BarrierConfig& cfg, double k);
InteriorCoeffs interior_coeffs(const BarrierConfig& cfg, double k);

/// Stationary solution psi_k(x) of the barrier Hamiltonian, with unit incident amplitude.
cplx stationary_state(const BarrierConfig& cfg, double k, double x);
/// d psi_k / dx, piecewise.
cplx stationary_state_derivative(const BarrierConfig& cfg, double k, double x);

/// Reduced denominator u(k)/kappa at complex momentum k = k0 * z.
///
/// u itself is odd in kappa and vanishes trivially at z = 1; the reduced form
/// is entire in kappa^2 and shares every other zero with u.
cplx u_of_z(const BarrierConfig& cfg, cplx z);
/// d/dz of u_of_z.
cplx u_of_z_derivative(const BarrierConfig& cfg, cplx z);
/// |first term| + |second term| of u_of_z, used to judge a residual as small.
double u_scale(const BarrierConfig& cfg, cplx z);

/// Integral over [-d, d] of f(x) g(x)^* for two interior solutions.
cplx interior_overlap(double d, const InteriorCoeffs& f, const InteriorCoeffs& g);

namespace detail {

/// Amplitudes evaluated with an explicitly supplied kappa, for branch tests.
struct Amplitudes {
  cplx a_refl;
  cplx d_trans;
  cplx u_reduced;
  cplx u_val;
};
Amplitudes amplitudes_with_kappa(const BarrierConfig& cfg, double k, cplx kappa);

}  // namespace detail

}  // namespace tunneltime
