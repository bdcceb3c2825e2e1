#include "tunneltime/barrier.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tunneltime/quadrature.hpp"

namespace tunneltime {

namespace {

constexpr cplx I{0.0, 1.0};

// Re kappa >= 0 below the top, Im kappa >= 0 above; a signed zero imaginary
// part would otherwise flip the branch on the real axis.
cplx principal_kappa(cplx kappa2) {
  if (kappa2.imag() == 0.0) kappa2.imag(0.0);
  return std::sqrt(kappa2);
}

// Sum of X^n / (2n+1)! and its derivative in X. Used for |X| < 1.
cplx sinhc_series(cplx X) {
  cplx term{1.0, 0.0};
  cplx sum = term;
  for (int n = 1; n < 12; ++n) {
    term *= X / static_cast<double>((2 * n) * (2 * n + 1));
    sum += term;
  }
  return sum;
}

cplx sinhc_series_derivative(cplx X) {
  // d/dX sum X^n/(2n+1)! = sum n X^(n-1)/(2n+1)!
  cplx pw{1.0, 0.0};
  double fact = 6.0;  // 3!
  cplx sum{0.0, 0.0};
  for (int n = 1; n < 14; ++n) {
    sum += static_cast<double>(n) * pw / fact;
    pw *= X;
    fact *= static_cast<double>((2 * n + 2) * (2 * n + 3));
  }
  return sum;
}

struct ReducedTerms {
  cplx kappa2;
  cplx s;  // sinh(2 kappa d)/kappa
  cplx c;  // cosh(2 kappa d)
  cplx u_red;
};

ReducedTerms reduced_terms(double d, cplx k, cplx kappa2, cplx kappa) {
  const EvenPair p = even_pair(kappa, 2.0 * d);
  ReducedTerms r;
  r.kappa2 = kappa2;
  r.s = p.sh;
  r.c = p.ch;
  r.u_red = (kappa2 - k * k) * p.sh - 2.0 * I * k * p.ch;
  return r;
}

}  // namespace

double BarrierConfig::k0() const { return std::sqrt(k0_squared()); }

void BarrierConfig::validate() const {
  if (!(std::isfinite(v0) && v0 >= 0.0)) {
    throw std::invalid_argument("v0 must be finite and >= 0 (got " + std::to_string(v0) + ")");
  }
  if (!(std::isfinite(d) && d > 0.0)) {
    throw std::invalid_argument("d must be finite and > 0 (got " + std::to_string(d) + ")");
  }
  if (!(std::isfinite(m) && m > 0.0)) {
    throw std::invalid_argument("m must be finite and > 0 (got " + std::to_string(m) + ")");
  }
}

EvenPair even_pair(cplx kappa, double length) {
  const cplx z = kappa * length;
  if (std::abs(z) < 1.0) {
    const cplx X = z * z;
    // cosh z = sum X^n/(2n)!
    cplx term{1.0, 0.0};
    cplx ch = term;
    for (int n = 1; n < 12; ++n) {
      term *= X / static_cast<double>((2 * n - 1) * (2 * n));
      ch += term;
    }
    return {ch, length * sinhc_series(X)};
  }
  return {std::cosh(z), std::sinh(z) / kappa};
}

cplx kappa_squared(const BarrierConfig& cfg, cplx k) { return cfg.k0_squared() - k * k; }

namespace detail {

Amplitudes amplitudes_with_kappa(const BarrierConfig& cfg, double k, cplx kappa) {
  const cplx kc{k, 0.0};
  const cplx kappa2 = kappa_squared(cfg, kc);
  const ReducedTerms r = reduced_terms(cfg.d, kc, kappa2, kappa);
  const cplx phase = std::exp(-2.0 * I * k * cfg.d);
  Amplitudes a;
  a.u_reduced = r.u_red;
  a.u_val = kappa * r.u_red;
  a.a_refl = -(kappa2 + k * k) * r.s * phase / r.u_red;
  a.d_trans = -2.0 * I * k * phase / r.u_red;
  return a;
}

}  // namespace detail

ScatteringSet scattering_set(const BarrierConfig& cfg, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("scattering_set: momentum must be > 0");
  const cplx kappa2 = kappa_squared(cfg, cplx{k, 0.0});
  const cplx kappa = principal_kappa(kappa2);
  const detail::Amplitudes amp = detail::amplitudes_with_kappa(cfg, k, kappa);

  ScatteringSet s;
  s.k = k;
  s.a_refl = amp.a_refl;
  s.d_trans = amp.d_trans;
  s.u_val = amp.u_val;
  const cplx pre = -I * k * std::exp(-I * k * cfg.d) / amp.u_val;
  s.b_grow = pre * (kappa + I * k) * std::exp(-kappa * cfg.d);
  s.c_decay = pre * (kappa - I * k) * std::exp(kappa * cfg.d);
  return s;
}

InteriorCoeffs interior_coeffs(const BarrierConfig& cfg, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("interior_coeffs: momentum must be > 0");
  const cplx kc{k, 0.0};
  const cplx kappa2 = kappa_squared(cfg, kc);
  const cplx kappa = principal_kappa(kappa2);
  const ReducedTerms r = reduced_terms(cfg.d, kc, kappa2, kappa);
  const EvenPair half = even_pair(kappa, cfg.d);
  const cplx pre = -I * k * std::exp(-I * k * cfg.d) / r.u_red;
  InteriorCoeffs c;
  c.kappa = kappa;
  c.even = 2.0 * pre * (half.ch - I * k * half.sh);
  c.odd = 2.0 * pre * (-kappa2 * half.sh + I * k * half.ch);
  return c;
}

cplx stationary_state(const BarrierConfig& cfg, double k, double x) {
  if (x < -cfg.d) {
    const ScatteringSet s = scattering_set(cfg, k);
    return std::exp(I * k * x) + s.a_refl * std::exp(-I * k * x);
  }
  if (x > cfg.d) {
    const ScatteringSet s = scattering_set(cfg, k);
    return s.d_trans * std::exp(I * k * x);
  }
  const InteriorCoeffs c = interior_coeffs(cfg, k);
  const EvenPair p = even_pair(c.kappa, x);
  return c.even * p.ch + c.odd * p.sh;
}

cplx stationary_state_derivative(const BarrierConfig& cfg, double k, double x) {
  if (x < -cfg.d) {
    const ScatteringSet s = scattering_set(cfg, k);
    return I * k * (std::exp(I * k * x) - s.a_refl * std::exp(-I * k * x));
  }
  if (x > cfg.d) {
    const ScatteringSet s = scattering_set(cfg, k);
    return I * k * s.d_trans * std::exp(I * k * x);
  }
  const InteriorCoeffs c = interior_coeffs(cfg, k);
  const EvenPair p = even_pair(c.kappa, x);
  return c.even * c.kappa * c.kappa * p.sh + c.odd * p.ch;
}

cplx u_of_z(const BarrierConfig& cfg, cplx z) {
  const cplx k = cfg.k0() * z;
  const cplx kappa2 = kappa_squared(cfg, k);
  return reduced_terms(cfg.d, k, kappa2, principal_kappa(kappa2)).u_red;
}

cplx u_of_z_derivative(const BarrierConfig& cfg, cplx z) {
  const double d = cfg.d;
  const cplx k = cfg.k0() * z;
  const cplx kappa2 = kappa_squared(cfg, k);
  const ReducedTerms r = reduced_terms(d, k, kappa2, principal_kappa(kappa2));
  // s(w) = 2d S(4 d^2 w) with S(X) = sinh(sqrt X)/sqrt X, c(w) = cosh(2 d sqrt w).
  const cplx X = 4.0 * d * d * kappa2;
  cplx ds;
  if (std::abs(X) < 1.0) {
    ds = 8.0 * d * d * d * sinhc_series_derivative(X);
  } else {
    ds = (2.0 * d * r.c - r.s) / (2.0 * kappa2);
  }
  const cplx dc = d * r.s;
  const cplx du_dk = -4.0 * k * r.s - 2.0 * k * (kappa2 - k * k) * ds - 2.0 * I * r.c +
                     4.0 * I * k * k * dc;
  return cfg.k0() * du_dk;
}

double u_scale(const BarrierConfig& cfg, cplx z) {
  const cplx k = cfg.k0() * z;
  const cplx kappa2 = kappa_squared(cfg, k);
  const ReducedTerms r = reduced_terms(cfg.d, k, kappa2, principal_kappa(kappa2));
  return std::abs((kappa2 - k * k) * r.s) + std::abs(2.0 * k * r.c);
}

namespace {

cplx shc(cplx z, double d) { return even_pair(z, d).sh; }

// int_{-d}^{d} sinh(a x)/a * sinh(b x)/b dx by Gauss-Legendre on [0, d] (even integrand).
cplx iss_gauss(cplx a, cplx b, double d) {
  static const quad::GaussRule rule = quad::gauss_legendre(48);
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = 0.5 * d * (rule.nodes[i] + 1.0);
    sum += rule.weights[i] * even_pair(a, x).sh * even_pair(b, x).sh;
  }
  return d * sum;
}

}  // namespace

cplx interior_overlap(double d, const InteriorCoeffs& f, const InteriorCoeffs& g) {
  const cplx a = f.kappa;
  const cplx b = std::conj(g.kappa);
  const cplx sp = shc(a + b, d);
  const cplx sm = shc(a - b, d);
  const cplx icc = sp + sm;
  cplx iss;
  const double na = std::abs(a);
  const double nb = std::abs(b);
  const cplx ab = a * b;
  if (std::max(na, nb) * d < 0.5 || std::abs(ab) < 1e-2 * (na * na + nb * nb)) {
    iss = iss_gauss(a, b, d);
  } else {
    iss = (sp - sm) / ab;
  }
  return f.even * std::conj(g.even) * icc + f.odd * std::conj(g.odd) * iss;
}

}  // namespace tunneltime
