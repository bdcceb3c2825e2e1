#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tunneltime/barrier.hpp"

namespace tunneltime {

struct FitWindow {
  double t_lo = 30.0;
  double t_hi = 100.0;
};

/// value(t) ~ amplitude * exp(-t / tau_dep), from unweighted least squares on ln(value).
struct FitResult {
  double amplitude = 0.0;
  double tau_dep = 0.0;
  double correlation = 0.0;  // Pearson r of (t, ln value)
  FitWindow window;
  std::size_t samples = 0;

  bool accepted() const { return tau_dep > 0.0 && correlation <= -0.999; }
};

/// Needs at least 10 samples inside the window, all strictly positive.
FitResult fit_exponential_tail(std::span<const double> times, std::span<const double> values,
                               FitWindow window = {});

/// Axis-aligned rectangle in the reduced plane z = k / k0.
struct ComplexRect {
  double re_lo = 0.95;
  double re_hi = 1.05;
  double im_lo = -0.02;
  double im_hi = 0.02;

  bool contains(cplx z) const;
  void validate() const;
};

/// Uniform nx x ny grid of starting points over a rectangle.
std::vector<cplx> seed_grid(const ComplexRect& region, std::size_t nx = 21, std::size_t ny = 11);

/// Distinct zeros of u_of_z inside the region, as reduced z values sorted by real part.
/// Seeds that fail to converge within 100 Newton steps are skipped; an empty result throws.
std::vector<cplx> find_zeros(const BarrierConfig& cfg, const ComplexRect& region,
                             std::span<const cplx> seeds);
std::vector<cplx> find_zeros(const BarrierConfig& cfg, const ComplexRect& region = {});

struct ZeroCount {
  long count = 0;
  double winding = 0.0;   // raw contour integral / (2 pi i), real part
  double residual = 0.0;  // distance of the complex winding number from the nearest integer
};

/// Argument-principle count of zeros of u_of_z inside the rectangle.
/// Throws std::runtime_error if the residual exceeds 0.01 (contour too close to a zero).
ZeroCount count_zeros(const BarrierConfig& cfg, const ComplexRect& region = {});

/// Relative residual of -k0^2 s^2 = 4 z^2 with s = sinh(2 kappa d)/kappa, an identity at every zero.
double opaque_relation_residual(const BarrierConfig& cfg, cplx z);

struct PoleResult {
  cplx zero;  // momentum x + i y
  double tau_from_pole = 0.0;
  long zero_count = 0;
  ComplexRect region;
};

/// Picks the zero with x y < 0 and the smallest |x y|; tau = m / (2 |x y|).
/// zeros are momenta, not reduced values.
PoleResult depletion_from_poles(std::span<const cplx> zeros, double m);

}  // namespace tunneltime
