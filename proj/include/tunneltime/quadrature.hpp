#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tunneltime::quad {

/// Composite Simpson over uniformly spaced samples; needs an odd sample count.
double simpson(std::span<const double> f, double h);

/// Composite Simpson weights for n (odd) uniformly spaced samples.
std::vector<double> simpson_weights(std::size_t n, double h);

/// Trapezoid weights for n uniformly spaced samples.
std::vector<double> trapezoid_weights(std::size_t n, double h);

/// Trapezoid over arbitrary (sorted) abscissae.
double trapezoid(std::span<const double> x, std::span<const double> f);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre on [-1, 1].
GaussRule gauss_legendre(std::size_t n);

}  // namespace tunneltime::quad
