#include "tunneltime/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tunneltime::quad {

double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0) {
    throw std::invalid_argument("simpson: need an odd number (>= 3) of samples");
  }
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i + 1 < n; i += 2) odd += f[i];
  for (std::size_t i = 2; i + 1 < n; i += 2) even += f[i];
  return h / 3.0 * (f.front() + f.back() + 4.0 * odd + 2.0 * even);
}

std::vector<double> simpson_weights(std::size_t n, double h) {
  if (n < 3 || n % 2 == 0) {
    throw std::invalid_argument("simpson_weights: need an odd number (>= 3) of samples");
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  w.front() = w.back() = h / 3.0;
  return w;
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
  if (n < 2) throw std::invalid_argument("trapezoid_weights: need at least two samples");
  std::vector<double> w(n, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

GaussRule gauss_legendre(std::size_t n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = g.weights[n - 1 - i] = w;
  }
  return g;
}

}  // namespace tunneltime::quad
