#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tunneltime/barrier.hpp"

namespace tunneltime {

/// Gaussian momentum profile of the incoming packet.
struct PacketConfig {
  double k_av = 9.9;
  double delta = 1.4142135623730951;
  double x0 = -15.0;

  /// Standard deviation of the amplitude Gaussian exp(-delta^2 (k - k_av)^2).
  double sigma_k() const;
  /// Standard deviation of |psi(x, 0)|^2.
  double spatial_width() const { return delta; }
  void validate() const;
};

enum class QuadratureRule { trapezoid, simpson };

const char* to_string(QuadratureRule rule);

/// Uniform momentum grid used to discretize the eigenstate superposition.
struct QuadratureSpec {
  double k_lo = 0.0;
  double k_hi = 0.0;
  std::size_t n_k = 4096;
  QuadratureRule rule = QuadratureRule::trapezoid;

  /// Window of +-8 sigma_k around k_av.
  static QuadratureSpec around(const PacketConfig& pk, std::size_t n_k = 4096,
                               QuadratureRule rule = QuadratureRule::trapezoid);

  double step() const;
  std::vector<double> nodes() const;
  std::vector<double> weights() const;
  void validate(const PacketConfig& pk) const;
};

/// a(k) = (2 delta^2 / 4 pi^3)^{1/4} exp(-delta^2 (k - k_av)^2) exp(-i k x0).
cplx amplitude_a(const PacketConfig& pk, double k);

/// Discretized packet: per-node momentum data shared by every evaluation path.
class PacketModel {
 public:
  PacketModel(const BarrierConfig& barrier, const PacketConfig& packet,
              const QuadratureSpec& quad);

  const BarrierConfig& barrier() const { return barrier_; }
  const PacketConfig& packet() const { return packet_; }
  const QuadratureSpec& quadrature() const { return quad_; }
  std::size_t size() const { return k_.size(); }

  std::span<const double> momenta() const { return k_; }
  /// quadrature weight times a(k) at each node
  std::span<const cplx> weighted_amplitudes() const { return wa_; }
  std::span<const ScatteringSet> scattering() const { return scat_; }
  std::span<const InteriorCoeffs> interior() const { return inner_; }

  /// w_n a(k_n) exp(-i k_n^2 t / 2m)
  std::vector<cplx> coefficients(double t) const;

  cplx psi(double x, double t) const;
  std::vector<cplx> snapshot(std::span<const double> x_grid, double t) const;

 private:
  cplx evaluate(std::span<const cplx> c, double x) const;

  BarrierConfig barrier_;
  PacketConfig packet_;
  QuadratureSpec quad_;
  std::vector<double> k_;
  std::vector<cplx> wa_;
  std::vector<ScatteringSet> scat_;
  std::vector<InteriorCoeffs> inner_;
};

cplx psi(const BarrierConfig& cfg, const PacketConfig& pk, const QuadratureSpec& q, double x,
         double t);

std::vector<cplx> snapshot(const BarrierConfig& cfg, const PacketConfig& pk,
                           const QuadratureSpec& q, std::span<const double> x_grid, double t);

}  // namespace tunneltime
