#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tunneltime/packet.hpp"

namespace tunneltime {

inline constexpr double kConservationTolerance = 1e-5;

/// Raised when P1 + P2 + P3 drifts from 1 by more than kConservationTolerance,
/// which means the spatial window or grid is too coarse.
class ConservationError : public std::runtime_error {
 public:
  ConservationError(double t, double total);
  double time() const { return t_; }
  double total() const { return total_; }

 private:
  double t_;
  double total_;
};

struct RegionProbabilities {
  double p1 = 0.0;  // x < -d
  double p2 = 0.0;  // |x| < d
  double p3 = 0.0;  // x > d
  double total() const { return p1 + p2 + p3; }
};

/// Spatial Simpson grids. Outside the barrier the window grows with time as
/// x0 - k_hi t/m - pad * w on the left and d + k_hi t/m + pad * w on the right.
struct SpatialGrid {
  double dx_barrier = 2e-3;
  double dx_outside = 2e-2;
  double pad_widths = 10.0;
};

/// |psi|^2 integrated over the three regions by composite Simpson in x.
class RegionIntegrator {
 public:
  explicit RegionIntegrator(const PacketModel& model, SpatialGrid grid = {});

  RegionProbabilities at(double t) const;
  /// Batched and parallel over time samples; bit-identical for any worker count.
  std::vector<RegionProbabilities> at(std::span<const double> times, std::size_t workers) const;
  /// Only the barrier integral, for every sample.
  std::vector<double> barrier_probability(std::span<const double> times,
                                          std::size_t workers) const;
  /// P1 and P3 only (p2 left at zero); no conservation check.
  std::vector<RegionProbabilities> outside(std::span<const double> times,
                                           std::size_t workers) const;

  double x_left(double t) const;
  double x_right(double t) const;
  const SpatialGrid& grid() const { return grid_; }

 private:
  std::vector<RegionProbabilities> compute(std::span<const double> times, std::size_t workers,
                                           bool with_barrier) const;
  std::vector<double> barrier_block(std::span<const double> times) const;
  double outside_left(std::span<const cplx> c, double t) const;
  double outside_right(std::span<const cplx> c, double t) const;

  const PacketModel* model_;
  SpatialGrid grid_;
  std::vector<double> barrier_weights_;
  Eigen::MatrixXcd basis_;  // psi_k(x_j) for x_j in [-d, d]
};

/// Barrier probability from the closed-form double momentum integral
/// P2(t) = sum_{k,p} c_k(t) c_p(t)^* int_{-d}^{d} psi_k psi_p^* dx.
/// Construction is O(n_k^2); each time sample costs one quadratic form.
class SpectralP2 {
 public:
  explicit SpectralP2(const PacketModel& model);
  double at(double t) const;
  std::vector<double> at(std::span<const double> times, std::size_t workers) const;

 private:
  std::vector<double> block(std::span<const double> times) const;

  const PacketModel* model_;
  Eigen::MatrixXcd kernel_;
};

RegionProbabilities region_probabilities(const BarrierConfig& cfg, const PacketConfig& pk,
                                         const QuadratureSpec& q, double t);
double p2_spectral(const BarrierConfig& cfg, const PacketConfig& pk, const QuadratureSpec& q,
                   double t);

/// Long-time limits, exact in momentum space.
struct Asymptotics {
  double r_prob = 0.0;
  double t_prob = 0.0;
  double k_r = 0.0;  // NaN when r_prob == 0
  double k_t = 0.0;  // NaN when t_prob == 0
  bool k_r_defined() const;
  bool k_t_defined() const;
};

Asymptotics asymptotics(const PacketModel& model);
Asymptotics asymptotics(const BarrierConfig& cfg, const PacketConfig& pk, const QuadratureSpec& q);

/// Sampling: dt_fine on [0, fine_end], dt_coarse on (fine_end, t_max].
struct TimeGrid {
  double dt_fine = 0.01;
  double fine_end = 10.0;
  double dt_coarse = 0.25;
  double t_max = 100.0;
  std::vector<double> samples() const;
  void validate() const;
};

enum class P2Method { spatial, spectral };
const char* to_string(P2Method m);

struct ProbabilityTrace {
  std::vector<double> times;
  std::vector<double> p1;
  std::vector<double> p2;
  std::vector<double> p3;
  std::vector<P2Method> method;
  QuadratureSpec quadrature;
  SpatialGrid grid;
  double max_conservation_error = 0.0;

  std::size_t size() const { return times.size(); }
};

struct TraceOptions {
  TimeGrid time_grid;
  SpatialGrid spatial;
  /// Samples with t > spectral_after take P2 from SpectralP2; nullopt keeps every sample spatial.
  std::optional<double> spectral_after = 10.0;
  std::size_t workers = 1;
};

/// Throws ConservationError at the first sample outside the budget.
ProbabilityTrace build_trace(const PacketModel& model, const TraceOptions& options);

}  // namespace tunneltime
