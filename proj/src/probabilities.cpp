#include "tunneltime/probabilities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "chirp_z.hpp"
#include "tunneltime/parallel.hpp"
#include "tunneltime/quadrature.hpp"

namespace tunneltime {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr std::size_t kChunk = 32;

std::size_t even_intervals(double length, double dx) {
  auto n = static_cast<std::size_t>(std::ceil(length / dx - 1e-9));
  if (n < 2) n = 2;
  if (n % 2 == 1) ++n;
  return n;
}

double simpson_abs2(std::span<const cplx> psi, double h) {
  std::vector<double> f(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) f[i] = std::norm(psi[i]);
  return quad::simpson(f, h);
}

std::string conservation_message(double t, double total) {
  return "probability not conserved at t = " + std::to_string(t) + ": P1+P2+P3 = " +
         std::to_string(total) + " (|deviation| = " + std::to_string(std::abs(total - 1.0)) +
         " > 1e-5); widen the window or refine the grid";
}

void check_conservation(double t, const RegionProbabilities& p) {
  if (std::abs(p.total() - 1.0) > kConservationTolerance) throw ConservationError(t, p.total());
}

}  // namespace

ConservationError::ConservationError(double t, double total)
    : std::runtime_error(conservation_message(t, total)), t_(t), total_(total) {}

RegionIntegrator::RegionIntegrator(const PacketModel& model, SpatialGrid grid)
    : model_(&model), grid_(grid) {
  if (!(grid_.dx_barrier > 0.0) || !(grid_.dx_outside > 0.0) || !(grid_.pad_widths > 0.0)) {
    throw std::invalid_argument("spatial grid steps and padding must be > 0");
  }
  const double d = model.barrier().d;
  const std::size_t n = even_intervals(2.0 * d, grid_.dx_barrier);
  const double h = 2.0 * d / static_cast<double>(n);
  barrier_weights_ = quad::simpson_weights(n + 1, h);

  const auto inner = model.interior();
  basis_.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(inner.size()));
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = j == n ? d : -d + h * static_cast<double>(j);
    for (std::size_t k = 0; k < inner.size(); ++k) {
      const EvenPair p = even_pair(inner[k].kappa, x);
      basis_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          inner[k].even * p.ch + inner[k].odd * p.sh;
    }
  }
}

double RegionIntegrator::x_left(double t) const {
  const auto& pk = model_->packet();
  const double k_hi = model_->quadrature().k_hi;
  const double x = pk.x0 - k_hi / model_->barrier().m * t - grid_.pad_widths * pk.spatial_width();
  return std::min(x, -model_->barrier().d - 2.0 * grid_.dx_outside);
}

double RegionIntegrator::x_right(double t) const {
  const auto& pk = model_->packet();
  const double d = model_->barrier().d;
  const double k_hi = model_->quadrature().k_hi;
  const double x = d + k_hi / model_->barrier().m * t + grid_.pad_widths * pk.spatial_width();
  return std::max(x, d + 2.0 * grid_.dx_outside);
}

std::vector<double> RegionIntegrator::barrier_block(std::span<const double> times) const {
  const auto k = model_->momenta();
  const auto wa = model_->weighted_amplitudes();
  const double inv2m = 1.0 / (2.0 * model_->barrier().m);
  Eigen::MatrixXcd c(static_cast<Eigen::Index>(k.size()), static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t n = 0; n < k.size(); ++n) {
      c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) =
          wa[n] * std::exp(-I * (k[n] * k[n] * times[i] * inv2m));
    }
  }
  const Eigen::MatrixXcd psi = basis_ * c;
  std::vector<double> p2(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < barrier_weights_.size(); ++j) {
      s += barrier_weights_[j] *
           std::norm(psi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
    }
    p2[i] = s;
  }
  return p2;
}

double RegionIntegrator::outside_left(std::span<const cplx> c, double t) const {
  const double d = model_->barrier().d;
  const double xl = x_left(t);
  const std::size_t n = even_intervals(-d - xl, grid_.dx_outside);
  const double h = (-d - xl) / static_cast<double>(n);
  const auto scat = model_->scattering();
  std::vector<cplx> refl(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) refl[i] = std::conj(c[i] * scat[i].a_refl);
  // sum c A e^{-ikx} = conj(sum conj(c A) e^{ikx})
  const std::span<const cplx> inputs[] = {c, refl};
  const auto sums = detail::plane_wave_sums(inputs, model_->quadrature().k_lo,
                                            model_->quadrature().step(), xl, h, n + 1);
  std::vector<cplx> psi(n + 1);
  for (std::size_t j = 0; j <= n; ++j) psi[j] = sums[0][j] + std::conj(sums[1][j]);
  return simpson_abs2(psi, h);
}

double RegionIntegrator::outside_right(std::span<const cplx> c, double t) const {
  const double d = model_->barrier().d;
  const double xr = x_right(t);
  const std::size_t n = even_intervals(xr - d, grid_.dx_outside);
  const double h = (xr - d) / static_cast<double>(n);
  const auto scat = model_->scattering();
  std::vector<cplx> trans(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) trans[i] = c[i] * scat[i].d_trans;
  const std::span<const cplx> inputs[] = {trans};
  const auto sums = detail::plane_wave_sums(inputs, model_->quadrature().k_lo,
                                            model_->quadrature().step(), d, h, n + 1);
  return simpson_abs2(sums[0], h);
}

std::vector<RegionProbabilities> RegionIntegrator::compute(std::span<const double> times,
                                                           std::size_t workers,
                                                           bool with_barrier) const {
  std::vector<RegionProbabilities> out(times.size());
  const std::size_t chunks = (times.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t ci) {
    const std::size_t lo = ci * kChunk;
    const std::size_t hi = std::min(times.size(), lo + kChunk);
    const auto block = times.subspan(lo, hi - lo);
    std::vector<double> p2;
    if (with_barrier) p2 = barrier_block(block);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::vector<cplx> c = model_->coefficients(times[i]);
      out[i].p1 = outside_left(c, times[i]);
      out[i].p3 = outside_right(c, times[i]);
      if (with_barrier) out[i].p2 = p2[i - lo];
    }
  });
  return out;
}

RegionProbabilities RegionIntegrator::at(double t) const {
  const double ts[] = {t};
  return at(ts, 1).front();
}

std::vector<RegionProbabilities> RegionIntegrator::at(std::span<const double> times,
                                                      std::size_t workers) const {
  for (double t : times) {
    if (t < 0.0) throw std::invalid_argument("region probabilities: t must be >= 0");
  }
  auto out = compute(times, workers, true);
  for (std::size_t i = 0; i < times.size(); ++i) check_conservation(times[i], out[i]);
  return out;
}

std::vector<RegionProbabilities> RegionIntegrator::outside(std::span<const double> times,
                                                           std::size_t workers) const {
  return compute(times, workers, false);
}

std::vector<double> RegionIntegrator::barrier_probability(std::span<const double> times,
                                                          std::size_t workers) const {
  std::vector<double> out(times.size());
  const std::size_t chunks = (times.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t ci) {
    const std::size_t lo = ci * kChunk;
    const std::size_t hi = std::min(times.size(), lo + kChunk);
    const auto p2 = barrier_block(times.subspan(lo, hi - lo));
    std::copy(p2.begin(), p2.end(), out.begin() + static_cast<std::ptrdiff_t>(lo));
  });
  return out;
}

SpectralP2::SpectralP2(const PacketModel& model) : model_(&model) {
  const auto inner = model.interior();
  const auto wa = model.weighted_amplitudes();
  const double d = model.barrier().d;
  const auto n = static_cast<Eigen::Index>(inner.size());
  kernel_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (Eigen::Index j = i; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const cplx v = wa[ui] * std::conj(wa[uj]) * interior_overlap(d, inner[ui], inner[uj]);
      kernel_(i, j) = v;
      kernel_(j, i) = std::conj(v);
    }
    kernel_(i, i) = kernel_(i, i).real();
  }
}

std::vector<double> SpectralP2::block(std::span<const double> times) const {
  const auto k = model_->momenta();
  const double inv2m = 1.0 / (2.0 * model_->barrier().m);
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(k.size()), static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t n = 0; n < k.size(); ++n) {
      v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) =
          std::exp(I * (k[n] * k[n] * times[i] * inv2m));
    }
  }
  const Eigen::MatrixXcd y = kernel_ * v;
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out[i] = v.col(ii).dot(y.col(ii)).real();  // dot conjugates its first argument
  }
  return out;
}

double SpectralP2::at(double t) const {
  const double ts[] = {t};
  return at(ts, 1).front();
}

std::vector<double> SpectralP2::at(std::span<const double> times, std::size_t workers) const {
  for (double t : times) {
    if (t < 0.0) throw std::invalid_argument("p2_spectral: t must be >= 0");
  }
  std::vector<double> out(times.size());
  const std::size_t chunks = (times.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t ci) {
    const std::size_t lo = ci * kChunk;
    const std::size_t hi = std::min(times.size(), lo + kChunk);
    const auto p2 = block(times.subspan(lo, hi - lo));
    std::copy(p2.begin(), p2.end(), out.begin() + static_cast<std::ptrdiff_t>(lo));
  });
  return out;
}

RegionProbabilities region_probabilities(const BarrierConfig& cfg, const PacketConfig& pk,
                                         const QuadratureSpec& q, double t) {
  const PacketModel model(cfg, pk, q);
  return RegionIntegrator(model).at(t);
}

double p2_spectral(const BarrierConfig& cfg, const PacketConfig& pk, const QuadratureSpec& q,
                   double t) {
  const PacketModel model(cfg, pk, q);
  return SpectralP2(model).at(t);
}

bool Asymptotics::k_r_defined() const { return std::isfinite(k_r); }
bool Asymptotics::k_t_defined() const { return std::isfinite(k_t); }

Asymptotics asymptotics(const PacketModel& model) {
  const auto k = model.momenta();
  const auto scat = model.scattering();
  const std::vector<double> w = model.quadrature().weights();
  double r = 0.0, t = 0.0, rk = 0.0, tk = 0.0;
  for (std::size_t n = 0; n < k.size(); ++n) {
    const double density = 2.0 * std::numbers::pi * w[n] *
                           std::norm(amplitude_a(model.packet(), k[n]));
    const double rn = density * std::norm(scat[n].a_refl);
    const double tn = density * std::norm(scat[n].d_trans);
    r += rn;
    t += tn;
    rk += rn * k[n];
    tk += tn * k[n];
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Asymptotics a;
  a.r_prob = r;
  a.t_prob = t;
  a.k_r = r > 0.0 ? rk / r : nan;
  a.k_t = t > 0.0 ? tk / t : nan;
  return a;
}

Asymptotics asymptotics(const BarrierConfig& cfg, const PacketConfig& pk, const QuadratureSpec& q) {
  return asymptotics(PacketModel(cfg, pk, q));
}

void TimeGrid::validate() const {
  if (!(dt_fine > 0.0) || !(dt_coarse > 0.0)) throw std::invalid_argument("time steps must be > 0");
  if (!(fine_end >= 0.0) || !(t_max > fine_end)) {
    throw std::invalid_argument("time grid needs 0 <= fine_end < t_max");
  }
}

std::vector<double> TimeGrid::samples() const {
  validate();
  std::vector<double> t;
  const auto n_fine = static_cast<std::size_t>(std::llround(fine_end / dt_fine));
  for (std::size_t i = 0; i <= n_fine; ++i) t.push_back(dt_fine * static_cast<double>(i));
  const double start = t.back();
  const auto n_coarse = static_cast<std::size_t>(std::llround((t_max - start) / dt_coarse));
  for (std::size_t i = 1; i <= n_coarse; ++i) {
    t.push_back(start + dt_coarse * static_cast<double>(i));
  }
  return t;
}

const char* to_string(P2Method m) {
  return m == P2Method::spatial ? "spatial" : "spectral";
}

ProbabilityTrace build_trace(const PacketModel& model, const TraceOptions& options) {
  ProbabilityTrace tr;
  tr.times = options.time_grid.samples();
  tr.quadrature = model.quadrature();
  tr.grid = options.spatial;
  const std::size_t n = tr.times.size();
  tr.p1.resize(n);
  tr.p2.resize(n);
  tr.p3.resize(n);
  tr.method.resize(n, P2Method::spatial);

  std::vector<double> spatial_t;
  std::vector<double> spectral_t;
  for (double t : tr.times) {
    (options.spectral_after && t > *options.spectral_after ? spectral_t : spatial_t).push_back(t);
  }

  const RegionIntegrator regions(model, options.spatial);
  const auto near = regions.at(spatial_t, options.workers);
  std::vector<RegionProbabilities> far;
  std::vector<double> far_p2;
  if (!spectral_t.empty()) {
    far = regions.outside(spectral_t, options.workers);
    const SpectralP2 spectral(model);
    far_p2 = spectral.at(spectral_t, options.workers);
  }

  for (std::size_t i = 0; i < n; ++i) {
    RegionProbabilities p;
    if (i < near.size()) {
      p = near[i];
    } else {
      const std::size_t j = i - near.size();
      p = far[j];
      p.p2 = far_p2[j];
      tr.method[i] = P2Method::spectral;
    }
    tr.p1[i] = p.p1;
    tr.p2[i] = p.p2;
    tr.p3[i] = p.p3;
    check_conservation(tr.times[i], p);
    tr.max_conservation_error = std::max(tr.max_conservation_error, std::abs(p.total() - 1.0));
  }
  return tr;
}

}  // namespace tunneltime
