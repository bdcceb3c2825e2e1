#include "tunneltime/packet.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tunneltime/quadrature.hpp"

namespace tunneltime {

namespace {
constexpr cplx I{0.0, 1.0};
constexpr double kWindowSigmas = 8.0;
constexpr double kMinSigmasAboveZero = 6.0;
}  // namespace

double PacketConfig::sigma_k() const { return 1.0 / (delta * std::numbers::sqrt2); }

void PacketConfig::validate() const {
  if (!(std::isfinite(delta) && delta > 0.0)) {
    throw std::invalid_argument("delta must be finite and > 0 (got " + std::to_string(delta) +
                                ")");
  }
  if (!std::isfinite(k_av) || !std::isfinite(x0)) {
    throw std::invalid_argument("k_av and x0 must be finite");
  }
  if (!(k_av - kMinSigmasAboveZero * sigma_k() > 0.0)) {
    throw std::invalid_argument("k_av must exceed 6/(delta*sqrt(2)) = " +
                                std::to_string(kMinSigmasAboveZero * sigma_k()) +
                                " so that negative-momentum content is negligible (got k_av = " +
                                std::to_string(k_av) + ")");
  }
}

const char* to_string(QuadratureRule rule) {
  switch (rule) {
    case QuadratureRule::trapezoid: return "trapezoid";
    case QuadratureRule::simpson: return "simpson";
  }
  return "unknown";
}

QuadratureSpec QuadratureSpec::around(const PacketConfig& pk, std::size_t n_k,
                                      QuadratureRule rule) {
  QuadratureSpec q;
  q.k_lo = pk.k_av - kWindowSigmas * pk.sigma_k();
  q.k_hi = pk.k_av + kWindowSigmas * pk.sigma_k();
  q.n_k = n_k;
  q.rule = rule;
  return q;
}

double QuadratureSpec::step() const { return (k_hi - k_lo) / static_cast<double>(n_k - 1); }

std::vector<double> QuadratureSpec::nodes() const {
  std::vector<double> k(n_k);
  const double h = step();
  for (std::size_t i = 0; i < n_k; ++i) k[i] = k_lo + h * static_cast<double>(i);
  k.back() = k_hi;
  return k;
}

std::vector<double> QuadratureSpec::weights() const {
  return rule == QuadratureRule::simpson ? quad::simpson_weights(n_k, step())
                                         : quad::trapezoid_weights(n_k, step());
}

void QuadratureSpec::validate(const PacketConfig& pk) const {
  if (!(k_lo > 0.0)) throw std::invalid_argument("k_lo must be > 0");
  if (!(k_hi > k_lo)) throw std::invalid_argument("k_hi must exceed k_lo");
  if (n_k < 2) throw std::invalid_argument("n_k must be >= 2");
  if (rule == QuadratureRule::simpson && (n_k < 3 || n_k % 2 == 0)) {
    throw std::invalid_argument("n_k must be odd for the simpson rule (got " +
                                std::to_string(n_k) + ")");
  }
  const double slack = 1e-12 * pk.k_av;
  if (k_lo > pk.k_av - kWindowSigmas * pk.sigma_k() + slack ||
      k_hi < pk.k_av + kWindowSigmas * pk.sigma_k() - slack) {
    throw std::invalid_argument("momentum window must cover k_av +- 8 sigma_k");
  }
}

cplx amplitude_a(const PacketConfig& pk, double k) {
  const double norm =
      std::pow(2.0 * pk.delta * pk.delta / (4.0 * std::numbers::pi * std::numbers::pi *
                                            std::numbers::pi),
               0.25);
  const double u = k - pk.k_av;
  return norm * std::exp(-pk.delta * pk.delta * u * u) * std::exp(-I * k * pk.x0);
}

PacketModel::PacketModel(const BarrierConfig& barrier, const PacketConfig& packet,
                         const QuadratureSpec& quad)
    : barrier_(barrier), packet_(packet), quad_(quad) {
  barrier_.validate();
  packet_.validate();
  quad_.validate(packet_);
  k_ = quad_.nodes();
  const std::vector<double> w = quad_.weights();
  wa_.resize(k_.size());
  scat_.resize(k_.size());
  inner_.resize(k_.size());
  for (std::size_t n = 0; n < k_.size(); ++n) {
    wa_[n] = w[n] * amplitude_a(packet_, k_[n]);
    scat_[n] = scattering_set(barrier_, k_[n]);
    inner_[n] = interior_coeffs(barrier_, k_[n]);
  }
}

std::vector<cplx> PacketModel::coefficients(double t) const {
  std::vector<cplx> c(k_.size());
  const double scale = t / (2.0 * barrier_.m);
  for (std::size_t n = 0; n < k_.size(); ++n) {
    c[n] = wa_[n] * std::exp(-I * (k_[n] * k_[n] * scale));
  }
  return c;
}

cplx PacketModel::psi(double x, double t) const { return evaluate(coefficients(t), x); }

cplx PacketModel::evaluate(std::span<const cplx> c, double x) const {
  const double d = barrier_.d;
  cplx sum{0.0, 0.0};
  if (x < -d) {
    for (std::size_t n = 0; n < k_.size(); ++n) {
      const cplx e = std::exp(I * (k_[n] * x));
      sum += c[n] * (e + scat_[n].a_refl / e);
    }
  } else if (x > d) {
    for (std::size_t n = 0; n < k_.size(); ++n) {
      sum += c[n] * scat_[n].d_trans * std::exp(I * (k_[n] * x));
    }
  } else {
    for (std::size_t n = 0; n < k_.size(); ++n) {
      const EvenPair p = even_pair(inner_[n].kappa, x);
      sum += c[n] * (inner_[n].even * p.ch + inner_[n].odd * p.sh);
    }
  }
  return sum;
}

std::vector<cplx> PacketModel::snapshot(std::span<const double> x_grid, double t) const {
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    if (!(x_grid[i] > x_grid[i - 1])) {
      throw std::invalid_argument("snapshot: x grid must be strictly increasing");
    }
  }
  const std::vector<cplx> c = coefficients(t);
  std::vector<cplx> out(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) out[i] = evaluate(c, x_grid[i]);
  return out;
}

cplx psi(const BarrierConfig& cfg, const PacketConfig& pk, const QuadratureSpec& q, double x,
         double t) {
  if (t < 0.0) throw std::invalid_argument("psi: t must be >= 0");
  return PacketModel(cfg, pk, q).psi(x, t);
}

std::vector<cplx> snapshot(const BarrierConfig& cfg, const PacketConfig& pk,
                           const QuadratureSpec& q, std::span<const double> x_grid, double t) {
  if (t < 0.0) throw std::invalid_argument("snapshot: t must be >= 0");
  return PacketModel(cfg, pk, q).snapshot(x_grid, t);
}

}  // namespace tunneltime
