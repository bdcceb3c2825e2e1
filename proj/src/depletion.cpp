#include "tunneltime/depletion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tunneltime {

namespace {

constexpr std::size_t kMinFitSamples = 10;
constexpr int kMaxNewton = 100;
constexpr double kDedup = 1e-8;
constexpr double kAcceptResidual = 1e-10;
constexpr double kCountResidual = 0.01;

constexpr int kMaxDepth = 30;
constexpr std::size_t kMaxEvaluations = 400000;

// Adaptive Simpson for a complex integrand, with a relative floor on the
// local tolerance and a cap on the number of evaluations.
template <class F>
class AdaptiveSimpson {
 public:
  explicit AdaptiveSimpson(const F& f) : f_(f) {}

  cplx integrate(double a, double b, double tol) {
    constexpr int panels = 16;  // so that narrow features are not skipped by the first estimate
    cplx total = 0.0;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
      const double lo = a + h * i;
      const double hi = i + 1 == panels ? b : lo + h;
      const double mid = 0.5 * (lo + hi);
      const cplx flo = eval(lo);
      const cplx fmid = eval(mid);
      const cplx fhi = eval(hi);
      const cplx whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
      total += refine(lo, hi, flo, fmid, fhi, whole, tol / panels, kMaxDepth);
    }
    return total;
  }

 private:
  cplx eval(double s) {
    if (++evaluations_ > kMaxEvaluations) {
      throw std::runtime_error("count_zeros: contour quadrature did not converge");
    }
    return f_(s);
  }

  cplx refine(double a, double b, cplx fa, cplx fm, cplx fb, cplx whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const cplx flm = eval(0.5 * (a + m));
    const cplx frm = eval(0.5 * (m + b));
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx diff = left + right - whole;
    const double floor = 1e-13 * (b - a) * (std::abs(fa) + std::abs(fm) + std::abs(fb));
    if (depth <= 0 || std::abs(diff) <= 15.0 * std::max(tol, floor)) return left + right + diff / 15.0;
    return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  const F& f_;
  std::size_t evaluations_ = 0;
};

}  // namespace

FitResult fit_exponential_tail(std::span<const double> times, std::span<const double> values,
                               FitWindow window) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("fit_exponential_tail: times and values differ in length");
  }
  if (!(window.t_hi > window.t_lo)) {
    throw std::invalid_argument("fit_exponential_tail: window needs t_lo < t_hi");
  }
  std::vector<double> t;
  std::vector<double> y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window.t_lo || times[i] > window.t_hi) continue;
    if (!(values[i] > 0.0)) {
      throw std::invalid_argument("fit_exponential_tail: non-positive value " +
                                  std::to_string(values[i]) + " at t = " +
                                  std::to_string(times[i]));
    }
    t.push_back(times[i]);
    y.push_back(std::log(values[i]));
  }
  if (t.size() < kMinFitSamples) {
    throw std::invalid_argument("fit_exponential_tail: " + std::to_string(t.size()) +
                                " samples in window, need at least 10");
  }
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, syy = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    syy += (y[i] - my) * (y[i] - my);
    sty += (t[i] - mt) * (y[i] - my);
  }
  const double slope = sty / stt;
  FitResult r;
  r.window = window;
  r.samples = t.size();
  r.tau_dep = -1.0 / slope;
  r.amplitude = std::exp(my - slope * mt);
  // An exact line has syy ~ rounding only; report the limiting value.
  r.correlation = syy > 0.0 ? sty / std::sqrt(stt * syy) : (slope < 0.0 ? -1.0 : 1.0);
  r.correlation = std::clamp(r.correlation, -1.0, 1.0);
  return r;
}

bool ComplexRect::contains(cplx z) const {
  return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
}

void ComplexRect::validate() const {
  if (!(re_hi > re_lo) || !(im_hi > im_lo)) {
    throw std::invalid_argument("complex rectangle needs re_lo < re_hi and im_lo < im_hi");
  }
}

std::vector<cplx> seed_grid(const ComplexRect& region, std::size_t nx, std::size_t ny) {
  region.validate();
  if (nx < 2 || ny < 2) throw std::invalid_argument("seed grid needs at least 2 x 2 points");
  std::vector<cplx> seeds;
  seeds.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = region.re_lo + (region.re_hi - region.re_lo) * static_cast<double>(i) /
                                        static_cast<double>(nx - 1);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = region.im_lo + (region.im_hi - region.im_lo) * static_cast<double>(j) /
                                          static_cast<double>(ny - 1);
      seeds.emplace_back(x, y);
    }
  }
  return seeds;
}

std::vector<cplx> find_zeros(const BarrierConfig& cfg, const ComplexRect& region,
                             std::span<const cplx> seeds) {
  cfg.validate();
  region.validate();
  std::vector<cplx> zeros;
  for (cplx z : seeds) {
    bool converged = false;
    for (int it = 0; it < kMaxNewton; ++it) {
      const cplx u = u_of_z(cfg, z);
      const cplx du = u_of_z_derivative(cfg, z);
      if (u == 0.0) {
        converged = true;
        break;
      }
      if (du == 0.0 || !std::isfinite(std::abs(du))) break;
      const cplx step = u / du;
      z -= step;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged || !region.contains(z)) continue;
    if (std::abs(u_of_z(cfg, z)) >= kAcceptResidual * u_scale(cfg, z)) continue;
    const bool seen = std::any_of(zeros.begin(), zeros.end(),
                                  [&](cplx w) { return std::abs(w - z) < kDedup; });
    if (!seen) zeros.push_back(z);
  }
  if (zeros.empty()) throw std::runtime_error("find_zeros: no zero of u found in the region");
  std::sort(zeros.begin(), zeros.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return zeros;
}

std::vector<cplx> find_zeros(const BarrierConfig& cfg, const ComplexRect& region) {
  const auto seeds = seed_grid(region);
  return find_zeros(cfg, region, seeds);
}

ZeroCount count_zeros(const BarrierConfig& cfg, const ComplexRect& region) {
  cfg.validate();
  region.validate();
  const cplx corners[] = {{region.re_lo, region.im_lo},
                          {region.re_hi, region.im_lo},
                          {region.re_hi, region.im_hi},
                          {region.re_lo, region.im_hi}};
  cplx total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx a = corners[e];
    const cplx b = corners[(e + 1) % 4];
    const cplx dz = b - a;
    auto f = [&](double s) {
      const cplx z = a + s * dz;
      return u_of_z_derivative(cfg, z) / u_of_z(cfg, z) * dz;
    };
    total += AdaptiveSimpson<decltype(f)>(f).integrate(0.0, 1.0, 1e-9);
  }
  const cplx w = total / cplx(0.0, 2.0 * std::numbers::pi);
  ZeroCount c;
  c.winding = w.real();
  c.count = std::lround(w.real());
  c.residual = std::abs(w - static_cast<double>(c.count));
  if (!(c.residual < kCountResidual)) {
    throw std::runtime_error("count_zeros: winding number " + std::to_string(w.real()) + " + " +
                             std::to_string(w.imag()) +
                             "i is not near an integer; the contour passes close to a zero");
  }
  return c;
}

double opaque_relation_residual(const BarrierConfig& cfg, cplx z) {
  const double k0 = cfg.k0();
  const cplx kappa = std::sqrt(kappa_squared(cfg, k0 * z));
  const cplx s = even_pair(kappa, 2.0 * cfg.d).sh;
  const cplx lhs = -k0 * k0 * s * s;
  const cplx rhs = 4.0 * z * z;
  return std::abs(lhs - rhs) / std::abs(rhs);
}

PoleResult depletion_from_poles(std::span<const cplx> zeros, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("depletion_from_poles: m must be > 0");
  PoleResult r;
  double best = std::numeric_limits<double>::infinity();
  for (cplx k : zeros) {
    const double xy = k.real() * k.imag();
    if (xy < 0.0 && -xy < best) {
      best = -xy;
      r.zero = k;
    }
  }
  if (!std::isfinite(best)) {
    throw std::invalid_argument("depletion_from_poles: no zero with x*y < 0");
  }
  r.tau_from_pole = m / (2.0 * best);
  return r;
}

}  // namespace tunneltime
