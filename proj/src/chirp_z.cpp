#include "chirp_z.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace tunneltime::detail {

namespace {

using cplx = std::complex<double>;

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n))), size(n) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* raw() { return reinterpret_cast<fftw_complex*>(data); }
  cplx* data;
  std::size_t size;
};

struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

// FFTW planning is not thread-safe; execution with new-array calls is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }
  PlanPair get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    FftwBuffer a(n);
    FftwBuffer b(n);
    const int len = static_cast<int>(n);
    PlanPair p;
    p.forward = fftw_plan_dft_1d(len, a.raw(), b.raw(), FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_1d(len, a.raw(), b.raw(), FFTW_BACKWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(n, p);
    return p;
  }
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<std::vector<cplx>> plane_wave_sums(std::span<const std::span<const cplx>> inputs,
                                               double k_lo, double dk, double x_s, double h,
                                               std::size_t M) {
  std::vector<std::vector<cplx>> out;
  if (inputs.empty() || M == 0) return out;
  const std::size_t N = inputs.front().size();
  for (auto in : inputs) {
    if (in.size() != N) throw std::invalid_argument("plane_wave_sums: ragged inputs");
  }
  const std::size_t L = next_pow2(N + M - 1);
  const PlanPair plans = PlanCache::instance().get(L);
  const double alpha = dk * h;

  // Kernel b_m = exp(-i alpha m^2 / 2) for m in (-N, M), wrapped modulo L.
  FftwBuffer kernel(L);
  FftwBuffer kernel_hat(L);
  for (std::size_t i = 0; i < L; ++i) kernel.data[i] = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double mm = static_cast<double>(m);
    kernel.data[m] = std::polar(1.0, -0.5 * alpha * mm * mm);
  }
  for (std::size_t m = 1; m < N; ++m) {
    const double mm = static_cast<double>(m);
    kernel.data[L - m] = std::polar(1.0, -0.5 * alpha * mm * mm);
  }
  fftw_execute_dft(plans.forward, kernel.raw(), kernel_hat.raw());

  std::vector<cplx> pre(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double nn = static_cast<double>(n);
    pre[n] = std::polar(1.0, nn * dk * x_s + 0.5 * alpha * nn * nn);
  }
  std::vector<cplx> post(M);
  const double inv_L = 1.0 / static_cast<double>(L);
  for (std::size_t j = 0; j < M; ++j) {
    const double jj = static_cast<double>(j);
    post[j] = inv_L * std::polar(1.0, 0.5 * alpha * jj * jj + k_lo * (x_s + jj * h));
  }

  FftwBuffer work(L);
  FftwBuffer work_hat(L);
  out.reserve(inputs.size());
  for (auto in : inputs) {
    for (std::size_t n = 0; n < N; ++n) work.data[n] = in[n] * pre[n];
    for (std::size_t n = N; n < L; ++n) work.data[n] = 0.0;
    fftw_execute_dft(plans.forward, work.raw(), work_hat.raw());
    for (std::size_t i = 0; i < L; ++i) work_hat.data[i] *= kernel_hat.data[i];
    fftw_execute_dft(plans.backward, work_hat.raw(), work.raw());
    std::vector<cplx> x(M);
    for (std::size_t j = 0; j < M; ++j) x[j] = work.data[j] * post[j];
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace tunneltime::detail
