#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tunneltime::detail {

/// Evaluates X_j = sum_n g_n exp(i (k_lo + n dk)(x_s + j h)) for j in [0, M)
/// and every input vector g, sharing one Bluestein kernel.
std::vector<std::vector<std::complex<double>>> plane_wave_sums(
    std::span<const std::span<const std::complex<double>>> inputs, double k_lo, double dk,
    double x_s, double h, std::size_t M);

}  // namespace tunneltime::detail
