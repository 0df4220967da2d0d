#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Numeric inner loops. Each kernel has a serial reference and an OpenMP
// version; both evaluate every output element with the same arithmetic, so
// results are bitwise identical regardless of thread count or schedule.

namespace lcorder::kernels {

using LogDensity = std::function<double(double)>;

/// Quadrature settings for h(x) = int_0^x f(y) g(x - y) dy.
///
/// The integral is split at x/2 so each half has its only possible
/// singularity (y^{a-1} at y = 0) at the lower end, then integrated in
/// u = log y with composite Simpson on `points` nodes (4k + 1, k >= 1).
struct DensityQuadrature
{
    double f_lo = 0.0; ///< f is treated as zero below this point
    double g_lo = 0.0; ///< g is treated as zero below this point
    int points = 1025;
};

/// One output node of a density convolution.
struct DensityEstimate
{
    double value = 0.0;
    /// Quadrature error bound |S_h - S_2h| against the half-resolution rule.
    double error = 0.0;
};

DensityEstimate convolve_density_at(double x, LogDensity const& log_f, LogDensity const& log_g,
                                    DensityQuadrature const& q);

namespace serial {

/// Full discrete convolution (size a + b - 1), compensated per output.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

std::vector<DensityEstimate> convolve_density(std::span<const double> nodes, LogDensity const& log_f,
                                              LogDensity const& log_g, DensityQuadrature const& q);

} // namespace serial

namespace parallel {

std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

std::vector<DensityEstimate> convolve_density(std::span<const double> nodes, LogDensity const& log_f,
                                              LogDensity const& log_g, DensityQuadrature const& q);

} // namespace parallel

/// Output sizes below this run the serial kernel; thread start-up dominates.
inline constexpr std::size_t kParallelThreshold = 4096;

std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

int max_threads();

} // namespace lcorder::kernels
