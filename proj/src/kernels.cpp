#include "lcorder/kernels.hpp"

#include "lcorder/compensated_sum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcorder::kernels {

namespace {

double convolve_one(std::span<const double> a, std::span<const double> b, std::size_t k)
{
    // i ranges over max(0, k-(nb-1)) .. min(k, na-1)
    std::size_t const lo = k >= b.size() ? k - (b.size() - 1) : 0;
    std::size_t const hi = std::min(k, a.size() - 1);
    CompensatedSum s;
    for (std::size_t i = lo; i <= hi; ++i) {
        s += a[i] * b[k - i];
    }
    return s.value();
}

// Simpson in u = log y over [log lo, log(x/2)] of e^{log_a(y) + log_b(x-y)} y.
// Returns the Simpson value on n points and on the every-other-node subgrid.
std::pair<double, double> half_integral(double x, double lo, LogDensity const& log_a, LogDensity const& log_b,
                                        int points)
{
    double const top = 0.5 * x;
    if (!(lo < top)) {
        return {0.0, 0.0};
    }
    double const u0 = std::log(lo);
    double const u1 = std::log(top);
    int const intervals = points - 1;
    double const h = (u1 - u0) / intervals;

    CompensatedSum fine;
    CompensatedSum coarse;
    for (int j = 0; j <= intervals; ++j) {
        double const u = j == intervals ? u1 : u0 + j * h;
        double const y = std::exp(u);
        double const la = log_a(y);
        double const lb = log_b(x - y);
        double const term = (std::isfinite(la) && std::isfinite(lb)) ? std::exp(la + lb + u) : 0.0;
        double const wf = (j == 0 || j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        fine += wf * term;
        if (j % 2 == 0) {
            int const jc = j / 2;
            double const wc = (jc == 0 || jc == intervals / 2) ? 1.0 : (jc % 2 == 1 ? 4.0 : 2.0);
            coarse += wc * term;
        }
    }
    return {fine.value() * h / 3.0, coarse.value() * 2.0 * h / 3.0};
}

void check_quadrature(DensityQuadrature const& q)
{
    if (q.points < 5 || q.points % 2 == 0 || ((q.points - 1) / 2) % 2 != 0) {
        throw std::invalid_argument("density quadrature needs 4k+1 points (k >= 1)");
    }
}

} // namespace

DensityEstimate convolve_density_at(double x, LogDensity const& log_f, LogDensity const& log_g,
                                    DensityQuadrature const& q)
{
    if (!(x > 0.0)) {
        return {};
    }
    auto const [f1, c1] = half_integral(x, q.f_lo, log_f, log_g, q.points);
    auto const [f2, c2] = half_integral(x, q.g_lo, log_g, log_f, q.points);
    double const value = f1 + f2;
    double const err = std::abs((f1 + f2) - (c1 + c2));
    return {value, err};
}

namespace serial {

std::vector<double> convolve(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    std::vector<double> out(a.size() + b.size() - 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = convolve_one(a, b, k);
    }
    return out;
}

std::vector<DensityEstimate> convolve_density(std::span<const double> nodes, LogDensity const& log_f,
                                              LogDensity const& log_g, DensityQuadrature const& q)
{
    check_quadrature(q);
    std::vector<DensityEstimate> out(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        out[j] = convolve_density_at(nodes[j], log_f, log_g, q);
    }
    return out;
}

} // namespace serial

namespace parallel {

std::vector<double> convolve(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    std::vector<double> out(a.size() + b.size() - 1);
    auto const n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k)] = convolve_one(a, b, static_cast<std::size_t>(k));
    }
    return out;
}

std::vector<DensityEstimate> convolve_density(std::span<const double> nodes, LogDensity const& log_f,
                                              LogDensity const& log_g, DensityQuadrature const& q)
{
    check_quadrature(q);
    std::vector<DensityEstimate> out(nodes.size());
    auto const n = static_cast<std::int64_t>(nodes.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t j = 0; j < n; ++j) {
        auto const idx = static_cast<std::size_t>(j);
        out[idx] = convolve_density_at(nodes[idx], log_f, log_g, q);
    }
    return out;
}

} // namespace parallel

std::vector<double> convolve(std::span<const double> a, std::span<const double> b)
{
    if (a.size() + b.size() >= kParallelThreshold) {
        return parallel::convolve(a, b);
    }
    return serial::convolve(a, b);
}

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace lcorder::kernels
