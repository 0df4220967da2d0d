#include "lcorder/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace lcorder::kernels;

TEST_CASE("discrete convolution: parallel matches serial and direct sums")
{
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t na : {1u, 7u, 300u, 5000u}) {
        std::vector<double> a(na);
        std::vector<double> b(na / 2 + 3);
        for (double& x : a) {
            x = u(rng);
        }
        for (double& x : b) {
            x = u(rng);
        }
        auto const s = serial::convolve(a, b);
        auto const p = parallel::convolve(a, b);
        REQUIRE(s.size() == a.size() + b.size() - 1);
        CHECK(s == p);
        CHECK(convolve(a, b) == s);
        for (std::size_t k = 0; k < s.size(); k += 97) {
            long double direct = 0.0L;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (k >= i && k - i < b.size()) {
                    direct += static_cast<long double>(a[i]) * b[k - i];
                }
            }
            CHECK(std::abs(s[k] - static_cast<double>(direct)) <= 1e-13 * static_cast<double>(direct));
        }
    }
    CHECK(serial::convolve({}, std::vector<double>{1.0}).empty());
}

TEST_CASE("density convolution: parallel matches serial, exponentials give the hypoexponential")
{
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    // rate-1 and rate-1/2 exponentials: density e^{-x/2} - e^{-x}
    LogDensity const f = [](double x) { return x > 0.0 ? -x : -INFINITY; };
    LogDensity const g = [](double x) { return x > 0.0 ? -x / 2.0 - std::log(2.0) : -INFINITY; };
    std::vector<double> nodes;
    for (int j = 0; j < 200; ++j) {
        nodes.push_back(0.05 * std::exp(0.03 * j));
    }
    DensityQuadrature q;
    q.f_lo = 1e-14;
    q.g_lo = 1e-14;
    q.points = 513;
    auto const s = serial::convolve_density(nodes, f, g, q);
    auto const p = parallel::convolve_density(nodes, f, g, q);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        double const x = nodes[j];
        double const exact = std::exp(-x / 2.0) - std::exp(-x);
        CHECK(s[j].value == p[j].value);
        CHECK(s[j].error == p[j].error);
        CHECK(std::abs(s[j].value - exact) <= s[j].error + 1e-13 * exact);
        CHECK(std::abs(s[j].value - exact) <= 1e-5 * exact);
    }
    q.points = 7;
    CHECK_THROWS(serial::convolve_density(nodes, f, g, q));
}
