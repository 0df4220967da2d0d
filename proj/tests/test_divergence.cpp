#include "lcorder/divergence.hpp"
#include "lcorder/instances.hpp"
#include "lcorder/pmf.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lcorder;

TEST_CASE("entropy")
{
    CHECK(entropy(Pmf::point_mass(0)).value == 0.0);
    CHECK(entropy(realize(FamilySpec::binomial(1, 0.5))).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    // Poisson(1): -sum p_i log p_i with p_i = e^{-1}/i!, 60 terms
    double h = 0.0;
    for (int i = 0; i <= 60; ++i) {
        double const lp = -1.0 - std::lgamma(i + 1.0);
        h -= std::exp(lp) * lp;
    }
    DivergenceValue const e = entropy(realize(FamilySpec::poisson(1.0)));
    CHECK(std::abs(e.value - h) <= e.error_bound + 1e-14);
    CHECK(e.error_bound < 1e-9);
}

TEST_CASE("relative entropy")
{
    Pmf const f = realize(FamilySpec::binomial(4, 0.3));
    CHECK(std::abs(kl(f, f).value) <= 1e-15);
    // bi(2, 1/2) against po(1): three terms
    double oracle = 0.0;
    double const fw[3] = {0.25, 0.5, 0.25};
    for (int i = 0; i < 3; ++i) {
        oracle += fw[i] * (std::log(fw[i]) - (-1.0 - std::lgamma(i + 1.0)));
    }
    DivergenceValue const d = kl(realize(FamilySpec::binomial(2, 0.5)), realize(FamilySpec::poisson(1.0)));
    CHECK(std::abs(d.value - oracle) <= d.error_bound + 1e-15);
    CHECK_FALSE(kl(realize(FamilySpec::binomial(3, 0.5)), realize(FamilySpec::binomial(2, 0.5))).finite);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto const c = instances::random_chain(seed, 2, instances::MeanSide::left);
        DivergenceValue const v = kl(c.links[0], c.links[1]);
        CHECK(v.finite);
        CHECK(v.value >= -v.error_bound);
    }
}

TEST_CASE("total variation")
{
    Pmf const f = realize(FamilySpec::poisson(2.0));
    CHECK(total_variation(f, f).value == 0.0);
    CHECK(total_variation(Pmf::point_mass(0), Pmf::point_mass(1)).value == 1.0);
    // enumeration of the 8 outcomes of Bernoulli(.1), (.2), (.3)
    double s[4] = {0, 0, 0, 0};
    double const ps[3] = {0.1, 0.2, 0.3};
    for (int mask = 0; mask < 8; ++mask) {
        double pr = 1.0;
        int k = 0;
        for (int i = 0; i < 3; ++i) {
            bool const on = mask >> i & 1;
            pr *= on ? ps[i] : 1.0 - ps[i];
            k += on;
        }
        s[k] += pr;
    }
    double const b[4] = {0.512, 0.384, 0.096, 0.008};
    double tv = 0.0;
    for (int i = 0; i < 4; ++i) {
        tv += 0.5 * std::abs(s[i] - b[i]);
    }
    DivergenceValue const v =
        total_variation(bernoulli_sum(std::vector{0.1, 0.2, 0.3}), realize(FamilySpec::binomial(3, 0.2)));
    CHECK(std::abs(v.value - tv) <= 1e-15);
}

TEST_CASE("Ehm bound")
{
    CHECK(ehm_bound(std::vector{0.3, 0.3, 0.3}) == 0.0);
    // p_bar = .2: (1 - .008 - .512) / (3 * .16) * .02
    CHECK(ehm_bound(std::vector{0.1, 0.3}) == doctest::Approx(0.02).epsilon(1e-14));
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto const ps = instances::random_probabilities(seed, 1 + seed % 12, 0.02, 0.98);
        double lambda = 0.0;
        for (double p : ps) {
            lambda += p;
        }
        auto const n = static_cast<std::int64_t>(ps.size());
        DivergenceValue const tv =
            total_variation(bernoulli_sum(ps), realize(FamilySpec::binomial(n, lambda / static_cast<double>(n))));
        CHECK(ehm_bound(ps) >= tv.value - tv.error_bound - 1e-15);
    }
}

TEST_CASE("entropy grows under convolution")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Pmf const f = instances::random_base(seed, false);
        Pmf const g = instances::random_base(seed + 1000, false);
        DivergenceValue const hf = entropy(f);
        DivergenceValue const hg = entropy(g);
        DivergenceValue const hs = entropy(convolve(f, g));
        double const err = hf.error_bound + hg.error_bound + hs.error_bound;
        CHECK(hs.value >= std::max(hf.value, hg.value) - err);
    }
}
