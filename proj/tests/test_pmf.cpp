#include "lcorder/divergence.hpp"
#include "lcorder/lc_order.hpp"
#include "lcorder/pmf.hpp"
#include "lcorder/random.hpp"
#include "lcorder/serialize.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lcorder;

namespace {

// P(S = k) by summing over all 2^n outcome vectors.
std::vector<double> enumerate_bernoulli(std::vector<double> const& ps)
{
    std::size_t const n = ps.size();
    std::vector<double> out(n + 1, 0.0);
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        double prob = 1.0;
        int k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1ULL) {
                prob *= ps[i];
                ++k;
            } else {
                prob *= 1.0 - ps[i];
            }
        }
        out[static_cast<std::size_t>(k)] += prob;
    }
    return out;
}

double nb_pmf(double n, double r, int i)
{
    return std::exp(std::lgamma(n + i) - std::lgamma(n) - std::lgamma(i + 1.0) + n * std::log(r) +
                    i * std::log1p(-r));
}

double max_gap(Pmf const& f, std::vector<double> const& w, std::int64_t offset = 0)
{
    double gap = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        gap = std::max(gap, std::abs(f.at(offset + static_cast<std::int64_t>(i)) - w[i]));
    }
    for (std::int64_t i = f.first(); i <= f.last(); ++i) {
        if (i < offset || i >= offset + static_cast<std::int64_t>(w.size())) {
            gap = std::max(gap, f.at(i));
        }
    }
    return gap;
}

} // namespace

TEST_CASE("mean of standard families")
{
    CHECK(mean(realize(FamilySpec::binomial(4, 0.25))).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mean(Pmf::point_mass(3)).value == 3.0);
    MeanValue const m = mean(realize(FamilySpec::poisson(2.5)));
    CHECK(std::abs(m.value - 2.5) <= m.error_bound + 1e-13);
    CHECK(m.error_bound < 1e-9);
}

TEST_CASE("convolution identities")
{
    Pmf const f = realize(FamilySpec::binomial(5, 0.3));
    CHECK(convolve(Pmf::point_mass(0), f).approx_equal(f));
    Pmf const b = realize(FamilySpec::bernoulli(0.5));
    CHECK(convolve(b, b).approx_equal(realize(FamilySpec::binomial(2, 0.5))));
}

TEST_CASE("negative binomial convolution against the closed form")
{
    Pmf const s = convolve(realize(FamilySpec::negbinomial(1.5, 0.4)), realize(FamilySpec::negbinomial(0.7, 0.4)));
    for (std::int64_t i = 0; i <= s.exact_last(); ++i) {
        CHECK(std::abs(s.at(i) - nb_pmf(2.2, 0.4, static_cast<int>(i))) <= 1e-10);
    }
    CHECK(s.exact_last() >= 20);
}

TEST_CASE("convolution is commutative and associative on exact inputs")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Pmf const a = realize(FamilySpec::binomial(rng.integer(1, 8), rng.uniform(0.1, 0.9)));
        std::vector<double> ps{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        Pmf const b = bernoulli_sum(ps);
        Pmf const c = realize(FamilySpec::binomial(rng.integer(1, 5), rng.uniform(0.1, 0.9)));
        CHECK(convolve(a, b).approx_equal(convolve(b, a), 1e-12));
        CHECK(convolve(convolve(a, b), c).approx_equal(convolve(a, convolve(b, c)), 1e-12));
        MeanValue const m = mean(convolve(a, b));
        CHECK(std::abs(m.value - mean(a).value - mean(b).value) <= 1e-12);
    }
}

TEST_CASE("bernoulli_sum matches outcome enumeration")
{
    CHECK(max_gap(bernoulli_sum(std::vector{0.5, 0.5}), {0.25, 0.5, 0.25}) <= 1e-15);
    std::vector<double> const ps{0.1, 0.2, 0.3};
    CHECK(max_gap(bernoulli_sum(ps), enumerate_bernoulli(ps)) <= 1e-15);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        std::vector<double> q(static_cast<std::size_t>(rng.integer(1, 12)));
        for (double& p : q) {
            p = rng.uniform(0.01, 0.99);
        }
        Pmf const f = bernoulli_sum(q);
        CHECK(f.tail_bound() == 0.0);
        CHECK(max_gap(f, enumerate_bernoulli(q)) <= 1e-12);
    }
    std::vector<double> const same(7, 0.35);
    CHECK(bernoulli_sum(same).approx_equal(realize(FamilySpec::binomial(7, 0.35)), 1e-12));
    CHECK_THROWS_AS(bernoulli_sum(std::vector<double>{}), DomainError);
}

TEST_CASE("geometric sums")
{
    double const r = 0.45;
    Pmf const one = geometric_sum(std::vector{r});
    Pmf const ge = realize(FamilySpec::geometric(r));
    for (std::int64_t i = 0; i <= std::min(one.exact_last(), ge.exact_last()); ++i) {
        CHECK(std::abs(one.at(i) - ge.at(i)) <= 1e-15);
    }
    Pmf const two = geometric_sum(std::vector{r, r});
    for (std::int64_t i = 0; i <= two.exact_last(); ++i) {
        CHECK(std::abs(two.at(i) - nb_pmf(2.0, r, static_cast<int>(i))) <= 1e-10 + two.tail_bound());
    }
    // distinct rates: r1 r2 (q1^{k+1} - q2^{k+1}) / (q1 - q2)
    Pmf const mixed = geometric_sum(std::vector{0.3, 0.6});
    double const q1 = 0.7;
    double const q2 = 0.4;
    for (std::int64_t k = 0; k <= mixed.exact_last(); ++k) {
        double const kk = static_cast<double>(k) + 1.0;
        double const oracle = 0.3 * 0.6 * (std::pow(q1, kk) - std::pow(q2, kk)) / (q1 - q2);
        CHECK(std::abs(mixed.at(k) - oracle) <= 1e-12);
    }
    CHECK(mixed.tail_bound() <= 1e-12);
    Pmf const nb3 = realize(FamilySpec::negbinomial(3.0, 0.5));
    Pmf const g3 = geometric_sum(std::vector{0.5, 0.5, 0.5});
    for (std::int64_t i = 0; i <= std::min(nb3.exact_last(), g3.exact_last()); ++i) {
        CHECK(std::abs(nb3.at(i) - g3.at(i)) <= 1e-10 + nb3.tail_bound() + g3.tail_bound());
    }
    CHECK_THROWS_AS(geometric_sum(std::vector<double>{}), DomainError);
}

TEST_CASE("exponential tilts")
{
    Pmf const f = realize(FamilySpec::binomial(6, 0.3));
    auto const [same, s0] = tilt_to_mean(f, mean(f).value);
    CHECK(std::abs(s0.theta) <= 1e-12);
    CHECK(same.approx_equal(f, 1e-12));

    auto const [b, sb] = tilt_to_mean(realize(FamilySpec::binomial(2, 0.5)), 1.2);
    CHECK(b.approx_equal(realize(FamilySpec::binomial(2, 0.6)), 1e-12));
    CHECK(std::abs(mean(b).value - 1.2) <= 1e-10);

    // the tilt acts on the stored weights: a Poisson(2) cut at the same last index
    Pmf const po1 = realize(FamilySpec::poisson(1.0));
    double cut = 0.0;
    double moment = 0.0;
    for (std::int64_t i = 0; i <= po1.last(); ++i) {
        double const w = std::exp(-2.0 + i * std::log(2.0) - std::lgamma(i + 1.0));
        cut += w;
        moment += i * w;
    }
    auto const [p, sp] = tilt_to_mean(po1, moment / cut);
    CHECK(std::abs(sp.theta - std::log(2.0)) <= 1e-12);
    for (std::int64_t i = 0; i <= po1.last(); ++i) {
        double const exact = std::exp(-2.0 + i * std::log(2.0) - std::lgamma(i + 1.0)) / cut;
        CHECK(std::abs(p.at(i) - exact) <= 1e-12);
    }
    CHECK_THROWS_AS(tilt_to_mean(f, 7.0), DomainError);
}

TEST_CASE("random minorants lie below and keep the mean")
{
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Pmf const g = seed % 2 == 0 ? realize(FamilySpec::binomial(10, 0.35)) : realize(FamilySpec::poisson(3.0));
        Pmf const f = random_lc_minorant(g, seed);
        CHECK(lc_le(f, g).verdict);
        CHECK(std::abs(mean(f).value - mean(g).value) <= 1e-10);
        CHECK(std::abs(f.total_mass() - 1.0) <= f.tail_bound() + 1e-12);
    }
    Pmf const pt = Pmf::point_mass(4);
    CHECK(random_lc_minorant(pt, 3).approx_equal(pt));
}

TEST_CASE("pmf serialization round trip")
{
    Pmf const f = realize(FamilySpec::poisson(4.0));
    Pmf const back = pmf_from_json(to_json(f));
    CHECK(back.approx_equal(f, 1e-15));
    CHECK(back.tail_bound() == f.tail_bound());
    Pmf const e = pmf_from_json(nlohmann::json::parse(R"({"kind":"explicit","offset":2,"weights":[0.25,0.75]})"));
    CHECK(e.first() == 2);
    CHECK(e.at(3) == 0.75);
    CHECK_THROWS_AS(pmf_from_json(nlohmann::json::parse(R"({"kind":"binomial","n":2})")), InputError);
    CHECK_THROWS_AS(pmf_from_json(nlohmann::json::parse(R"({"kind":"zeta"})")), InputError);
}
