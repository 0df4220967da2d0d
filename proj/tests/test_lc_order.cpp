#include "lcorder/instances.hpp"
#include "lcorder/lc_order.hpp"
#include "lcorder/pmf.hpp"
#include "lcorder/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lcorder;

namespace {

// Largest Delta^2 log(f_i / g_i) over the interior of supp f, computed
// directly from the family formulas.
double max_second_difference(std::vector<double> const& log_ratio)
{
    double worst = -INFINITY;
    for (std::size_t i = 1; i + 1 < log_ratio.size(); ++i) {
        worst = std::max(worst, log_ratio[i + 1] - 2.0 * log_ratio[i] + log_ratio[i - 1]);
    }
    return worst;
}

double log_binomial(int n, double p, int i)
{
    return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(p) +
           (n - i) * std::log1p(-p);
}

double log_poisson(double lambda, int i)
{
    return -lambda + i * std::log(lambda) - std::lgamma(i + 1.0);
}

} // namespace

TEST_CASE("interval support")
{
    CHECK(is_interval_support(Pmf::from_weights(0, {0.25, 0.5, 0.25})));
    CHECK_FALSE(is_interval_support(Pmf::from_weights(0, {0.5, 0.0, 0.5})));
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto const ps = instances::random_probabilities(seed, 1 + seed % 12, 0.01, 0.99);
        CHECK(is_interval_support(bernoulli_sum(ps)));
    }
}

TEST_CASE("binomials sit below Poissons and not the other way")
{
    for (int n = 1; n <= 20; ++n) {
        for (double p : {0.05, 0.3, 0.5, 0.8, 0.97}) {
            double const lambda = 0.5 + 0.3 * n;
            std::vector<double> lr;
            for (int i = 0; i <= n; ++i) {
                lr.push_back(log_binomial(n, p, i) - log_poisson(lambda, i));
            }
            // -log C(n,i) + log i! = log (n-i)! - log n!, concave in i
            CHECK(max_second_difference(lr) <= 1e-12);
            Pmf const b = realize(FamilySpec::binomial(n, p));
            Pmf const po = realize(FamilySpec::poisson(lambda));
            CHECK(lc_le(b, po).verdict);
            LcReport const back = lc_le(po, b);
            CHECK_FALSE(back.verdict);
            CHECK(back.failure_kind == LcFailure::support_not_contained);
        }
    }
    // same support: Poisson against the binomial whose ratio is convex
    Pmf const po = Pmf::normalized(0, {1.0, 1.0, 0.5, 1.0 / 6.0});
    LcReport const r = lc_le(po, realize(FamilySpec::binomial(3, 0.4)));
    CHECK_FALSE(r.verdict);
    CHECK(r.failure_kind == LcFailure::concavity_violated);
    CHECK(r.witness_index.has_value());
}

TEST_CASE("reflexive and transitive")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto const chain = instances::random_chain(seed, 3, instances::MeanSide::left);
        auto const& l = chain.links;
        CHECK(lc_le(l[0], l[0]).verdict);
        CHECK(lc_le(l[0], l[1]).verdict);
        CHECK(lc_le(l[1], l[2]).verdict);
        CHECK(lc_le(l[0], l[2]).verdict);
    }
}

TEST_CASE("log-concavity")
{
    CHECK(is_log_concave(realize(FamilySpec::binomial(5, 0.3))).verdict);
    Pmf const holes = Pmf::from_weights(0, {0.5, 0.0, 0.5});
    LcReport const r = is_log_concave(holes);
    CHECK_FALSE(r.verdict);
    CHECK(r.failure_kind == LcFailure::f_support_not_interval);
    LcReport const ge = is_log_concave(realize(FamilySpec::geometric(0.4)));
    CHECK(ge.verdict);
    CHECK(std::abs(ge.margin) <= 1e-12);
}

TEST_CASE("order against a geometric does not depend on p")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Pmf const f = instances::random_base(seed, false);
        bool const first = lc_le(f, realize(FamilySpec::geometric(0.2), 1e-14)).verdict;
        for (double p : {0.35, 0.5, 0.7, 0.9}) {
            CHECK(lc_le(f, realize(FamilySpec::geometric(p), 1e-14)).verdict == first);
        }
    }
}

TEST_CASE("ultra log-concave hierarchy")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto const ps = instances::random_probabilities(seed, 1 + seed % 12, 0.02, 0.98);
        auto const n = static_cast<std::int64_t>(ps.size());
        Pmf const f = bernoulli_sum(ps);
        CHECK(is_ulc_order_k(f, n).verdict);
        CHECK(is_ulc_order_k(f, n + 1).verdict);
        CHECK(is_ulc_order_k(f, n + 5).verdict);
        CHECK(is_ulc(f).verdict);
    }
    LcReport const eq = is_ulc_order_k(realize(FamilySpec::binomial(6, 0.3)), 6);
    CHECK(eq.verdict);
    CHECK(std::abs(eq.margin) <= 1e-12);
    LcReport const small = is_ulc_order_k(realize(FamilySpec::binomial(6, 0.3)), 5);
    CHECK_FALSE(small.verdict);
    CHECK(small.failure_kind == LcFailure::support_not_contained);
    LcReport const po = is_ulc(realize(FamilySpec::poisson(2.0)));
    CHECK(po.verdict);
    CHECK(std::abs(po.margin) <= 1e-12);
    CHECK_FALSE(is_ulc(realize(FamilySpec::geometric(0.5))).verdict);
}

TEST_CASE("sign profiles")
{
    SignProfile const s = sign_profile(std::vector{-1.0, 0.0, 2.0, -1.0});
    CHECK(s.signs == std::vector{-1, 1, -1});
    CHECK(s.change_count == 2);
    SignProfile const z = sign_profile(std::vector{0.0, 0.0});
    CHECK(z.signs.empty());
    CHECK(z.change_count == 0);
}
