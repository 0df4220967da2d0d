#include "lcorder/divergence.hpp"
#include "lcorder/inequalities.hpp"
#include "lcorder/instances.hpp"
#include "lcorder/pmf.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lcorder;

namespace {

double log_choose(double n, double k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// KL by direct summation of explicit weight vectors starting at 0.
double direct_kl(std::vector<double> const& f, std::vector<double> const& g)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] > 0.0) {
            s += f[i] * std::log(f[i] / g[i]);
        }
    }
    return s;
}

std::vector<double> binomial_weights(int n, double p, std::size_t len)
{
    std::vector<double> w(len, 0.0);
    for (int i = 0; i <= n && static_cast<std::size_t>(i) < len; ++i) {
        w[static_cast<std::size_t>(i)] = std::exp(log_choose(n, i) + i * std::log(p) + (n - i) * std::log1p(-p));
    }
    return w;
}

} // namespace

TEST_CASE("triangle inequality")
{
    Pmf const f = realize(FamilySpec::binomial(4, 0.3));
    Verdict const same = check_triangle(f, f, f);
    CHECK(same.status == Status::holds);
    CHECK(std::abs(same.margin) <= 1e-15);

    // f^S for ps = (.2, .4) is (.48, .44, .08)
    std::vector<double> const fs{0.48, 0.44, 0.08};
    auto const g = binomial_weights(2, 0.3, 3);
    auto const h = binomial_weights(3, 0.3, 4);
    double const lhs = direct_kl({0.48, 0.44, 0.08, 0.0}, h);
    double const rhs = direct_kl(fs, g) + direct_kl({g[0], g[1], g[2], 0.0}, h);
    Verdict const v = check_triangle(bernoulli_sum(std::vector{0.2, 0.4}), realize(FamilySpec::binomial(2, 0.3)),
                                     realize(FamilySpec::binomial(3, 0.3)));
    CHECK(v.status == Status::holds);
    CHECK(v.lhs.value == doctest::Approx(lhs).epsilon(1e-13));
    CHECK(v.rhs.value == doctest::Approx(rhs).epsilon(1e-13));
    CHECK(lhs >= rhs);

    Verdict const off = check_triangle(realize(FamilySpec::binomial(2, 0.2)), realize(FamilySpec::binomial(2, 0.3)),
                                       realize(FamilySpec::binomial(2, 0.4)));
    CHECK(off.status == Status::inconclusive);
}

TEST_CASE("triangle margin identity and quadrangle specialization")
{
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto const side = seed % 2 == 0 ? instances::MeanSide::left : instances::MeanSide::right;
        auto const c = instances::random_chain(seed, 3, side);
        auto const& l = c.links;
        Verdict const t = check_triangle(l[0], l[1], l[2]);
        CHECK(t.status == Status::holds);
        double const id = kl(l[0], l[2]).value - kl(l[0], l[1]).value - kl(l[1], l[2]).value;
        CHECK(std::abs(id - triangle_cross_term(l[0], l[1], l[2])) <= 1e-10);
        Verdict const q = check_quadrangle(l[0], l[1], l[1], l[2]);
        CHECK(q.status == Status::holds);
        CHECK(std::abs(q.margin - t.margin) <= 1e-12);
    }
    Pmf const f = realize(FamilySpec::poisson(2.0));
    CHECK(std::abs(check_quadrangle(f, f, f, f).margin) <= 1e-15);
}

TEST_CASE("concave dominance")
{
    std::vector<double> const ps{0.1, 0.5, 0.7, 0.2};
    Pmf const f = bernoulli_sum(ps);
    Pmf const g = realize(FamilySpec::binomial(4, 0.375));
    std::vector<double> linear;
    std::vector<double> quad;
    std::vector<double> cap;
    for (int i = 0; i <= 4; ++i) {
        linear.push_back(2.0 * i - 1.0);
        quad.push_back(-(i - 1.5) * (i - 1.5));
        cap.push_back(std::min(i, 2));
    }
    CHECK(std::abs(check_concave_dominance(f, g, linear).margin) <= 1e-14);
    Verdict const v = check_concave_dominance(f, g, quad);
    CHECK(v.status == Status::holds);
    // Var S = sum p(1-p) = .71 against 4 * .375 * .625 = .9375
    CHECK(v.margin == doctest::Approx(0.9375 - 0.71).epsilon(1e-12));
    CHECK(check_concave_dominance(f, g, cap).status == Status::holds);
    std::vector<double> convex{0.0, 1.0, 4.0, 9.0, 16.0};
    CHECK_THROWS_AS(check_concave_dominance(f, g, convex), DomainError);
}

TEST_CASE("Karlin partial sums")
{
    CHECK(karlin_partial_sums(std::vector{0.0, 0.0, 0.0}).status == Status::holds);
    Pmf const f = realize(FamilySpec::binomial(2, 0.5));
    Pmf const g = realize(FamilySpec::poisson(1.0));
    KarlinReport const r = karlin_partial_sums(difference_sequence(f, g));
    CHECK(r.status == Status::holds);
    CHECK(r.terms.signs == std::vector{-1, 1, -1});
    CHECK(r.partial_sums.signs == std::vector{-1, 1});
    CHECK(r.max_double_partial <= 1e-10);
    // (+, -) with zero sum has a nonzero first moment
    CHECK(karlin_partial_sums(std::vector{1.0, -1.0}).status == Status::inconclusive);
}

TEST_CASE("entropy extremes and projections")
{
    CHECK(check_maxent(realize(FamilySpec::binomial(8, 0.4)), 200, 11).status == Status::holds);
    CHECK(check_maxent(realize(FamilySpec::poisson(3.0)), 200, 12).status == Status::holds);
    CHECK(check_minent(realize(FamilySpec::binomial(6, 0.5)), 100, 13).status == Status::holds);
    Verdict const ip =
        check_iprojection(realize(FamilySpec::binomial(4, 0.5)), realize(FamilySpec::poisson(2.0)), 200, 14);
    CHECK(ip.status == Status::holds);
    CHECK(check_maxent(Pmf::from_weights(0, {0.45, 0.1, 0.45}), 10, 1).status == Status::inconclusive);
}

TEST_CASE("best binomial approximation")
{
    std::vector<double> const same(5, 0.3);
    std::array const grid{0.1, 0.5, 0.9};
    ApproximationTable const t0 = best_binomial(same, 12, grid);
    CHECK(t0.argmin_row == 0);
    CHECK(std::abs(t0.rows[0].kl.value) <= 1e-14);

    std::vector<double> const ps{0.1, 0.2, 0.3};
    ApproximationTable const t = best_binomial(ps, 8, grid);
    REQUIRE(t.rows.size() == 6);
    std::vector<double> const fs{0.504, 0.398, 0.092, 0.006};
    for (auto const& row : t.rows) {
        auto const m = static_cast<int>(row.m);
        auto const b = binomial_weights(m, 0.6 / m, 4);
        CHECK(row.kl.value == doctest::Approx(direct_kl(fs, b)).epsilon(1e-12));
    }
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        CHECK(t.rows[k].kl.value >= t.rows[k - 1].kl.value);
    }
    REQUIRE(t.poisson_row);
    std::vector<double> po(4);
    for (int i = 0; i < 4; ++i) {
        po[static_cast<std::size_t>(i)] = std::exp(-0.6 + i * std::log(0.6) - std::lgamma(i + 1.0));
    }
    CHECK(t.poisson_row->value == doctest::Approx(direct_kl(fs, po)).epsilon(1e-12));
    CHECK(t.poisson_row->value > t.rows.back().kl.value);
    for (Verdict const& v : t.checks) {
        CHECK_MESSAGE(v.status == Status::holds, v.check);
    }
}

TEST_CASE("best negative binomial approximation")
{
    std::vector<double> const rs{0.3, 0.6};
    std::vector<double> const m_grid{2.0, 2.5, 3.0, 4.0, 8.0};
    std::array const r_grid{0.2, 0.5, 0.8};
    ApproximationTable const t = best_negbinomial(rs, m_grid, r_grid);
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        CHECK(t.rows[k].kl.value >= t.rows[k - 1].kl.value - t.rows[k].kl.error_bound);
    }
    for (Verdict const& v : t.checks) {
        CHECK_MESSAGE(v.status == Status::holds, v.check);
    }
    std::vector<double> const same{0.4, 0.4, 0.4};
    std::vector<double> const m3{3.0, 4.0};
    ApproximationTable const t0 = best_negbinomial(same, m3, r_grid);
    CHECK(std::abs(t0.rows[0].kl.value) <= t0.rows[0].kl.error_bound + 1e-12);
}

TEST_CASE("monotone limits")
{
    std::vector<double> const m{2, 3, 4, 8, 16};
    for (Verdict const& v : check_monotone_limit(LimitKind::binomial, 1.0, m)) {
        CHECK_MESSAGE(v.status == Status::holds, v.check);
    }
    std::vector<double> const nb{0.5, 1, 2, 4};
    for (Verdict const& v : check_monotone_limit(LimitKind::negbinomial, 1.0, nb)) {
        CHECK_MESSAGE(v.status == Status::holds, v.check);
    }
    auto const d = [](double mm) {
        return kl(realize(FamilySpec::binomial(static_cast<std::int64_t>(mm), 1.0 / mm)),
                  realize(FamilySpec::poisson(1.0)))
            .value;
    };
    CHECK(d(2) > 10.0 * d(64));
    std::vector<double> const bad{1.0, 2.0};
    CHECK_THROWS_AS(check_monotone_limit(LimitKind::binomial, 1.0, bad), DomainError);
}

TEST_CASE("convolution closure")
{
    Pmf const a = realize(FamilySpec::binomial(3, 0.35));
    Pmf const b = realize(FamilySpec::binomial(5, 0.35));
    CHECK(convolve(a, b).approx_equal(realize(FamilySpec::binomial(8, 0.35)), 1e-14));
    for (auto kind : {ClosureKind::liggett, ClosureKind::davenport_polya, ClosureKind::poisson_limit_ulc,
                      ClosureKind::poisson_limit_lcx}) {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Verdict const v = check_convolution_closure(kind, ClosureParams::random(kind, seed), seed);
            CHECK_MESSAGE(v.status == Status::holds, v.check);
        }
    }
}

TEST_CASE("Poisson approximation regimes")
{
    ChoiXiaReport const low = check_choi_xia(std::vector{0.3, 0.4}, 2);
    CHECK_FALSE(low.condition);
    CHECK(low.status == Status::inconclusive);

    std::vector<double> const ps(12, 0.5);
    ChoiXiaReport const r = check_choi_xia(ps, 12);
    CHECK(r.condition);
    CHECK(r.m_threshold == 12.0);
    CHECK(r.status == Status::holds);
    CHECK(r.d_m.value < r.d_m1.value);
    CHECK(r.d_m1.value < r.v_poisson.value);
    CHECK(r.d_m.error_bound <= 1e-10);
    double prev = -1.0;
    for (std::int64_t m = 12; m <= 16; ++m) {
        double const d =
            total_variation(bernoulli_sum(ps), realize(FamilySpec::binomial(m, 6.0 / static_cast<double>(m)))).value;
        CHECK(d >= prev - 1e-15);
        prev = d;
    }
}

TEST_CASE("scenario bundles")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto const ps = instances::random_probabilities(seed, 1 + seed % 8, 0.05, 0.95);
        for (Verdict const& v : scenario_bernoulli(ps)) {
            CHECK_MESSAGE(v.status == Status::holds, v.check);
        }
        auto const rs = instances::random_probabilities(seed, 1 + seed % 4, 0.2, 0.9);
        for (Verdict const& v : scenario_geometric(rs)) {
            CHECK_MESSAGE(v.status == Status::holds, v.check);
        }
    }
}

TEST_CASE("open problem fuzzing")
{
    CHECK(fuzz_open_problem(300, 5, FuzzMode::reflexive).counterexamples.empty());
    CHECK(fuzz_open_problem(300, 5, FuzzMode::liggett).counterexamples.empty());
    FuzzOutcome const out = fuzz_open_problem(300, 5, FuzzMode::unconstrained);
    CHECK(out.tried == 300);
    for (auto const& inst : out.counterexamples) {
        CHECK_FALSE(replay_open_problem(inst).verdict);
    }
}
