#include "lcorder/continuous.hpp"
#include "lcorder/serialize.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace lcorder;

namespace {

// Closed forms through std::lgamma and a digamma series.
double digamma(double x)
{
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    double const f = 1.0 / (x * x);
    return r + std::log(x) - 0.5 / x -
           f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
}

double gamma_entropy(double a, double b)
{
    return a + std::log(b) + std::lgamma(a) + (1.0 - a) * digamma(a);
}

double gamma_kl(double a1, double b1, double a2, double b2)
{
    return (a1 - a2) * digamma(a1) - std::lgamma(a1) + std::lgamma(a2) + a2 * std::log(b2 / b1) +
           a1 * (b1 - b2) / b2;
}

GridSpec coarse()
{
    GridSpec s;
    s.nodes = 1025;
    s.quadrature_points = 257;
    return s;
}

} // namespace

TEST_CASE("gamma densities")
{
    GridPdf const e = pdf_gamma(1.0, 2.0);
    for (std::size_t j = 0; j < e.nodes.size(); j += 97) {
        double const x = e.nodes[j];
        CHECK(e.density[j] == doctest::Approx(0.5 * std::exp(-x / 2.0)).epsilon(1e-13));
    }
    CHECK(std::exp(pdf_gamma(2.0, 1.0).log_density_at(1.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(pdf_gamma(3.0, 1.0).tail_bound == doctest::Approx(2e-8));
    CHECK_THROWS_AS(pdf_gamma(-1.0, 1.0), DomainError);
}

TEST_CASE("entropy and divergence against closed forms")
{
    for (auto [a, b] : {std::pair{0.5, 1.0}, {1.0, 3.0}, {2.5, 0.4}, {9.0, 1.0}}) {
        DivergenceValue const h = differential_entropy(pdf_gamma(a, b));
        CHECK(std::abs(h.value - gamma_entropy(a, b)) <= 1e-4);
        CHECK(std::abs(h.value - gamma_entropy(a, b)) <= h.error_bound);
    }
    DivergenceValue const d = kl_continuous(pdf_gamma(2.0, 1.0), pdf_gamma(2.0, 2.0));
    CHECK(std::abs(d.value - (2.0 * std::log(2.0) - 1.0)) <= 1e-4);
    CHECK(std::abs(gamma_kl(2.0, 1.0, 2.0, 2.0) - (2.0 * std::log(2.0) - 1.0)) <= 1e-14);
    DivergenceValue const d2 = kl_continuous(pdf_gamma(1.5, 1.0), pdf_gamma(3.0, 0.8));
    CHECK(std::abs(d2.value - gamma_kl(1.5, 1.0, 3.0, 0.8)) <= 1e-4);
    // uniform on (0, 1]
    GridPdf const u = grid_from_log_density(1e-12, 1.0, 4097, [](double) { return 0.0; }, 1e-12, "uniform");
    CHECK(std::abs(differential_entropy(u).value) <= 1e-10);
}

TEST_CASE("sums of scaled gammas")
{
    // exponentials with scales 1 and 2: e^{-x/2} - e^{-x}
    std::vector<double> const ones{1.0, 1.0};
    std::vector<double> const scales{1.0, 2.0};
    GridPdf const s = weighted_gamma_sum(ones, scales);
    for (std::size_t j = 0; j < s.nodes.size(); ++j) {
        double const x = s.nodes[j];
        double const exact = std::exp(-x / 2.0) - std::exp(-x);
        CHECK(std::abs(s.density[j] - exact) <= s.density_error[j] + 1e-12 * exact);
        if (x > 1e-2 && x < 60.0) {
            CHECK(std::abs(s.density[j] - exact) <= 1e-5 * exact);
        }
    }
    // equal scales collapse to one gamma
    std::vector<double> const alphas{1.5, 2.0};
    std::vector<double> const same{0.7, 0.7};
    GridPdf const g = weighted_gamma_sum(alphas, same);
    for (std::size_t j = 0; j < g.nodes.size(); j += 31) {
        double const exact = std::exp(gamma_log_density(g.nodes[j], 3.5, 0.7));
        CHECK(std::abs(g.density[j] - exact) <= g.density_error[j] + 1e-12 * exact);
    }
}

TEST_CASE("halving the grid stays within the error bounds")
{
    std::vector<double> const alphas{1.0, 2.0, 1.5};
    std::vector<double> const betas{0.5, 1.0, 2.0};
    GridSpec const s;
    GridPdf const a = weighted_gamma_sum(alphas, betas, s);
    GridPdf const b = weighted_gamma_sum(alphas, betas, s.refined());
    DivergenceValue const ha = differential_entropy(a);
    DivergenceValue const hb = differential_entropy(b);
    CHECK(std::abs(ha.value - hb.value) <= ha.error_bound + hb.error_bound);
}

TEST_CASE("continuous order")
{
    CHECK(lc_le_continuous(pdf_gamma(3.0, 1.0), pdf_gamma(2.0, 1.0)).verdict);
    CHECK(lc_le_continuous(pdf_gamma(2.0, 1.0), pdf_gamma(2.0, 1.0)).verdict);
    LcReport const r = lc_le_continuous(pdf_gamma(2.0, 1.0), pdf_gamma(3.0, 1.0));
    CHECK_FALSE(r.verdict);
    CHECK(r.failure_kind == LcFailure::concavity_violated);
    // the order ignores scale
    CHECK(lc_le_continuous(pdf_gamma(3.0, 0.5), pdf_gamma(2.0, 4.0)).verdict);
}

TEST_CASE("gamma checks")
{
    std::vector<double> const alphas{1.0, 2.5};
    std::vector<double> const betas{0.6, 1.7};
    CHECK(check_gamma_minentropy(alphas, betas, 3, 1, coarse()).status == Status::holds);
    for (Verdict const& v : check_gamma_triangle(alphas, betas, std::vector{3.5, 4.5, 7.0}, std::vector{0.5, 1.5},
                                                 coarse())) {
        CHECK_MESSAGE(v.status == Status::holds, v.check);
    }
    CHECK(check_gamma_lower_bound(alphas, betas, coarse()).status == Status::holds);
    CHECK(check_gamma_convolution(1.5, 2.0, 3, coarse()).status == Status::holds);
    CHECK(check_gamma_minentropy(std::vector{0.5, 2.0}, betas, 3, 1, coarse()).status == Status::inconclusive);
    CHECK_THROWS_AS(check_gamma_triangle(alphas, betas, std::vector{2.0}, std::vector{1.0}, coarse()), DomainError);
}

TEST_CASE("grid serialization")
{
    GridPdf const f = pdf_gamma(2.0, 1.0, coarse());
    std::ostringstream csv;
    write_grid_csv(csv, f);
    std::istringstream in(csv.str());
    std::string header;
    std::string columns;
    std::getline(in, header);
    std::getline(in, columns);
    REQUIRE(header.rfind("# ", 0) == 0);
    auto const j = nlohmann::json::parse(header.substr(2));
    CHECK(j.at("quadrature") == "simpson-log-u");
    CHECK(j.at("tail_bound").get<double>() == f.tail_bound);
    CHECK(j.at("nodes").get<std::size_t>() == f.nodes.size());
    CHECK(columns == "x,density,density_error");
    GridPdf const g = grid_from_json(nlohmann::json::parse(R"({"kind":"gamma","alpha":2,"beta":1})"), coarse());
    CHECK(g.density == f.density);
}
