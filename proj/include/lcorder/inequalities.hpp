#pragma once

#include "lcorder/divergence.hpp"
#include "lcorder/lc_order.hpp"
#include "lcorder/pmf.hpp"
#include "lcorder/verdict.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lcorder {

struct CheckTolerances
{
    /// Means closer than this count as equal.
    double mean = kMeanTolerance;
    double lc = kLcTolerance;
    double eps_trunc = kDefaultTruncation;
};

// ---------------------------------------------------------------------------
// Triangle and quadrangle inequalities

/// f <=_lc g <=_lc h. E(f) = E(g) checks D(f|h) >= D(f|g) + D(g|h);
/// E(g) = E(h) checks D(h|f) >= D(h|g) + D(g|f); both checks the worse.
Verdict check_triangle(Pmf const& f, Pmf const& g, Pmf const& h, CheckTolerances const& tol = {});

/// f <=_lc g <=_lc g2 <=_lc h. E(f) = E(g) checks
/// D(f|h) + D(g|g2) >= D(f|g2) + D(g|h); E(g2) = E(h) checks
/// D(h|f) + D(g2|g) >= D(g2|f) + D(h|g).
Verdict check_quadrangle(Pmf const& f, Pmf const& g, Pmf const& g2, Pmf const& h,
                         CheckTolerances const& tol = {});

/// sum_i (f_i - g_i) log(g_i / h_i) over supp g; equals
/// D(f|h) - D(f|g) - D(g|h) exactly.
double triangle_cross_term(Pmf const& f, Pmf const& g, Pmf const& h);

// ---------------------------------------------------------------------------
// Concave dominance and the Karlin partial sums

/// sum f_i w_i >= sum g_i w_i for f <=_lc g with equal means and concave w.
/// `w` is tabulated from index 0 and must cover both supports; a table
/// with a positive second difference is a DomainError.
Verdict check_concave_dominance(Pmf const& f, Pmf const& g, std::span<const double> w,
                                CheckTolerances const& tol = {});

struct KarlinReport
{
    Status status = Status::holds;
    double sum = 0.0;
    double first_moment = 0.0;
    SignProfile terms;
    SignProfile partial_sums;
    /// max_j sum_{i <= j} A_i.
    double max_double_partial = 0.0;
    bool terms_ok = true;    ///< signs -, +, - (or a sub-pattern)
    bool partial_ok = true;  ///< signs -, + (or a sub-pattern)
    bool double_ok = true;   ///< all double partial sums <= tol
    std::string reason;
};

/// For a with zero sum and first moment whose positive set is an interval:
/// the terms change sign as -, +, -; the partial sums A_j as -, +; and the
/// double partial sums never exceed 0 (up to `tol`).
KarlinReport karlin_partial_sums(std::span<const double> a, double tol = 1e-10);

/// f - g over the union of supports, with the small terms computed as
/// g_i expm1(log f_i - log g_i) to avoid cancellation.
std::vector<double> difference_sequence(Pmf const& f, Pmf const& g);

// ---------------------------------------------------------------------------
// Entropy extremes and projections

/// H(f) <= H(g) for random f <=_lc g with E(f) = E(g); near-equality must
/// come with TV(f, g) <= 1e-6.
Verdict check_maxent(Pmf const& g, int n_samples, std::uint64_t rng_seed, CheckTolerances const& tol = {});

/// H(g) >= H(f) for random log-concave majorants g of a finite
/// log-concave f with the same mean.
Verdict check_minent(Pmf const& f, int n_samples, std::uint64_t rng_seed, CheckTolerances const& tol = {});

/// D(f|h) >= D(g|h) + D(f|g) for random f <=_lc g with E(f) = E(g).
Verdict check_iprojection(Pmf const& g, Pmf const& h, int n_samples, std::uint64_t rng_seed,
                          CheckTolerances const& tol = {});

// ---------------------------------------------------------------------------
// Approximation tables

struct ApproximationRow
{
    double m = 0.0;
    double p = 0.0;
    DivergenceValue kl;
};

struct ApproximationTable
{
    std::string family; ///< "binomial" or "negbinomial"
    double mean = 0.0;
    std::vector<ApproximationRow> rows;
    std::size_t argmin_row = 0;
    std::optional<DivergenceValue> poisson_row;
    std::vector<Verdict> checks;
};

/// D(f^S | bi(m, lambda/m)) for m = n..m_max and D(f^S | po(lambda)), with
/// three-term checks against bi(m', p') for m' >= m and p' in p_grid.
ApproximationTable best_binomial(std::span<const double> ps, std::int64_t m_max, std::span<const double> p_grid,
                                 CheckTolerances const& tol = {});

/// D(f^T | nb(m, m/(m+mu))) over m_grid (all >= n), with three-term checks
/// against nb(m', r') for m' >= m and r' in r_grid.
ApproximationTable best_negbinomial(std::span<const double> rs, std::span<const double> m_grid,
                                    std::span<const double> r_grid, CheckTolerances const& tol = {});

enum class LimitKind { binomial, negbinomial };

/// Strict decrease of D(b_m | po(mean)) along m_grid plus the chain
/// D(b_m|po) >= D(b_m|b_m') + D(b_m'|po) for consecutive grid points.
std::vector<Verdict> check_monotone_limit(LimitKind kind, double mean, std::span<const double> m_grid,
                                          CheckTolerances const& tol = {});

// ---------------------------------------------------------------------------
// Convolution closure

enum class ClosureKind { liggett, davenport_polya, poisson_limit_ulc, poisson_limit_lcx };

std::string_view to_string(ClosureKind kind);
ClosureKind closure_kind_from_string(std::string_view name);

struct ClosureParams
{
    std::int64_t k = 3;   ///< binomial trials / nb shape of the first factor
    std::int64_t m = 4;   ///< same for the second factor
    double p = 0.4;       ///< binomial p or nb r
    double lambda = 1.5;  ///< Poisson means for the limiting cases
    double mu = 2.5;

    static ClosureParams random(ClosureKind kind, std::uint64_t seed);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Draws f, g satisfying the hypotheses of the closure statement and checks
/// the conclusion with lc_le.
Verdict check_convolution_closure(ClosureKind kind, ClosureParams const& params, std::uint64_t rng_seed,
                                  CheckTolerances const& tol = {});

// ---------------------------------------------------------------------------
// Poisson approximation

struct ChoiXiaReport
{
    double lambda = 0.0;
    std::int64_t r = 0;
    double delta = 0.0;
    bool condition = false;  ///< r > 1 + (1 + delta)^2
    double m_threshold = 0.0;
    std::int64_t m = 0;
    /// TV to bi(m, lambda/m), bi(m+1, ...), and po(lambda).
    DivergenceValue d_m;
    DivergenceValue d_m1;
    DivergenceValue v_poisson;
    Status status = Status::inconclusive;
    std::string note;
};

ChoiXiaReport check_choi_xia(std::span<const double> ps, std::int64_t m);

// ---------------------------------------------------------------------------
// Scenario bundles

/// Everything stated for a Bernoulli sum: f^S is ULC of order n and of
/// order infinity, the two entropy bounds, the Ehm bound, and the best
/// binomial table.
std::vector<Verdict> scenario_bernoulli(std::span<const double> ps, CheckTolerances const& tol = {});

/// Everything stated for a geometric sum: f^T log-concave, nb_n <=_lc f^T,
/// H(T) >= H(nb_n) and the best negative binomial table.
std::vector<Verdict> scenario_geometric(std::span<const double> rs, CheckTolerances const& tol = {});

// ---------------------------------------------------------------------------
// Open question: does f <=_lc f', g <=_lc g' imply f*g <=_lc f'*g'?

enum class FuzzMode { unconstrained, reflexive, liggett };

struct FuzzOutcome
{
    std::int64_t tried = 0;
    /// Replayable instances: {"f", "f_prime", "g", "g_prime", "report"}.
    std::vector<nlohmann::json> counterexamples;
};

FuzzOutcome fuzz_open_problem(std::int64_t budget, std::uint64_t rng_seed, FuzzMode mode = FuzzMode::unconstrained,
                              CheckTolerances const& tol = {});

/// Re-runs lc_le(f*g, f'*g') on a fuzz instance.
LcReport replay_open_problem(nlohmann::json const& instance);

nlohmann::json to_json(LcReport const& r);
nlohmann::json to_json(KarlinReport const& r);
nlohmann::json to_json(ChoiXiaReport const& r);
nlohmann::json to_json(ApproximationTable const& t);

} // namespace lcorder
