#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcorder {

/// Raised for parameters outside a documented domain.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

inline constexpr double kDefaultTruncation = 1e-12;
inline constexpr double kNormalizationSlack = 1e-12;
inline constexpr double kMeanTolerance = 1e-10;

enum class FamilyKind { bernoulli, binomial, poisson, geometric, negbinomial };

/// A standard family instance. Probabilities live in (0,1); the binomial
/// trial count is a positive integer; the negative binomial shape may be any
/// positive real.
struct FamilySpec
{
    FamilyKind kind = FamilyKind::bernoulli;
    double n = 1.0;      // binomial trials / negative binomial shape
    double p = 0.5;      // success probability (geometric, negbinomial: r)
    double lambda = 0.0; // poisson mean

    static FamilySpec bernoulli(double p);
    static FamilySpec binomial(std::int64_t n, double p);
    static FamilySpec poisson(double lambda);
    static FamilySpec geometric(double p);
    static FamilySpec negbinomial(double n, double r);

    void validate() const;
    [[nodiscard]] bool finite_support() const;
    [[nodiscard]] double mean() const;
    /// log f_0.
    [[nodiscard]] double log_first() const;
    /// log(f_{i+1} / f_i); -inf past the end of a finite support.
    [[nodiscard]] double log_ratio(std::int64_t i) const;
    /// Upper bound on sup_{j > i} f_{j+1}/f_j, used for geometric tail bounds.
    [[nodiscard]] double ratio_bound_after(std::int64_t i) const;
    [[nodiscard]] std::string describe() const;

    friend bool operator==(FamilySpec const&, FamilySpec const&) = default;
};

/// Probability mass function on Z+ stored over a trimmed index window.
///
/// Log weights are authoritative: a weight may underflow to 0 in double
/// while its log stays finite, and it still belongs to the support.
///
/// Weights are the true probabilities at their indices (never renormalised
/// after truncation), so the stored total is 1 minus the discarded mass and
/// `tail_bound` bounds that deficit. For infinite families the support
/// continues past `last()`; `exact_last()` is the last index whose stored
/// weight is the true value (weights above it are lower bounds).
class Pmf
{
public:
    /// Point mass at 0.
    Pmf();

    static Pmf from_weights(std::int64_t offset, std::vector<double> weights, double tail_bound = 0.0,
                            bool infinite_support = false, std::string label = {});
    static Pmf from_log_weights(std::int64_t offset, std::vector<double> const& log_weights,
                                double tail_bound = 0.0, bool infinite_support = false,
                                std::string label = {});
    /// Scales arbitrary non-negative weights to unit mass.
    static Pmf normalized(std::int64_t offset, std::vector<double> weights, std::string label = {});
    /// Same, from log weights (robust when some weights underflow).
    static Pmf normalized_log(std::int64_t offset, std::vector<double> log_weights, std::string label = {});
    static Pmf point_mass(std::int64_t at);

    [[nodiscard]] std::int64_t offset() const { return offset_; }
    [[nodiscard]] std::int64_t first() const { return offset_; }
    [[nodiscard]] std::int64_t last() const { return offset_ + static_cast<std::int64_t>(weights_.size()) - 1; }
    [[nodiscard]] std::int64_t exact_last() const { return exact_last_; }
    [[nodiscard]] std::size_t size() const { return weights_.size(); }
    [[nodiscard]] std::span<const double> weights() const { return weights_; }
    [[nodiscard]] std::span<const double> log_weights() const { return log_weights_; }
    [[nodiscard]] double tail_bound() const { return tail_bound_; }
    [[nodiscard]] bool infinite_support() const { return infinite_support_; }
    [[nodiscard]] std::string const& label() const { return label_; }
    [[nodiscard]] std::optional<FamilySpec> const& family() const { return family_; }

    /// f_i, zero outside the stored window.
    [[nodiscard]] double at(std::int64_t i) const;
    /// log f_i, -inf outside the stored window.
    [[nodiscard]] double log_at(std::int64_t i) const;
    [[nodiscard]] double total_mass() const;
    [[nodiscard]] bool exact() const { return tail_bound_ == 0.0 && !infinite_support_; }

    [[nodiscard]] Pmf with_label(std::string label) const;

    /// Equality up to trimming, 1e-12 pointwise.
    [[nodiscard]] bool approx_equal(Pmf const& other, double tol = 1e-12) const;

private:
    friend Pmf realize(FamilySpec const&, double);
    friend Pmf extend(Pmf const&, std::int64_t);
    friend Pmf convolve(Pmf const&, Pmf const&);
    friend Pmf mixture(std::span<const Pmf>, std::span<const double>);

    void check_invariants() const;

    std::int64_t offset_ = 0;
    std::vector<double> weights_{1.0};
    std::vector<double> log_weights_{0.0};
    double tail_bound_ = 0.0;
    bool infinite_support_ = false;
    std::int64_t exact_last_ = 0;
    std::string label_;
    std::optional<FamilySpec> family_;
};

struct MeanValue
{
    double value = 0.0;
    double error_bound = 0.0;
    std::optional<double> exact;
};

struct TiltSolve
{
    double theta = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

struct MinorantOptions
{
    bool full_support = false;
    /// Probability of returning the unperturbed input (c == 0 on the full support).
    double identity_probability = 0.05;
    /// Upper bound on |second difference| of the random concave perturbation.
    double curvature_max = 0.5;
    /// Mean of the result; defaults to the mean of the input.
    std::optional<double> target_mean;
};

/// Exact pmf for finite families; for infinite families the window ends at
/// the first index whose upper tail mass is certified <= eps_trunc.
Pmf realize(FamilySpec const& spec, double eps_trunc = kDefaultTruncation);

/// Continues a realised infinite family out to `new_last`. Other pmfs are
/// returned unchanged.
Pmf extend(Pmf const& f, std::int64_t new_last);

MeanValue mean(Pmf const& f);

Pmf convolve(Pmf const& f, Pmf const& g);

/// Poisson-binomial pmf of a sum of independent Bernoulli(p_i).
Pmf bernoulli_sum(std::span<const double> ps);

/// Pmf of a sum of independent Ge(r_i), each truncated at eps_trunc / n.
Pmf geometric_sum(std::span<const double> rs, double eps_trunc = kDefaultTruncation);

/// Exponential tilt f_i e^{theta i} normalised to mean mu.
std::pair<Pmf, TiltSolve> tilt_to_mean(Pmf const& f, double mu);

/// Random f with f <=_lc g built as g_i e^{c_i} on a random subinterval with
/// c concave, then tilted to the requested mean. Deterministic in the seed.
Pmf random_lc_minorant(Pmf const& g, std::uint64_t rng_seed, MinorantOptions const& options = {});

/// Finite mixture of pmfs; the result is exact wherever every component is.
Pmf mixture(std::span<const Pmf> components, std::span<const double> mixing_weights);

} // namespace lcorder
