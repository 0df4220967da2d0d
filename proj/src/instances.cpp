#include "lcorder/instances.hpp"

#include "lcorder/random.hpp"

#include <algorithm>
#include <cmath>

namespace lcorder::instances {

namespace {

constexpr std::uint64_t kBaseStream = 0xB45E;
constexpr std::uint64_t kLinkStream = 0x11AC;

// Mean target for a minorant of g, away from the ends of its trusted window.
double random_target(Pmf const& g, Rng& rng)
{
    auto const lo = static_cast<double>(g.first());
    auto const hi = static_cast<double>(std::min(g.last(), g.exact_last()));
    double const m = mean(g).value * rng.uniform(0.6, 1.4);
    double const pad = std::min(0.2, 0.25 * (hi - lo));
    return std::clamp(m, lo + pad, hi - pad);
}

Pmf realize_mixture(std::vector<FamilySpec> const& specs, Rng& rng, double eps_trunc, std::string label)
{
    std::vector<Pmf> parts;
    std::vector<double> weights;
    double const each = eps_trunc / static_cast<double>(specs.size());
    for (FamilySpec const& s : specs) {
        parts.push_back(realize(s, each));
        weights.push_back(rng.uniform(0.2, 1.0));
    }
    return mixture(parts, weights).with_label(std::move(label));
}

} // namespace

std::vector<double> random_probabilities(std::uint64_t seed, std::size_t n, double lo, double hi)
{
    Rng rng(seed);
    std::vector<double> ps(n);
    for (double& p : ps) {
        p = rng.uniform(lo, hi);
    }
    return ps;
}

Pmf random_base(std::uint64_t seed, bool finite_only, double eps_trunc)
{
    Rng rng(seed);
    int const kinds = finite_only ? 2 : 5;
    switch (rng.integer(0, kinds - 1)) {
    case 0:
        return realize(FamilySpec::binomial(rng.integer(2, 12), rng.uniform(0.1, 0.9)), eps_trunc);
    case 1: {
        auto const ps = random_probabilities(derive_seed(seed, kBaseStream, 1),
                                             static_cast<std::size_t>(rng.integer(2, 12)), 0.05, 0.95);
        return bernoulli_sum(ps);
    }
    case 2:
        return realize(FamilySpec::poisson(rng.uniform(0.5, 6.0)), eps_trunc);
    case 3:
        return realize(FamilySpec::geometric(rng.uniform(0.3, 0.8)), eps_trunc);
    default:
        return realize(FamilySpec::negbinomial(rng.uniform(0.5, 4.0), rng.uniform(0.3, 0.8)), eps_trunc);
    }
}

Chain random_chain(std::uint64_t seed, int length, MeanSide side, double eps_trunc)
{
    if (length < 2) {
        throw DomainError("a chain needs at least two links");
    }
    Rng rng(seed);
    Chain chain;
    chain.side = side;
    bool const right = side == MeanSide::right;
    Pmf top = random_base(derive_seed(seed, kBaseStream, 0), right, eps_trunc);
    chain.base = top.label();

    auto const n = static_cast<std::size_t>(length);
    chain.links.resize(n);
    chain.links[n - 1] = top;
    for (std::size_t k = n - 1; k-- > 0;) {
        Pmf const& parent = chain.links[k + 1];
        MinorantOptions opts;
        opts.full_support = right;
        bool const same_mean = right ? (k == n - 2) : (k == 0);
        if (!same_mean && parent.size() >= 2) {
            opts.target_mean = random_target(parent, rng);
        }
        chain.links[k] = random_lc_minorant(parent, derive_seed(seed, kLinkStream, k), opts);
    }
    return chain;
}

Pmf random_lc_majorant(Pmf const& f, std::uint64_t seed)
{
    if (!f.exact()) {
        throw DomainError("random_lc_majorant needs a finite, exact pmf");
    }
    if (f.size() < 2) {
        return f;
    }
    Rng rng(seed);
    auto const lf = f.log_weights();
    std::vector<double> logs(lf.begin(), lf.end());
    double const strength = rng.uniform();
    double slope = rng.uniform(-1.0, 1.0);
    double c = 0.0;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        logs[k] += c;
        if (k + 1 < logs.size()) {
            c += slope;
            if (k + 2 < logs.size()) {
                // room for convexity at k+1 without breaking log-concavity of the result
                double const room = -(lf[k] - 2.0 * lf[k + 1] + lf[k + 2]);
                slope += std::max(0.0, room) * strength * rng.uniform();
            }
        }
    }
    Pmf g = Pmf::normalized_log(f.first(), std::move(logs));
    return tilt_to_mean(g, mean(f).value).first.with_label("majorant");
}

Pmf random_nb_mixture(double shape, std::uint64_t seed, double eps_trunc)
{
    Rng rng(seed);
    std::vector<FamilySpec> specs;
    auto const k = rng.integer(1, 3);
    for (std::int64_t j = 0; j < k; ++j) {
        specs.push_back(FamilySpec::negbinomial(shape, rng.uniform(0.25, 0.9)));
    }
    return realize_mixture(specs, rng, eps_trunc, "nb-mixture");
}

Pmf random_poisson_mixture(std::uint64_t seed, double eps_trunc)
{
    Rng rng(seed);
    std::vector<FamilySpec> specs;
    auto const k = rng.integer(1, 3);
    for (std::int64_t j = 0; j < k; ++j) {
        specs.push_back(FamilySpec::poisson(rng.uniform(0.5, 6.0)));
    }
    return realize_mixture(specs, rng, eps_trunc, "poisson-mixture");
}

} // namespace lcorder::instances
