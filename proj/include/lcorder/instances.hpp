#pragma once

#include "lcorder/pmf.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Seeded generators for the random instances used by the checks and suites.
// Every generator is a pure function of its seed.

namespace lcorder::instances {

/// Which pair of a chain shares its mean.
enum class MeanSide { left, right };

struct Chain
{
    /// Ordered so that chain[k] <=_lc chain[k+1].
    std::vector<Pmf> links;
    MeanSide side = MeanSide::left;
    std::string base;
};

/// A standard family or Bernoulli sum with support size at most 13. With
/// `finite_only`, only binomials and Bernoulli sums are drawn.
Pmf random_base(std::uint64_t seed, bool finite_only, double eps_trunc = kDefaultTruncation);

/// Chain of `length` pmfs, each a random minorant of the next. With side
/// `left` the first two share a mean; with `right` the last two do and
/// every link has the full support of the top (so reverse divergences are
/// finite).
Chain random_chain(std::uint64_t seed, int length, MeanSide side, double eps_trunc = kDefaultTruncation);

/// Random g with f <=_lc g, g log-concave and E(g) = E(f): f_i e^{c_i} with
/// c convex but no more curved than log f is concave, then tilted back.
/// Requires a finite, log-concave f.
Pmf random_lc_majorant(Pmf const& f, std::uint64_t seed);

/// Mixture of 1-3 negative binomials nb(shape, r_j); nb(shape, r) <=_lc it
/// for every r.
Pmf random_nb_mixture(double shape, std::uint64_t seed, double eps_trunc = kDefaultTruncation);

/// Mixture of 1-3 Poissons; every Poisson is <=_lc it.
Pmf random_poisson_mixture(std::uint64_t seed, double eps_trunc = kDefaultTruncation);

/// Random probabilities in [lo, hi].
std::vector<double> random_probabilities(std::uint64_t seed, std::size_t n, double lo, double hi);

} // namespace lcorder::instances
