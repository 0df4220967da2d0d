#pragma once

#include "lcorder/pmf.hpp"

#include <span>

namespace lcorder {

/// A divergence or entropy together with a bound on its truncation and
/// rounding error. `finite == false` encodes D(f|g) = +inf.
struct DivergenceValue
{
    double value = 0.0;
    double error_bound = 0.0;
    bool finite = true;

    static DivergenceValue infinite();
};

DivergenceValue operator+(DivergenceValue const& a, DivergenceValue const& b);

/// Shannon entropy with 0 log 0 = 0.
DivergenceValue entropy(Pmf const& f);

/// D(f|g); +inf when f charges an index where g vanishes. Infinite families
/// in the second argument are extended over supp f.
DivergenceValue kl(Pmf const& f, Pmf const& g);

/// Half the l1 distance over the union of the stored windows.
DivergenceValue total_variation(Pmf const& f, Pmf const& g);

/// Ehm's Stein-Chen bound on V(f^S, bi(n, p_bar)) for a Bernoulli sum.
double ehm_bound(std::span<const double> ps);

/// Error term for discarded mass `tail` in a sum of -x log x style terms
/// whose last stored index is `last` and whose log-terms there have size
/// `log_scale`.
double tail_error(double tail, std::int64_t last, double log_scale);

} // namespace lcorder
