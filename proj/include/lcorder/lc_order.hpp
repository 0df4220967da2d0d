#pragma once

#include "lcorder/pmf.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lcorder {

/// Relative slack on second differences: Delta^2 may exceed zero by
/// kLcTolerance * (1 + |log f_i| + |log g_i|).
inline constexpr double kLcTolerance = 1e-9;
/// An interior weight below this fraction of both flanking maxima is a hole.
inline constexpr double kZeroTolerance = 1e-14;

enum class LcFailure {
    none,
    f_support_not_interval,
    g_support_not_interval,
    support_not_contained,
    concavity_violated,
};

std::string_view to_string(LcFailure failure);

struct LcReport
{
    bool verdict = true;
    LcFailure failure_kind = LcFailure::none;
    std::optional<std::int64_t> witness_index;
    /// Worst second difference observed on the checked range.
    double margin = 0.0;
    /// False when either side is truncated: the check covered only the
    /// stored, exact part of an infinite support.
    bool exact = true;
};

struct SignProfile
{
    /// Run signs (-1 / +1) after discarding zeros and merging repeats.
    std::vector<int> signs;
    int change_count = 0;
};

bool is_interval_support(Pmf const& f, double zero_tol = kZeroTolerance);

/// f <=_lc g: both supports are intervals, supp f is inside supp g, and
/// log(f_i / g_i) is concave on supp f.
LcReport lc_le(Pmf const& f, Pmf const& g, double tol = kLcTolerance);

LcReport is_log_concave(Pmf const& f, double tol = kLcTolerance);

/// f_i / C(k, i) log-concave; independent of the binomial p.
LcReport is_ulc_order_k(Pmf const& f, std::int64_t k, double tol = kLcTolerance);

/// i! f_i log-concave; independent of the Poisson mean.
LcReport is_ulc(Pmf const& f, double tol = kLcTolerance);

SignProfile sign_profile(std::span<const double> a, double zero_tol = 0.0);

} // namespace lcorder
