#include "lcorder/lc_order.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcorder {

namespace {

// Index of the first interior hole of f, if any.
std::optional<std::int64_t> find_hole(Pmf const& f, double zero_tol)
{
    auto const w = f.log_weights();
    if (w.size() < 3) {
        return std::nullopt;
    }
    double const log_tol = std::log(zero_tol);
    std::vector<double> suffix_max(w.size());
    suffix_max.back() = w.back();
    for (std::size_t k = w.size() - 1; k-- > 0;) {
        suffix_max[k] = std::max(w[k], suffix_max[k + 1]);
    }
    double prefix_max = w.front();
    for (std::size_t k = 1; k + 1 < w.size(); ++k) {
        double const floor = log_tol + std::min(prefix_max, suffix_max[k + 1]);
        if (std::isinf(w[k]) || w[k] < floor) {
            return f.first() + static_cast<std::int64_t>(k);
        }
        prefix_max = std::max(prefix_max, w[k]);
    }
    return std::nullopt;
}

// Scans i in (lo, hi) for second differences above tolerance. `second_diff`
// returns {Delta^2 L(i), magnitude scale at i}.
template <typename SecondDiff>
void scan_concavity(LcReport& report, std::int64_t lo, std::int64_t hi, double tol, SecondDiff&& second_diff)
{
    double worst_excess = 0.0;
    report.margin = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = lo + 1; i < hi; ++i) {
        auto const [d2, scale] = second_diff(i);
        report.margin = std::max(report.margin, d2);
        double const excess = d2 - tol * scale;
        if (excess > 0.0 && excess > worst_excess) {
            worst_excess = excess;
            report.verdict = false;
            report.failure_kind = LcFailure::concavity_violated;
            report.witness_index = i;
        }
    }
    if (hi - lo < 2) {
        report.margin = 0.0;
    }
}

LcReport failure(LcFailure kind, std::int64_t witness)
{
    LcReport r;
    r.verdict = false;
    r.failure_kind = kind;
    r.witness_index = witness;
    return r;
}

std::int64_t trusted_last(Pmf const& f)
{
    return std::min(f.last(), f.exact_last());
}

double log_factorial(std::int64_t i)
{
    return boost::math::lgamma(static_cast<double>(i) + 1.0);
}

} // namespace

std::string_view to_string(LcFailure failure)
{
    switch (failure) {
    case LcFailure::none:
        return "none";
    case LcFailure::f_support_not_interval:
        return "f_support_not_interval";
    case LcFailure::g_support_not_interval:
        return "g_support_not_interval";
    case LcFailure::support_not_contained:
        return "support_not_contained";
    case LcFailure::concavity_violated:
        return "concavity_violated";
    }
    return "unknown";
}

bool is_interval_support(Pmf const& f, double zero_tol)
{
    return !find_hole(f, zero_tol).has_value();
}

LcReport lc_le(Pmf const& f, Pmf const& g_in, double tol)
{
    if (auto hole = find_hole(f, kZeroTolerance)) {
        return failure(LcFailure::f_support_not_interval, *hole);
    }
    if (auto hole = find_hole(g_in, kZeroTolerance)) {
        return failure(LcFailure::g_support_not_interval, *hole);
    }
    Pmf const g = extend(g_in, f.last());
    if (f.first() < g.first()) {
        return failure(LcFailure::support_not_contained, f.first());
    }
    if (f.last() > g.last() && !g.infinite_support()) {
        return failure(LcFailure::support_not_contained, g.last() + 1);
    }

    LcReport report;
    report.exact = f.tail_bound() == 0.0 && g.tail_bound() == 0.0;
    std::int64_t const hi = std::min({trusted_last(f), trusted_last(g)});
    scan_concavity(report, f.first(), hi, tol, [&](std::int64_t i) {
        double const lf0 = f.log_at(i - 1);
        double const lf1 = f.log_at(i);
        double const lf2 = f.log_at(i + 1);
        double const lg0 = g.log_at(i - 1);
        double const lg1 = g.log_at(i);
        double const lg2 = g.log_at(i + 1);
        double const d2 = (lf0 - 2.0 * lf1 + lf2) - (lg0 - 2.0 * lg1 + lg2);
        return std::pair{d2, 1.0 + std::abs(lf1) + std::abs(lg1)};
    });
    return report;
}

LcReport is_log_concave(Pmf const& f, double tol)
{
    if (auto hole = find_hole(f, kZeroTolerance)) {
        return failure(LcFailure::f_support_not_interval, *hole);
    }
    LcReport report;
    report.exact = f.tail_bound() == 0.0;
    scan_concavity(report, f.first(), trusted_last(f), tol, [&](std::int64_t i) {
        double const l1 = f.log_at(i);
        return std::pair{f.log_at(i - 1) - 2.0 * l1 + f.log_at(i + 1), 1.0 + std::abs(l1)};
    });
    return report;
}

LcReport is_ulc_order_k(Pmf const& f, std::int64_t k, double tol)
{
    if (k < f.last() || f.infinite_support()) {
        return failure(LcFailure::support_not_contained, f.last());
    }
    if (auto hole = find_hole(f, kZeroTolerance)) {
        return failure(LcFailure::f_support_not_interval, *hole);
    }
    LcReport report;
    report.exact = f.tail_bound() == 0.0;
    double const log_k_fact = log_factorial(k);
    scan_concavity(report, f.first(), trusted_last(f), tol, [&](std::int64_t i) {
        auto const x = static_cast<double>(i);
        auto const kk = static_cast<double>(k);
        // Delta^2 of -log C(k, i) in closed form.
        double const d2_binom = std::log((x + 1.0) / x) + std::log((kk - x + 1.0) / (kk - x));
        double const l1 = f.log_at(i);
        double const log_binom = log_k_fact - log_factorial(i) - log_factorial(k - i);
        double const d2 = f.log_at(i - 1) - 2.0 * l1 + f.log_at(i + 1) + d2_binom;
        return std::pair{d2, 1.0 + std::abs(l1) + std::abs(log_binom)};
    });
    return report;
}

LcReport is_ulc(Pmf const& f, double tol)
{
    if (auto hole = find_hole(f, kZeroTolerance)) {
        return failure(LcFailure::f_support_not_interval, *hole);
    }
    LcReport report;
    report.exact = f.tail_bound() == 0.0;
    scan_concavity(report, f.first(), trusted_last(f), tol, [&](std::int64_t i) {
        auto const x = static_cast<double>(i);
        double const l1 = f.log_at(i);
        // Delta^2 log i! = log((i+1)/i).
        double const d2 = f.log_at(i - 1) - 2.0 * l1 + f.log_at(i + 1) + std::log((x + 1.0) / x);
        return std::pair{d2, 1.0 + std::abs(l1) + log_factorial(i)};
    });
    return report;
}

SignProfile sign_profile(std::span<const double> a, double zero_tol)
{
    SignProfile profile;
    for (double v : a) {
        if (std::abs(v) <= zero_tol) {
            continue;
        }
        int const s = v > 0.0 ? 1 : -1;
        if (profile.signs.empty() || profile.signs.back() != s) {
            profile.signs.push_back(s);
        }
    }
    profile.change_count = profile.signs.empty() ? 0 : static_cast<int>(profile.signs.size()) - 1;
    return profile;
}

} // namespace lcorder
