#include "lcorder/divergence.hpp"

#include "lcorder/compensated_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcorder {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

} // namespace

DivergenceValue DivergenceValue::infinite()
{
    return {kInf, 0.0, false};
}

DivergenceValue operator+(DivergenceValue const& a, DivergenceValue const& b)
{
    if (!a.finite || !b.finite) {
        return DivergenceValue::infinite();
    }
    return {a.value + b.value, a.error_bound + b.error_bound, true};
}

double tail_error(double tail, std::int64_t last, double log_scale)
{
    if (tail <= 0.0) {
        return 0.0;
    }
    return tail * (2.0 + std::abs(std::log(tail)) + std::abs(log_scale) +
                   std::log(static_cast<double>(last) + 2.0));
}

DivergenceValue entropy(Pmf const& f)
{
    CompensatedSum s;
    double magnitude = 0.0;
    auto const w = f.weights();
    auto const lw = f.log_weights();
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] > 0.0) {
            double const term = -w[k] * lw[k];
            s += term;
            magnitude += std::abs(term);
        }
    }
    DivergenceValue v;
    v.value = s.value();
    v.error_bound = 8.0 * kEps * (magnitude + static_cast<double>(w.size())) +
                    tail_error(f.tail_bound(), f.last(), f.log_weights().back());
    return v;
}

DivergenceValue kl(Pmf const& f, Pmf const& g_in)
{
    Pmf const g = extend(g_in, f.last());
    CompensatedSum s;
    double magnitude = 0.0;
    bool unknown_region = false;
    double tail_log_ratio = 0.0;
    std::int64_t const f_trusted = std::min(f.last(), f.exact_last());
    std::int64_t const g_trusted = std::min(g.last(), g.exact_last());
    for (std::int64_t i = f.first(); i <= f.last(); ++i) {
        double const fi = f.at(i);
        if (f.log_at(i) == -kInf) {
            continue;
        }
        if (g.log_at(i) == -kInf) {
            if (i > g.last() && g.infinite_support()) {
                unknown_region = true;
                continue;
            }
            return DivergenceValue::infinite();
        }
        if (i > g_trusted) {
            unknown_region = true;
        }
        double const lf = f.log_at(i);
        double const lg = g.log_at(i);
        double const term = fi * (lf - lg);
        s += term;
        magnitude += std::abs(term) + fi * (std::abs(lf) + std::abs(lg));
        if (i >= f_trusted) {
            tail_log_ratio = std::max(tail_log_ratio, std::abs(lf - lg));
        }
    }
    DivergenceValue v;
    v.value = s.value();
    v.error_bound = 8.0 * kEps * (magnitude + static_cast<double>(f.size())) +
                    tail_error(f.tail_bound(), f.last(), tail_log_ratio);
    if (unknown_region) {
        v.error_bound = kInf;
    }
    return v;
}

DivergenceValue total_variation(Pmf const& f, Pmf const& g)
{
    std::int64_t const lo = std::min(f.first(), g.first());
    std::int64_t const hi = std::max(f.last(), g.last());
    CompensatedSum s;
    for (std::int64_t i = lo; i <= hi; ++i) {
        s += std::abs(f.at(i) - g.at(i));
    }
    DivergenceValue v;
    v.value = 0.5 * s.value();
    v.error_bound = 0.5 * (f.tail_bound() + g.tail_bound()) + 4.0 * kEps * static_cast<double>(hi - lo + 1);
    return v;
}

double ehm_bound(std::span<const double> ps)
{
    if (ps.empty()) {
        throw DomainError("ehm_bound needs at least one probability");
    }
    CompensatedSum total;
    for (double p : ps) {
        if (!open_unit(p)) {
            throw DomainError("ehm_bound: probabilities must lie in (0,1)");
        }
        total += p;
    }
    auto const n = static_cast<double>(ps.size());
    double const p_bar = total.value() / n;
    double const q_bar = 1.0 - p_bar;
    CompensatedSum spread;
    for (double p : ps) {
        spread += (p - p_bar) * (p - p_bar);
    }
    double const lead = 1.0 - std::pow(p_bar, n + 1.0) - std::pow(q_bar, n + 1.0);
    return lead / ((n + 1.0) * p_bar * q_bar) * spread.value();
}

} // namespace lcorder
