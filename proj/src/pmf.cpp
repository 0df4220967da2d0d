#include "lcorder/pmf.hpp"

#include "lcorder/compensated_sum.hpp"
#include "lcorder/kernels.hpp"
#include "lcorder/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lcorder {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kMaxRealizedSize = 50'000'000;

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

// Upper tail mass beyond index k of a family whose log f_{k+1} is known.
double tail_after(FamilySpec const& spec, double log_next, std::int64_t k)
{
    double const rho = spec.ratio_bound_after(k + 1);
    if (!(rho < 1.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(log_next) / (1.0 - rho);
}

std::vector<double> exp_all(std::vector<double> const& logs)
{
    std::vector<double> w(logs.size());
    std::transform(logs.begin(), logs.end(), w.begin(), [](double l) { return std::exp(l); });
    return w;
}

} // namespace

// ---------------------------------------------------------------------------
// FamilySpec

FamilySpec FamilySpec::bernoulli(double p)
{
    FamilySpec s{FamilyKind::bernoulli, 1.0, p, 0.0};
    s.validate();
    return s;
}

FamilySpec FamilySpec::binomial(std::int64_t n, double p)
{
    FamilySpec s{FamilyKind::binomial, static_cast<double>(n), p, 0.0};
    s.validate();
    return s;
}

FamilySpec FamilySpec::poisson(double lambda)
{
    FamilySpec s{FamilyKind::poisson, 0.0, 0.0, lambda};
    s.validate();
    return s;
}

FamilySpec FamilySpec::geometric(double p)
{
    FamilySpec s{FamilyKind::geometric, 1.0, p, 0.0};
    s.validate();
    return s;
}

FamilySpec FamilySpec::negbinomial(double n, double r)
{
    FamilySpec s{FamilyKind::negbinomial, n, r, 0.0};
    s.validate();
    return s;
}

void FamilySpec::validate() const
{
    switch (kind) {
    case FamilyKind::bernoulli:
        if (!open_unit(p) || n != 1.0) {
            throw DomainError("bernoulli: p must lie in (0,1)");
        }
        break;
    case FamilyKind::binomial:
        if (!open_unit(p)) {
            throw DomainError("binomial: p must lie in (0,1)");
        }
        if (!(n >= 1.0) || n != std::floor(n) || n > static_cast<double>(kMaxRealizedSize)) {
            throw DomainError("binomial: n must be a positive integer");
        }
        break;
    case FamilyKind::poisson:
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw DomainError("poisson: lambda must be positive");
        }
        break;
    case FamilyKind::geometric:
        if (!open_unit(p)) {
            throw DomainError("geometric: p must lie in (0,1)");
        }
        break;
    case FamilyKind::negbinomial:
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw DomainError("negbinomial: n must be positive");
        }
        if (!open_unit(p)) {
            throw DomainError("negbinomial: r must lie in (0,1)");
        }
        break;
    }
}

bool FamilySpec::finite_support() const
{
    return kind == FamilyKind::bernoulli || kind == FamilyKind::binomial;
}

double FamilySpec::mean() const
{
    switch (kind) {
    case FamilyKind::bernoulli:
    case FamilyKind::binomial:
        return n * p;
    case FamilyKind::poisson:
        return lambda;
    case FamilyKind::geometric:
        return (1.0 - p) / p;
    case FamilyKind::negbinomial:
        return n * (1.0 - p) / p;
    }
    return 0.0;
}

double FamilySpec::log_first() const
{
    switch (kind) {
    case FamilyKind::bernoulli:
    case FamilyKind::binomial:
        return n * std::log1p(-p);
    case FamilyKind::poisson:
        return -lambda;
    case FamilyKind::geometric:
        return std::log(p);
    case FamilyKind::negbinomial:
        return n * std::log(p);
    }
    return 0.0;
}

double FamilySpec::log_ratio(std::int64_t i) const
{
    auto const x = static_cast<double>(i);
    switch (kind) {
    case FamilyKind::bernoulli:
    case FamilyKind::binomial:
        if (x >= n) {
            return kNegInf;
        }
        return std::log((n - x) / (x + 1.0)) + std::log(p) - std::log1p(-p);
    case FamilyKind::poisson:
        return std::log(lambda) - std::log(x + 1.0);
    case FamilyKind::geometric:
        return std::log1p(-p);
    case FamilyKind::negbinomial:
        return std::log((n + x) / (x + 1.0)) + std::log1p(-p);
    }
    return kNegInf;
}

double FamilySpec::ratio_bound_after(std::int64_t i) const
{
    auto const x = static_cast<double>(i);
    switch (kind) {
    case FamilyKind::bernoulli:
    case FamilyKind::binomial:
        return 0.0;
    case FamilyKind::poisson:
        return lambda / (x + 1.0);
    case FamilyKind::geometric:
        return 1.0 - p;
    case FamilyKind::negbinomial:
        // (n+j)/(j+1) decreases in j for n >= 1 and increases to 1 otherwise.
        return n >= 1.0 ? (n + x) / (x + 1.0) * (1.0 - p) : (1.0 - p);
    }
    return 1.0;
}

std::string FamilySpec::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
    case FamilyKind::bernoulli:
        os << "bernoulli(" << p << ")";
        break;
    case FamilyKind::binomial:
        os << "binomial(" << static_cast<std::int64_t>(n) << "," << p << ")";
        break;
    case FamilyKind::poisson:
        os << "poisson(" << lambda << ")";
        break;
    case FamilyKind::geometric:
        os << "geometric(" << p << ")";
        break;
    case FamilyKind::negbinomial:
        os << "negbinomial(" << n << "," << p << ")";
        break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Pmf

Pmf::Pmf() = default;

Pmf Pmf::from_log_weights(std::int64_t offset, std::vector<double> const& log_weights, double tail_bound,
                          bool infinite_support, std::string label)
{
    if (offset < 0) {
        throw DomainError("pmf offset must be non-negative");
    }
    auto weights = exp_all(log_weights);
    std::size_t lo = 0;
    std::size_t hi = weights.size();
    // Trim on the log scale: an underflowed weight is still part of the support.
    while (lo < hi && log_weights[lo] == kNegInf) {
        ++lo;
    }
    while (hi > lo && log_weights[hi - 1] == kNegInf) {
        --hi;
    }
    if (lo == hi) {
        throw DomainError("pmf has no positive weight");
    }
    Pmf f;
    f.offset_ = offset + static_cast<std::int64_t>(lo);
    f.weights_.assign(weights.begin() + static_cast<std::ptrdiff_t>(lo),
                      weights.begin() + static_cast<std::ptrdiff_t>(hi));
    f.log_weights_.assign(log_weights.begin() + static_cast<std::ptrdiff_t>(lo),
                          log_weights.begin() + static_cast<std::ptrdiff_t>(hi));
    f.tail_bound_ = tail_bound;
    f.infinite_support_ = infinite_support;
    f.exact_last_ = f.last();
    f.label_ = std::move(label);
    f.check_invariants();
    return f;
}

Pmf Pmf::from_weights(std::int64_t offset, std::vector<double> weights, double tail_bound, bool infinite_support,
                      std::string label)
{
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("pmf weights must be finite and non-negative");
        }
    }
    std::vector<double> logs(weights.size());
    std::transform(weights.begin(), weights.end(), logs.begin(),
                   [](double w) { return w > 0.0 ? std::log(w) : kNegInf; });
    Pmf f = from_log_weights(offset, logs, tail_bound, infinite_support, std::move(label));
    // Keep the caller's weights bit-for-bit rather than exp(log(w)).
    std::size_t lo = static_cast<std::size_t>(f.offset_ - offset);
    std::copy_n(weights.begin() + static_cast<std::ptrdiff_t>(lo), f.weights_.size(), f.weights_.begin());
    return f;
}

Pmf Pmf::normalized(std::int64_t offset, std::vector<double> weights, std::string label)
{
    CompensatedSum total;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("pmf weights must be finite and non-negative");
        }
        total += w;
    }
    if (!(total.value() > 0.0)) {
        throw DomainError("pmf has no positive weight");
    }
    double const z = total.value();
    for (double& w : weights) {
        w /= z;
    }
    return from_weights(offset, std::move(weights), 0.0, false, std::move(label));
}

Pmf Pmf::normalized_log(std::int64_t offset, std::vector<double> log_weights, std::string label)
{
    double top = kNegInf;
    for (double l : log_weights) {
        if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
            throw DomainError("log weights must be finite or -inf");
        }
        top = std::max(top, l);
    }
    if (top == kNegInf) {
        throw DomainError("pmf has no positive weight");
    }
    CompensatedSum z;
    for (double l : log_weights) {
        z += std::exp(l - top);
    }
    double const shift = top + std::log(z.value());
    for (double& l : log_weights) {
        l -= shift;
    }
    return from_log_weights(offset, log_weights, 0.0, false, std::move(label));
}

Pmf Pmf::point_mass(std::int64_t at)
{
    return from_weights(at, {1.0});
}

double Pmf::at(std::int64_t i) const
{
    if (i < first() || i > last()) {
        return 0.0;
    }
    return weights_[static_cast<std::size_t>(i - offset_)];
}

double Pmf::log_at(std::int64_t i) const
{
    if (i < first() || i > last()) {
        return kNegInf;
    }
    return log_weights_[static_cast<std::size_t>(i - offset_)];
}

double Pmf::total_mass() const
{
    CompensatedSum s;
    for (double w : weights_) {
        s += w;
    }
    return s.value();
}

Pmf Pmf::with_label(std::string label) const
{
    Pmf f = *this;
    f.label_ = std::move(label);
    return f;
}

bool Pmf::approx_equal(Pmf const& other, double tol) const
{
    std::int64_t const lo = std::min(first(), other.first());
    std::int64_t const hi = std::max(last(), other.last());
    for (std::int64_t i = lo; i <= hi; ++i) {
        if (std::abs(at(i) - other.at(i)) > tol) {
            return false;
        }
    }
    return true;
}

void Pmf::check_invariants() const
{
    if (!(tail_bound_ >= 0.0)) {
        throw DomainError("tail bound must be non-negative");
    }
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("pmf weights must be finite and non-negative");
        }
    }
    double const s = total_mass();
    if (s > 1.0 + kNormalizationSlack || s < 1.0 - tail_bound_ - kNormalizationSlack) {
        std::ostringstream os;
        os.precision(17);
        os << "pmf mass " << s << " outside [1 - tail_bound, 1] (tail_bound " << tail_bound_ << ")";
        throw DomainError(os.str());
    }
}

// ---------------------------------------------------------------------------
// Construction

Pmf realize(FamilySpec const& spec, double eps_trunc)
{
    spec.validate();
    if (!(eps_trunc > 0.0) || eps_trunc > 1e-6) {
        throw DomainError("truncation budget must lie in (0, 1e-6]");
    }
    std::vector<double> logs;
    double tail = 0.0;
    double l = spec.log_first();
    if (spec.finite_support()) {
        auto const n = static_cast<std::int64_t>(spec.n);
        logs.reserve(static_cast<std::size_t>(n + 1));
        for (std::int64_t i = 0; i <= n; ++i) {
            logs.push_back(l);
            if (i < n) {
                l += spec.log_ratio(i);
            }
        }
    } else {
        for (std::int64_t i = 0;; ++i) {
            logs.push_back(l);
            l += spec.log_ratio(i);
            tail = tail_after(spec, l, i);
            if (tail <= eps_trunc) {
                break;
            }
            if (i > kMaxRealizedSize) {
                throw DomainError("family too spread out to realise within the truncation budget");
            }
        }
    }
    Pmf f = Pmf::from_log_weights(0, logs, tail, !spec.finite_support(), spec.describe());
    f.family_ = spec;
    return f;
}

Pmf extend(Pmf const& f, std::int64_t new_last)
{
    if (!f.family_ || !f.infinite_support_ || new_last <= f.last()) {
        return f;
    }
    FamilySpec const& spec = *f.family_;
    Pmf g = f;
    double l = f.log_weights_.back();
    for (std::int64_t i = f.last(); i < new_last; ++i) {
        l += spec.log_ratio(i);
        g.log_weights_.push_back(l);
        g.weights_.push_back(std::exp(l));
    }
    while (g.log_weights_.back() == kNegInf) {
        g.weights_.pop_back();
        g.log_weights_.pop_back();
    }
    double const next = l + spec.log_ratio(g.last());
    g.tail_bound_ = std::min(f.tail_bound_, tail_after(spec, next, g.last()));
    g.exact_last_ = g.last();
    return g;
}

MeanValue mean(Pmf const& f)
{
    CompensatedSum s;
    auto const w = f.weights();
    for (std::size_t k = 0; k < w.size(); ++k) {
        s += static_cast<double>(f.first() + static_cast<std::int64_t>(k)) * w[k];
    }
    MeanValue m;
    m.value = s.value();
    // Truncated mass sits beyond last(); twice the window end is a tail-length
    // heuristic that holds for the geometric-type tails we construct.
    m.error_bound = f.tail_bound() * 2.0 * static_cast<double>(f.last() + 2) +
                    4.0 * std::numeric_limits<double>::epsilon() * std::abs(m.value);
    if (f.family()) {
        m.exact = f.family()->mean();
    }
    return m;
}

Pmf convolve(Pmf const& f, Pmf const& g)
{
    auto weights = kernels::convolve(f.weights(), g.weights());
    std::vector<double> logs(weights.size());
    std::transform(weights.begin(), weights.end(), logs.begin(),
                   [](double w) { return w > 0.0 ? std::log(w) : kNegInf; });
    std::int64_t const offset = f.first() + g.first();
    Pmf h = Pmf::from_log_weights(offset, logs, f.tail_bound() + g.tail_bound(),
                                  f.infinite_support() || g.infinite_support());
    std::int64_t exact = h.last();
    auto const incomplete = [](Pmf const& x) { return x.infinite_support() || x.exact_last() < x.last(); };
    if (incomplete(f)) {
        exact = std::min(exact, f.exact_last() + g.first());
    }
    if (incomplete(g)) {
        exact = std::min(exact, g.exact_last() + f.first());
    }
    h.exact_last_ = exact;
    return h;
}

Pmf bernoulli_sum(std::span<const double> ps)
{
    if (ps.empty()) {
        throw DomainError("bernoulli_sum needs at least one probability");
    }
    Pmf s;
    for (double p : ps) {
        if (!open_unit(p)) {
            throw DomainError("bernoulli_sum: probabilities must lie in (0,1)");
        }
        s = convolve(s, Pmf::from_weights(0, {1.0 - p, p}));
    }
    return s.with_label("bernoulli_sum(n=" + std::to_string(ps.size()) + ")");
}

Pmf geometric_sum(std::span<const double> rs, double eps_trunc)
{
    if (rs.empty()) {
        throw DomainError("geometric_sum needs at least one probability");
    }
    double const each = eps_trunc / static_cast<double>(rs.size());
    std::vector<Pmf> parts;
    parts.reserve(rs.size());
    std::int64_t top = 0;
    for (double r : rs) {
        parts.push_back(realize(FamilySpec::geometric(r), each));
        top = std::max(top, parts.back().last());
    }
    // A common window keeps the convolution exact through `top`.
    Pmf s = extend(parts.front(), top);
    for (std::size_t k = 1; k < parts.size(); ++k) {
        s = convolve(s, extend(parts[k], top));
    }
    return s.with_label("geometric_sum(n=" + std::to_string(rs.size()) + ")");
}

Pmf mixture(std::span<const Pmf> components, std::span<const double> mixing_weights)
{
    if (components.empty() || components.size() != mixing_weights.size()) {
        throw DomainError("mixture needs matching, non-empty components and weights");
    }
    CompensatedSum total;
    for (double w : mixing_weights) {
        if (!(w > 0.0)) {
            throw DomainError("mixture weights must be positive");
        }
        total += w;
    }
    std::int64_t lo = components.front().first();
    std::int64_t hi = components.front().last();
    for (Pmf const& c : components) {
        lo = std::min(lo, c.first());
        hi = std::max(hi, c.last());
    }
    std::vector<Pmf> ext;
    ext.reserve(components.size());
    for (Pmf const& c : components) {
        ext.push_back(extend(c, hi));
    }
    std::vector<double> w(static_cast<std::size_t>(hi - lo + 1), 0.0);
    double tail = 0.0;
    bool infinite = false;
    std::int64_t exact = hi;
    for (std::size_t k = 0; k < ext.size(); ++k) {
        double const a = mixing_weights[k] / total.value();
        for (std::int64_t i = ext[k].first(); i <= ext[k].last(); ++i) {
            w[static_cast<std::size_t>(i - lo)] += a * ext[k].at(i);
        }
        tail += a * ext[k].tail_bound();
        infinite = infinite || ext[k].infinite_support();
        if (ext[k].infinite_support() || ext[k].exact_last() < ext[k].last()) {
            exact = std::min(exact, ext[k].exact_last());
        }
    }
    Pmf m = Pmf::from_weights(lo, std::move(w), tail, infinite, "mixture");
    m.exact_last_ = std::min(exact, m.last());
    return m;
}

// ---------------------------------------------------------------------------
// Tilting and random minorants

namespace {

struct TiltMoments
{
    double mean = 0.0;
    double variance = 0.0;
};

// Moments of w_k e^{theta k} over relative index k.
TiltMoments tilted_moments(std::span<const double> logs, double theta)
{
    double top = kNegInf;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        top = std::max(top, logs[k] + theta * static_cast<double>(k));
    }
    CompensatedSum z;
    CompensatedSum m1;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        double const e = std::exp(logs[k] + theta * static_cast<double>(k) - top);
        z += e;
        m1 += e * static_cast<double>(k);
    }
    double const mean = m1.value() / z.value();
    CompensatedSum m2;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        double const e = std::exp(logs[k] + theta * static_cast<double>(k) - top);
        double const d = static_cast<double>(k) - mean;
        m2 += e * d * d;
    }
    return {mean, m2.value() / z.value()};
}

} // namespace

std::pair<Pmf, TiltSolve> tilt_to_mean(Pmf const& f, double mu)
{
    auto const base = static_cast<double>(f.first());
    if (!(mu > base && mu < static_cast<double>(f.last()))) {
        throw DomainError("tilt target must lie strictly inside the support hull");
    }
    double const target = mu - base;
    auto const logs = f.log_weights();

    TiltSolve solve;
    auto const start = tilted_moments(logs, 0.0);
    solve.residual = start.mean - target;
    if (std::abs(solve.residual) <= 1e-15 * std::max(1.0, std::abs(mu))) {
        return {f, solve};
    }

    // Bracket: the tilted mean is strictly increasing in theta.
    double lo = -1.0;
    double hi = 1.0;
    while (tilted_moments(logs, lo).mean > target) {
        lo *= 2.0;
    }
    while (tilted_moments(logs, hi).mean < target) {
        hi *= 2.0;
    }
    double theta = 0.0;
    double const goal = 1e-15 * std::max(1.0, std::abs(mu));
    for (solve.iterations = 1; solve.iterations <= 400; ++solve.iterations) {
        auto const m = tilted_moments(logs, theta);
        solve.residual = m.mean - target;
        if (std::abs(solve.residual) <= goal) {
            break;
        }
        if (solve.residual < 0.0) {
            lo = theta;
        } else {
            hi = theta;
        }
        double next = m.variance > 0.0 ? theta - solve.residual / m.variance : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == theta || hi - lo <= 1e-15 * std::max(1.0, std::abs(theta))) {
            break;
        }
        theta = next;
    }
    solve.theta = theta;
    if (!(std::abs(solve.residual) <= kMeanTolerance)) {
        throw DomainError("exponential tilt failed to reach the mean tolerance");
    }

    std::vector<double> tilted(logs.size());
    for (std::size_t k = 0; k < logs.size(); ++k) {
        tilted[k] = logs[k] + theta * static_cast<double>(k);
    }
    Pmf out = Pmf::normalized_log(f.first(), std::move(tilted), f.label().empty() ? "" : "tilt(" + f.label() + ")");
    solve.residual = mean(out).value - mu;
    return {out, solve};
}

Pmf random_lc_minorant(Pmf const& g, std::uint64_t rng_seed, MinorantOptions const& options)
{
    if (g.size() < 2) {
        return g;
    }
    Rng rng(rng_seed);
    double const g_mean = mean(g).value;
    double const mu = options.target_mean.value_or(g_mean);
    bool const identity = rng.bernoulli(options.identity_probability);

    std::int64_t const first = g.first();
    std::int64_t const hi = std::min(g.last(), g.exact_last());
    if (!(mu > static_cast<double>(first) && mu < static_cast<double>(hi))) {
        throw DomainError("minorant mean must lie strictly inside the trusted support of g");
    }
    for (std::int64_t i = first + 1; i < hi; ++i) {
        if (g.log_at(i) == kNegInf) {
            throw DomainError("random_lc_minorant needs interval support");
        }
    }

    std::int64_t a = first;
    std::int64_t b = hi;
    std::vector<double> logs;
    if (identity) {
        if (!options.target_mean && g.exact()) {
            return g;
        }
        for (std::int64_t i = a; i <= b; ++i) {
            logs.push_back(g.log_at(i));
        }
    } else {
        if (!options.full_support) {
            double const fl = std::floor(mu);
            auto const a_max = static_cast<std::int64_t>(fl == mu ? mu - 1.0 : fl);
            auto const b_min = static_cast<std::int64_t>(fl == mu ? mu + 1.0 : std::ceil(mu));
            a = rng.integer(first, a_max);
            b = rng.integer(b_min, hi);
        }
        double const u = rng.uniform();
        double const kappa = options.curvature_max * u * u;
        double slope = rng.uniform(-1.0, 1.0);
        double c = 0.0;
        for (std::int64_t i = a; i <= b; ++i) {
            logs.push_back(g.log_at(i) + c);
            c += slope;
            slope -= kappa * rng.uniform();
        }
    }
    Pmf f = Pmf::normalized_log(a, std::move(logs));
    return tilt_to_mean(f, mu).first.with_label("minorant");
}

} // namespace lcorder
