#include "lcorder/inequalities.hpp"

#include "lcorder/compensated_sum.hpp"
#include "lcorder/instances.hpp"
#include "lcorder/parallel.hpp"
#include "lcorder/random.hpp"
#include "lcorder/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace lcorder {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
// |H(f) - H(g)| below this is treated as an entropy tie.
constexpr double kEntropyTie = 1e-12;

enum Stream : std::uint64_t {
    kMaxentStream = 0x3A7E,
    kMinentStream = 0x313E,
    kProjectionStream = 0x1B40,
    kClosureStream = 0xC105,
    kFuzzStream = 0xF022,
};

bool means_equal(Pmf const& a, Pmf const& b, CheckTolerances const& tol)
{
    MeanValue const ma = mean(a);
    MeanValue const mb = mean(b);
    return std::abs(ma.value - mb.value) <= tol.mean + ma.error_bound + mb.error_bound;
}

// Equal means hold only to within a tolerance. The triangle-type margins are
// sums of (a_i - b_i) phi_i with phi = log(num/den), so a mean mismatch of
// |E(a) - E(b)| can move them by at most that times the largest step of phi.
double mean_slack(Pmf const& a, Pmf const& b, Pmf const& num, Pmf const& den_in)
{
    double const gap = std::abs(mean(a).value - mean(b).value);
    if (gap == 0.0) {
        return 0.0;
    }
    Pmf const den = extend(den_in, num.last());
    double step = 0.0;
    for (std::int64_t i = num.first(); i < num.last(); ++i) {
        double const p0 = num.log_at(i) - den.log_at(i);
        double const p1 = num.log_at(i + 1) - den.log_at(i + 1);
        if (std::isfinite(p0) && std::isfinite(p1)) {
            step = std::max(step, std::abs(p1 - p0));
        }
    }
    return gap * step;
}

DivergenceValue with_slack(DivergenceValue v, double slack)
{
    v.error_bound += slack;
    return v;
}

json labels(std::initializer_list<Pmf const*> pmfs)
{
    json out = json::array();
    for (Pmf const* p : pmfs) {
        out.push_back(p->label());
    }
    return out;
}

// First failing link of an lc chain, as an inconclusive verdict.
std::optional<Verdict> chain_failure(std::string const& check, std::span<Pmf const* const> chain,
                                     CheckTolerances const& tol, json const& ctx)
{
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        LcReport const r = lc_le(*chain[k], *chain[k + 1], tol.lc);
        if (!r.verdict) {
            json c = ctx;
            c["link"] = k;
            c["failure"] = to_string(r.failure_kind);
            return inconclusive(check, "order hypothesis failed", c);
        }
    }
    return std::nullopt;
}

int status_rank(Status s)
{
    switch (s) {
    case Status::violated:
        return 2;
    case Status::inconclusive:
        return 1;
    case Status::holds:
        return 0;
    }
    return 0;
}

// The less favourable of two verdicts, carrying both in its context.
Verdict worse(Verdict a, Verdict b)
{
    bool pick_b = status_rank(b.status) > status_rank(a.status) ||
                  (status_rank(b.status) == status_rank(a.status) &&
                   b.margin + b.combined_error() < a.margin + a.combined_error());
    json const ca = to_json(a);
    json const cb = to_json(b);
    Verdict out = pick_b ? std::move(b) : std::move(a);
    out.context["forms"] = json::array({ca, cb});
    return out;
}

Verdict lc_verdict(std::string check, LcReport const& r, json ctx)
{
    Verdict v;
    v.check = std::move(check);
    v.status = r.verdict ? Status::holds : Status::violated;
    v.lhs = {r.margin, 0.0, true};
    v.rhs = {0.0, 0.0, true};
    v.margin = -r.margin;
    ctx["lc"] = to_json(r);
    v.context = std::move(ctx);
    return v;
}

DivergenceValue exact_value(double x)
{
    return {x, 4.0 * kEps * std::abs(x), true};
}

// Weighted sum with an error term covering rounding and the truncated tail.
DivergenceValue weighted_sum(Pmf const& f, std::span<const double> w, double w_max)
{
    CompensatedSum s;
    double magnitude = 0.0;
    for (std::int64_t i = f.first(); i <= f.last(); ++i) {
        double const term = f.at(i) * w[static_cast<std::size_t>(i)];
        s += term;
        magnitude += std::abs(term);
    }
    return {s.value(), 4.0 * kEps * magnitude + f.tail_bound() * w_max, true};
}

double random_mean_in(Pmf const& g, Rng& rng)
{
    auto const lo = static_cast<double>(g.first());
    auto const hi = static_cast<double>(std::min(g.last(), g.exact_last()));
    return lo + (hi - lo) * rng.uniform(0.1, 0.9);
}

MinorantOptions targeted(Pmf const& g, Rng& rng)
{
    MinorantOptions opts;
    if (g.size() >= 2) {
        opts.target_mean = random_mean_in(g, rng);
    }
    return opts;
}

} // namespace

// ---------------------------------------------------------------------------
// Triangle and quadrangle

Verdict check_triangle(Pmf const& f, Pmf const& g, Pmf const& h, CheckTolerances const& tol)
{
    json ctx;
    ctx["labels"] = labels({&f, &g, &h});
    std::array<Pmf const*, 3> const chain{&f, &g, &h};
    if (auto fail = chain_failure("triangle", chain, tol, ctx)) {
        return *fail;
    }
    bool const left = means_equal(f, g, tol);
    bool const right = means_equal(g, h, tol);
    if (!left && !right) {
        return inconclusive("triangle", "neither adjacent pair has equal means", ctx);
    }
    std::optional<Verdict> out;
    if (left) {
        json c = ctx;
        c["form"] = "D(f|h) >= D(f|g) + D(g|h)";
        double const slack = mean_slack(f, g, g, h);
        c["mean_slack"] = slack;
        out = judge("triangle", kl(f, h), with_slack(kl(f, g) + kl(g, h), slack), c);
    }
    if (right) {
        json c = ctx;
        c["form"] = "D(h|f) >= D(h|g) + D(g|f)";
        double const slack = mean_slack(h, g, g, f);
        c["mean_slack"] = slack;
        Verdict v = judge("triangle", kl(h, f), with_slack(kl(h, g) + kl(g, f), slack), c);
        out = out ? worse(std::move(*out), std::move(v)) : std::move(v);
    }
    return *out;
}

Verdict check_quadrangle(Pmf const& f, Pmf const& g, Pmf const& g2, Pmf const& h, CheckTolerances const& tol)
{
    json ctx;
    ctx["labels"] = labels({&f, &g, &g2, &h});
    std::array<Pmf const*, 4> const chain{&f, &g, &g2, &h};
    if (auto fail = chain_failure("quadrangle", chain, tol, ctx)) {
        return *fail;
    }
    bool const left = means_equal(f, g, tol);
    bool const right = means_equal(g2, h, tol);
    if (!left && !right) {
        return inconclusive("quadrangle", "neither end pair has equal means", ctx);
    }
    std::optional<Verdict> out;
    if (left) {
        json c = ctx;
        c["form"] = "D(f|h) + D(g|g2) >= D(f|g2) + D(g|h)";
        double const slack = mean_slack(f, g, g2, h);
        c["mean_slack"] = slack;
        out = judge("quadrangle", kl(f, h) + kl(g, g2), with_slack(kl(f, g2) + kl(g, h), slack), c);
    }
    if (right) {
        json c = ctx;
        c["form"] = "D(h|f) + D(g2|g) >= D(g2|f) + D(h|g)";
        double const slack = mean_slack(h, g2, g, f);
        c["mean_slack"] = slack;
        Verdict v = judge("quadrangle", kl(h, f) + kl(g2, g), with_slack(kl(g2, f) + kl(h, g), slack), c);
        out = out ? worse(std::move(*out), std::move(v)) : std::move(v);
    }
    return *out;
}

double triangle_cross_term(Pmf const& f, Pmf const& g, Pmf const& h_in)
{
    Pmf const h = extend(h_in, g.last());
    CompensatedSum s;
    for (std::int64_t i = g.first(); i <= g.last(); ++i) {
        double const lg = g.log_at(i);
        if (std::isinf(lg)) {
            continue;
        }
        double const lh = h.log_at(i);
        if (std::isinf(lh)) {
            return kInf;
        }
        s += (f.at(i) - g.at(i)) * (lg - lh);
    }
    return s.value();
}

// ---------------------------------------------------------------------------
// Concave dominance and partial sums

Verdict check_concave_dominance(Pmf const& f, Pmf const& g, std::span<const double> w, CheckTolerances const& tol)
{
    std::int64_t const top = std::max(f.last(), g.last());
    if (static_cast<std::int64_t>(w.size()) <= top) {
        throw DomainError("weight table does not cover both supports");
    }
    double w_max = 0.0;
    for (double x : w) {
        if (!std::isfinite(x)) {
            throw DomainError("weight table must be finite");
        }
        w_max = std::max(w_max, std::abs(x));
    }
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        double const d2 = w[i - 1] - 2.0 * w[i] + w[i + 1];
        if (d2 > 1e-12 * (1.0 + std::abs(w[i]))) {
            throw DomainError("weight table is not concave at index " + std::to_string(i));
        }
    }
    json ctx;
    ctx["labels"] = labels({&f, &g});
    std::array<Pmf const*, 2> const chain{&f, &g};
    if (auto fail = chain_failure("concave-dominance", chain, tol, ctx)) {
        return *fail;
    }
    if (!means_equal(f, g, tol)) {
        return inconclusive("concave-dominance", "means differ", ctx);
    }
    return judge("concave-dominance", weighted_sum(f, w, w_max), weighted_sum(g, w, w_max), ctx);
}

std::vector<double> difference_sequence(Pmf const& f, Pmf const& g)
{
    std::int64_t const lo = std::min(f.first(), g.first());
    std::int64_t const hi = std::max(f.last(), g.last());
    std::vector<double> a;
    a.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t i = lo; i <= hi; ++i) {
        double const lf = f.log_at(i);
        double const lg = g.log_at(i);
        if (std::isinf(lg)) {
            a.push_back(f.at(i));
        } else if (std::isinf(lf)) {
            a.push_back(-g.at(i));
        } else {
            a.push_back(g.at(i) * std::expm1(lf - lg));
        }
    }
    return a;
}

KarlinReport karlin_partial_sums(std::span<const double> a, double tol)
{
    KarlinReport r;
    CompensatedSum sum;
    CompensatedSum moment;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i];
        moment += static_cast<double>(i) * a[i];
    }
    r.sum = sum.value();
    r.first_moment = moment.value();
    double const term_tol = 1e-2 * tol;
    double const n = std::max(1.0, static_cast<double>(a.size()));
    if (std::abs(r.sum) > tol || std::abs(r.first_moment) > tol * n) {
        r.status = Status::inconclusive;
        r.reason = "sum or first moment is not zero";
        return r;
    }
    // positive set must be an interval
    std::int64_t first_pos = -1;
    std::int64_t last_pos = -1;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > term_tol) {
            if (first_pos < 0) {
                first_pos = static_cast<std::int64_t>(i);
            }
            last_pos = static_cast<std::int64_t>(i);
        }
    }
    for (std::int64_t i = first_pos + 1; first_pos >= 0 && i < last_pos; ++i) {
        if (a[static_cast<std::size_t>(i)] < -term_tol) {
            r.status = Status::inconclusive;
            r.reason = "positive set is not an interval";
            return r;
        }
    }

    r.terms = sign_profile(a, term_tol);
    std::vector<double> partial(a.size());
    CompensatedSum running;
    CompensatedSum running2;
    r.max_double_partial = -kInf;
    for (std::size_t i = 0; i < a.size(); ++i) {
        running += a[i];
        partial[i] = running.value();
        running2 += partial[i];
        r.max_double_partial = std::max(r.max_double_partial, running2.value());
    }
    if (a.empty()) {
        r.max_double_partial = 0.0;
    }
    r.partial_sums = sign_profile(partial, tol);

    std::vector<int> const want_terms{-1, 1, -1};
    std::vector<int> const want_partial{-1, 1};
    r.terms_ok = r.terms.signs.empty() || r.terms.signs == want_terms;
    r.partial_ok = r.partial_sums.signs.empty() || r.partial_sums.signs == want_partial;
    r.double_ok = r.max_double_partial <= tol * n;
    r.status = (r.terms_ok && r.partial_ok && r.double_ok) ? Status::holds : Status::violated;
    if (!r.terms_ok) {
        r.reason = "term signs";
    } else if (!r.partial_ok) {
        r.reason = "partial sum signs";
    } else if (!r.double_ok) {
        r.reason = "positive double partial sum";
    }
    return r;
}

// ---------------------------------------------------------------------------
// Entropy extremes and projections

Verdict check_maxent(Pmf const& g, int n_samples, std::uint64_t rng_seed, CheckTolerances const& tol)
{
    json ctx;
    ctx["g"] = g.label();
    ctx["samples"] = n_samples;
    if (!is_log_concave(g, tol.lc).verdict) {
        return inconclusive("maxent", "g is not log-concave", ctx);
    }
    DivergenceValue const hg = entropy(g);
    auto const verdicts = parallel_map(n_samples, [&](std::int64_t k) {
        Pmf const f = random_lc_minorant(g, derive_seed(rng_seed, kMaxentStream, static_cast<std::uint64_t>(k)));
        DivergenceValue const hf = entropy(f);
        json c;
        c["sample"] = k;
        Verdict v = judge("maxent", hg, hf, c);
        if (std::abs(hg.value - hf.value) <= kEntropyTie) {
            DivergenceValue const tv = total_variation(f, g);
            v.context["tie"] = true;
            v.context["tv"] = tv.value;
            if (tv.value > 1e-6) {
                v.status = Status::violated;
                v.context["reason"] = "equal entropy but f differs from g";
            }
        }
        return v;
    });
    Verdict out = aggregate("maxent", verdicts);
    out.context.update(ctx);
    return out;
}

Verdict check_minent(Pmf const& f, int n_samples, std::uint64_t rng_seed, CheckTolerances const& tol)
{
    json ctx;
    ctx["f"] = f.label();
    ctx["samples"] = n_samples;
    if (!f.exact() || !is_log_concave(f, tol.lc).verdict) {
        return inconclusive("minent", "f must be finite and log-concave", ctx);
    }
    DivergenceValue const hf = entropy(f);
    auto const verdicts = parallel_map(n_samples, [&](std::int64_t k) {
        Pmf const g =
            instances::random_lc_majorant(f, derive_seed(rng_seed, kMinentStream, static_cast<std::uint64_t>(k)));
        json c;
        c["sample"] = k;
        return judge("minent", entropy(g), hf, c);
    });
    Verdict out = aggregate("minent", verdicts);
    out.context.update(ctx);
    return out;
}

Verdict check_iprojection(Pmf const& g, Pmf const& h, int n_samples, std::uint64_t rng_seed,
                          CheckTolerances const& tol)
{
    json ctx;
    ctx["labels"] = labels({&g, &h});
    ctx["samples"] = n_samples;
    std::array<Pmf const*, 2> const chain{&g, &h};
    if (auto fail = chain_failure("iprojection", chain, tol, ctx)) {
        return *fail;
    }
    DivergenceValue const dgh = kl(g, h);
    auto const pairs = parallel_map(n_samples, [&](std::int64_t k) {
        Pmf const f =
            random_lc_minorant(g, derive_seed(rng_seed, kProjectionStream, static_cast<std::uint64_t>(k)));
        DivergenceValue const dfh = kl(f, h);
        json c;
        c["sample"] = k;
        return std::pair{judge("iprojection", dfh, dgh, c), judge("iprojection-gap", dfh, dgh + kl(f, g), c)};
    });
    std::vector<Verdict> all;
    for (auto const& [a, b] : pairs) {
        all.push_back(a);
        all.push_back(b);
    }
    Verdict out = aggregate("iprojection", all);
    out.context.update(ctx);
    return out;
}

// ---------------------------------------------------------------------------
// Approximation tables

namespace {

std::size_t tolerant_argmin(std::vector<ApproximationRow> const& rows)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].kl.finite && rows[k].kl.value < rows[best].kl.value) {
            best = k;
        }
    }
    // Earliest row that ties with the minimum within error.
    for (std::size_t k = 0; k < best; ++k) {
        if (rows[k].kl.finite &&
            rows[k].kl.value <= rows[best].kl.value + rows[k].kl.error_bound + rows[best].kl.error_bound) {
            return k;
        }
    }
    return best;
}

json pair_context(char const* a, double va, char const* b, double vb)
{
    json c;
    c[a] = va;
    c[b] = vb;
    return c;
}

} // namespace

ApproximationTable best_binomial(std::span<const double> ps, std::int64_t m_max, std::span<const double> p_grid,
                                 CheckTolerances const& tol)
{
    auto const n = static_cast<std::int64_t>(ps.size());
    if (m_max < n) {
        throw DomainError("m_max must be at least the number of summands");
    }
    Pmf const f = bernoulli_sum(ps);
    double lambda = 0.0;
    for (double p : ps) {
        lambda += p;
    }
    ApproximationTable t;
    t.family = "binomial";
    t.mean = lambda;
    std::vector<Pmf> bs;
    for (std::int64_t m = n; m <= m_max; ++m) {
        double const p = lambda / static_cast<double>(m);
        bs.push_back(realize(FamilySpec::binomial(m, p), tol.eps_trunc));
        t.rows.push_back({static_cast<double>(m), p, kl(f, bs.back())});
    }
    Pmf const po = realize(FamilySpec::poisson(lambda), tol.eps_trunc);
    t.poisson_row = kl(f, po);
    t.argmin_row = tolerant_argmin(t.rows);

    std::vector<Verdict> at_least_first;
    std::vector<Verdict> nondecreasing;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        at_least_first.push_back(judge("binomial-argmin", t.rows[k].kl, t.rows[0].kl, {{"m", t.rows[k].m}}));
        if (k + 1 < t.rows.size()) {
            nondecreasing.push_back(
                judge("binomial-nondecreasing", t.rows[k + 1].kl, t.rows[k].kl, {{"m", t.rows[k].m}}));
        }
    }
    Verdict argmin = aggregate("binomial-argmin", at_least_first);
    argmin.context["argmin_m"] = t.rows[t.argmin_row].m;
    if (t.argmin_row != 0 && argmin.status == Status::holds) {
        argmin.status = Status::violated;
    }
    t.checks.push_back(std::move(argmin));
    t.checks.push_back(aggregate("binomial-nondecreasing", nondecreasing));

    std::map<std::pair<std::int64_t, double>, Pmf> targets;
    std::vector<Verdict> three_term;
    for (std::size_t k = 0; k < bs.size(); ++k) {
        for (std::int64_t m2 = n + static_cast<std::int64_t>(k); m2 <= m_max; ++m2) {
            for (double p2 : p_grid) {
                auto key = std::pair{m2, p2};
                auto it = targets.find(key);
                if (it == targets.end()) {
                    it = targets.emplace(key, realize(FamilySpec::binomial(m2, p2), tol.eps_trunc)).first;
                }
                json c = pair_context("m", t.rows[k].m, "m_prime", static_cast<double>(m2));
                c["p_prime"] = p2;
                three_term.push_back(
                    judge("binomial-three-term", kl(f, it->second), t.rows[k].kl + kl(bs[k], it->second), c));
            }
        }
    }
    t.checks.push_back(aggregate("binomial-three-term", three_term));
    t.checks.push_back(judge("poisson-three-term", *t.poisson_row, t.rows[0].kl + kl(bs[0], po)));

    DivergenceValue best_binomial_row = t.rows[0].kl;
    for (auto const& row : t.rows) {
        if (row.kl.value > best_binomial_row.value) {
            best_binomial_row = row.kl;
        }
    }
    t.checks.push_back(judge("poisson-worst", *t.poisson_row, best_binomial_row, json::object(), true));
    for (Verdict& v : t.checks) {
        v.context["ps"] = std::vector<double>(ps.begin(), ps.end());
    }
    return t;
}

ApproximationTable best_negbinomial(std::span<const double> rs, std::span<const double> m_grid,
                                    std::span<const double> r_grid, CheckTolerances const& tol)
{
    auto const n = static_cast<double>(rs.size());
    std::vector<double> grid(m_grid.begin(), m_grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty() || grid.front() < n) {
        throw DomainError("every m must be at least the number of summands");
    }
    Pmf const f = geometric_sum(rs, tol.eps_trunc);
    double mu = 0.0;
    for (double r : rs) {
        mu += (1.0 - r) / r;
    }
    ApproximationTable t;
    t.family = "negbinomial";
    t.mean = mu;
    std::vector<Pmf> nbs;
    for (double m : grid) {
        double const r = m / (m + mu);
        nbs.push_back(realize(FamilySpec::negbinomial(m, r), tol.eps_trunc));
        t.rows.push_back({m, r, kl(f, nbs.back())});
    }
    Pmf const po = realize(FamilySpec::poisson(mu), tol.eps_trunc);
    t.poisson_row = kl(f, po);
    t.argmin_row = tolerant_argmin(t.rows);

    std::vector<Verdict> nondecreasing;
    for (std::size_t k = 0; k + 1 < t.rows.size(); ++k) {
        nondecreasing.push_back(
            judge("negbinomial-nondecreasing", t.rows[k + 1].kl, t.rows[k].kl, {{"m", t.rows[k].m}}));
    }
    t.checks.push_back(aggregate("negbinomial-nondecreasing", nondecreasing));

    std::vector<Verdict> three_term;
    std::map<std::pair<double, double>, Pmf> targets;
    for (std::size_t k = 0; k < nbs.size(); ++k) {
        for (std::size_t k2 = k; k2 < grid.size(); ++k2) {
            for (double r2 : r_grid) {
                auto key = std::pair{grid[k2], r2};
                auto it = targets.find(key);
                if (it == targets.end()) {
                    it = targets.emplace(key, realize(FamilySpec::negbinomial(grid[k2], r2), tol.eps_trunc)).first;
                }
                json c = pair_context("m", grid[k], "m_prime", grid[k2]);
                c["r_prime"] = r2;
                three_term.push_back(
                    judge("negbinomial-three-term", kl(f, it->second), t.rows[k].kl + kl(nbs[k], it->second), c));
            }
        }
    }
    t.checks.push_back(aggregate("negbinomial-three-term", three_term));

    Pmf const nb_n = realize(FamilySpec::negbinomial(n, n / (n + mu)), tol.eps_trunc);
    t.checks.push_back(lc_verdict("negbinomial-below-sum", lc_le(nb_n, f, tol.lc), json::object()));
    t.checks.push_back(judge("negbinomial-minent", entropy(f), entropy(nb_n)));
    t.checks.push_back(judge("negbinomial-poisson-three-term", *t.poisson_row, kl(f, nb_n) + kl(nb_n, po)));
    for (Verdict& v : t.checks) {
        v.context["rs"] = std::vector<double>(rs.begin(), rs.end());
    }
    return t;
}

std::vector<Verdict> check_monotone_limit(LimitKind kind, double mean_value, std::span<const double> m_grid,
                                          CheckTolerances const& tol)
{
    if (!(mean_value > 0.0)) {
        throw DomainError("mean must be positive");
    }
    std::vector<Pmf> pmfs;
    for (std::size_t k = 0; k < m_grid.size(); ++k) {
        double const m = m_grid[k];
        if (k > 0 && !(m > m_grid[k - 1])) {
            throw DomainError("m grid must be strictly increasing");
        }
        if (kind == LimitKind::binomial) {
            if (m != std::floor(m) || !(m > mean_value)) {
                throw DomainError("binomial m must be an integer above the mean");
            }
            pmfs.push_back(realize(FamilySpec::binomial(static_cast<std::int64_t>(m), mean_value / m), tol.eps_trunc));
        } else {
            if (!(m > 0.0)) {
                throw DomainError("negative binomial m must be positive");
            }
            pmfs.push_back(realize(FamilySpec::negbinomial(m, m / (m + mean_value)), tol.eps_trunc));
        }
    }
    Pmf const po = realize(FamilySpec::poisson(mean_value), tol.eps_trunc);
    std::vector<DivergenceValue> d;
    for (Pmf const& b : pmfs) {
        d.push_back(kl(b, po));
    }
    std::string const prefix = kind == LimitKind::binomial ? "binomial" : "negbinomial";
    std::vector<Verdict> out;
    for (std::size_t k = 0; k + 1 < pmfs.size(); ++k) {
        json c = pair_context("m", m_grid[k], "m_next", m_grid[k + 1]);
        c["mean"] = mean_value;
        out.push_back(judge(prefix + "-limit-decrease", d[k], d[k + 1], c, true));
        out.push_back(judge(prefix + "-limit-chain", d[k], kl(pmfs[k], pmfs[k + 1]) + d[k + 1], c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convolution closure

std::string_view to_string(ClosureKind kind)
{
    switch (kind) {
    case ClosureKind::liggett:
        return "liggett";
    case ClosureKind::davenport_polya:
        return "davenport_polya";
    case ClosureKind::poisson_limit_ulc:
        return "poisson_limit_ulc";
    case ClosureKind::poisson_limit_lcx:
        return "poisson_limit_lcx";
    }
    return "unknown";
}

ClosureKind closure_kind_from_string(std::string_view name)
{
    for (ClosureKind k : {ClosureKind::liggett, ClosureKind::davenport_polya, ClosureKind::poisson_limit_ulc,
                          ClosureKind::poisson_limit_lcx}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw DomainError("unknown closure kind \"" + std::string(name) + "\"");
}

ClosureParams ClosureParams::random(ClosureKind kind, std::uint64_t seed)
{
    Rng rng(seed);
    ClosureParams p;
    p.k = rng.integer(1, 8);
    p.m = rng.integer(1, 8);
    p.p = kind == ClosureKind::davenport_polya ? rng.uniform(0.2, 0.9) : rng.uniform(0.1, 0.9);
    p.lambda = rng.uniform(0.5, 6.0);
    p.mu = rng.uniform(0.5, 6.0);
    return p;
}

json ClosureParams::to_json() const
{
    return {{"k", k}, {"m", m}, {"p", p}, {"lambda", lambda}, {"mu", mu}};
}

Verdict check_convolution_closure(ClosureKind kind, ClosureParams const& params, std::uint64_t rng_seed,
                                  CheckTolerances const& tol)
{
    std::string const name = "closure-" + std::string(to_string(kind));
    json ctx;
    ctx["params"] = params.to_json();
    ctx["seed"] = rng_seed;
    Rng rng(rng_seed);
    auto const seed_f = derive_seed(rng_seed, kClosureStream, 0);
    auto const seed_g = derive_seed(rng_seed, kClosureStream, 1);
    double const eps = tol.eps_trunc;

    // lower <=_lc f and lower2 <=_lc g, or f <=_lc upper and g <=_lc upper2
    Pmf f;
    Pmf g;
    Pmf ref_f;
    Pmf ref_g;
    Pmf bound;
    bool minorants = true;
    switch (kind) {
    case ClosureKind::liggett:
        ref_f = realize(FamilySpec::binomial(params.k, params.p), eps);
        ref_g = realize(FamilySpec::binomial(params.m, params.p), eps);
        bound = realize(FamilySpec::binomial(params.k + params.m, params.p), eps);
        break;
    case ClosureKind::poisson_limit_ulc:
        ref_f = realize(FamilySpec::poisson(params.lambda), eps / 2);
        ref_g = realize(FamilySpec::poisson(params.mu), eps / 2);
        bound = realize(FamilySpec::poisson(params.lambda + params.mu), eps);
        break;
    case ClosureKind::davenport_polya:
        minorants = false;
        ref_f = realize(FamilySpec::negbinomial(static_cast<double>(params.k), params.p), eps);
        ref_g = realize(FamilySpec::negbinomial(static_cast<double>(params.m), params.p), eps);
        bound = realize(FamilySpec::negbinomial(static_cast<double>(params.k + params.m), params.p), eps);
        f = instances::random_nb_mixture(static_cast<double>(params.k), seed_f, eps / 2);
        g = instances::random_nb_mixture(static_cast<double>(params.m), seed_g, eps / 2);
        break;
    case ClosureKind::poisson_limit_lcx:
        minorants = false;
        ref_f = realize(FamilySpec::poisson(params.lambda), eps);
        ref_g = realize(FamilySpec::poisson(params.mu), eps);
        bound = realize(FamilySpec::poisson(params.lambda + params.mu), eps);
        f = instances::random_poisson_mixture(seed_f, eps / 2);
        g = instances::random_poisson_mixture(seed_g, eps / 2);
        break;
    }
    if (minorants) {
        f = random_lc_minorant(ref_f, seed_f, targeted(ref_f, rng));
        g = random_lc_minorant(ref_g, seed_g, targeted(ref_g, rng));
        std::array<Pmf const*, 2> const cf{&f, &ref_f};
        std::array<Pmf const*, 2> const cg{&g, &ref_g};
        if (auto fail = chain_failure(name, cf, tol, ctx)) {
            return *fail;
        }
        if (auto fail = chain_failure(name, cg, tol, ctx)) {
            return *fail;
        }
        return lc_verdict(name, lc_le(convolve(f, g), bound, tol.lc), ctx);
    }
    std::array<Pmf const*, 2> const cf{&ref_f, &f};
    std::array<Pmf const*, 2> const cg{&ref_g, &g};
    if (auto fail = chain_failure(name, cf, tol, ctx)) {
        return *fail;
    }
    if (auto fail = chain_failure(name, cg, tol, ctx)) {
        return *fail;
    }
    return lc_verdict(name, lc_le(bound, convolve(f, g), tol.lc), ctx);
}

// ---------------------------------------------------------------------------
// Poisson approximation

ChoiXiaReport check_choi_xia(std::span<const double> ps, std::int64_t m)
{
    auto const n = static_cast<std::int64_t>(ps.size());
    if (m < n) {
        throw DomainError("m must be at least the number of summands");
    }
    Pmf const f = bernoulli_sum(ps);
    ChoiXiaReport r;
    for (double p : ps) {
        r.lambda += p;
    }
    r.r = static_cast<std::int64_t>(std::floor(r.lambda));
    r.delta = r.lambda - static_cast<double>(r.r);
    double const slack = static_cast<double>(r.r) - 1.0 - (1.0 + r.delta) * (1.0 + r.delta);
    r.condition = slack > 0.0;
    r.m_threshold = r.condition ? std::max(static_cast<double>(n), r.lambda * r.lambda / slack) : kInf;
    r.m = m;
    auto const md = static_cast<double>(m);
    r.d_m = total_variation(f, realize(FamilySpec::binomial(m, r.lambda / md)));
    r.d_m1 = total_variation(f, realize(FamilySpec::binomial(m + 1, r.lambda / (md + 1.0))));
    r.v_poisson = total_variation(f, realize(FamilySpec::poisson(r.lambda)));
    if (!r.condition) {
        r.status = Status::inconclusive;
        r.note = "condition r > 1 + (1 + delta)^2 not met";
        return r;
    }
    if (md < r.m_threshold) {
        r.status = Status::inconclusive;
        r.note = "m below threshold";
        return r;
    }
    bool const first = r.d_m1.value - r.d_m.value > r.d_m.error_bound + r.d_m1.error_bound;
    bool const second = r.v_poisson.value - r.d_m1.value > r.d_m1.error_bound + r.v_poisson.error_bound;
    r.status = first && second ? Status::holds : Status::violated;
    r.note = first && second ? "d_m < d_{m+1} < V(f, po)" : "ordering fails";
    return r;
}

// ---------------------------------------------------------------------------
// Scenario bundles

std::vector<Verdict> scenario_bernoulli(std::span<const double> ps, CheckTolerances const& tol)
{
    auto const n = static_cast<std::int64_t>(ps.size());
    Pmf const f = bernoulli_sum(ps);
    double lambda = 0.0;
    for (double p : ps) {
        lambda += p;
    }
    double const p_bar = lambda / static_cast<double>(n);
    Pmf const bin = realize(FamilySpec::binomial(n, p_bar), tol.eps_trunc);
    Pmf const po = realize(FamilySpec::poisson(lambda), tol.eps_trunc);
    json ctx;
    ctx["ps"] = std::vector<double>(ps.begin(), ps.end());

    std::vector<Verdict> out;
    out.push_back(lc_verdict("ulc-order-n", is_ulc_order_k(f, n, tol.lc), ctx));
    out.push_back(lc_verdict("ulc", is_ulc(f, tol.lc), ctx));
    out.push_back(lc_verdict("below-binomial", lc_le(f, bin, tol.lc), ctx));
    out.push_back(judge("entropy-below-binomial", entropy(bin), entropy(f), ctx));
    out.push_back(judge("entropy-below-poisson", entropy(po), entropy(f), ctx));
    out.push_back(judge("ehm-bound", exact_value(ehm_bound(ps)), total_variation(f, bin), ctx));

    std::array const p_grid{0.1, 0.3, 0.5, 0.7, 0.9};
    auto table = best_binomial(ps, 4 * n, p_grid, tol);
    for (Verdict& v : table.checks) {
        out.push_back(std::move(v));
    }
    std::vector<double> m_grid;
    for (auto m = static_cast<std::int64_t>(std::floor(lambda)) + 1; m <= 4 * n; ++m) {
        m_grid.push_back(static_cast<double>(m));
    }
    for (Verdict& v : check_monotone_limit(LimitKind::binomial, lambda, m_grid, tol)) {
        v.context.update(ctx);
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Verdict> scenario_geometric(std::span<const double> rs, CheckTolerances const& tol)
{
    auto const n = static_cast<double>(rs.size());
    Pmf const f = geometric_sum(rs, tol.eps_trunc);
    double mu = 0.0;
    for (double r : rs) {
        mu += (1.0 - r) / r;
    }
    json ctx;
    ctx["rs"] = std::vector<double>(rs.begin(), rs.end());
    std::vector<Verdict> out;
    out.push_back(lc_verdict("geometric-sum-log-concave", is_log_concave(f, tol.lc), ctx));

    std::vector<double> m_grid;
    for (double m = n; m <= 4.0 * n + 1e-9; m += 0.5) {
        m_grid.push_back(m);
    }
    std::array const r_grid{0.2, 0.5, 0.8};
    auto table = best_negbinomial(rs, m_grid, r_grid, tol);
    for (Verdict& v : table.checks) {
        out.push_back(std::move(v));
    }
    for (Verdict& v : check_monotone_limit(LimitKind::negbinomial, mu, m_grid, tol)) {
        v.context.update(ctx);
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Open question fuzzer

FuzzOutcome fuzz_open_problem(std::int64_t budget, std::uint64_t rng_seed, FuzzMode mode, CheckTolerances const& tol)
{
    auto const found = parallel_map(budget, [&](std::int64_t k) -> std::optional<json> {
        auto const seed = derive_seed(rng_seed, kFuzzStream, static_cast<std::uint64_t>(k));
        Rng rng(seed);
        Pmf f_prime;
        Pmf g_prime;
        if (mode == FuzzMode::liggett) {
            double const p = rng.uniform(0.1, 0.9);
            f_prime = realize(FamilySpec::binomial(rng.integer(1, 8), p), tol.eps_trunc);
            g_prime = realize(FamilySpec::binomial(rng.integer(1, 8), p), tol.eps_trunc);
        } else {
            f_prime = instances::random_base(derive_seed(seed, 1, 0), false, tol.eps_trunc);
            g_prime = instances::random_base(derive_seed(seed, 2, 0), false, tol.eps_trunc);
        }
        Pmf f = f_prime;
        Pmf g = g_prime;
        if (mode != FuzzMode::reflexive) {
            f = random_lc_minorant(f_prime, derive_seed(seed, 3, 0), targeted(f_prime, rng));
            g = random_lc_minorant(g_prime, derive_seed(seed, 4, 0), targeted(g_prime, rng));
        }
        if (!lc_le(f, f_prime, tol.lc).verdict || !lc_le(g, g_prime, tol.lc).verdict) {
            return std::nullopt;
        }
        LcReport const r = lc_le(convolve(f, g), convolve(f_prime, g_prime), tol.lc);
        if (r.verdict) {
            return std::nullopt;
        }
        json inst;
        inst["index"] = k;
        inst["seed"] = rng_seed;
        inst["f"] = to_json(f);
        inst["f_prime"] = to_json(f_prime);
        inst["g"] = to_json(g);
        inst["g_prime"] = to_json(g_prime);
        inst["report"] = to_json(r);
        return inst;
    });
    FuzzOutcome out;
    out.tried = budget;
    for (auto const& x : found) {
        if (x) {
            out.counterexamples.push_back(*x);
        }
    }
    return out;
}

LcReport replay_open_problem(json const& instance)
{
    Pmf const f = pmf_from_json(instance.at("f"));
    Pmf const f_prime = pmf_from_json(instance.at("f_prime"));
    Pmf const g = pmf_from_json(instance.at("g"));
    Pmf const g_prime = pmf_from_json(instance.at("g_prime"));
    return lc_le(convolve(f, g), convolve(f_prime, g_prime));
}

// ---------------------------------------------------------------------------
// JSON

json to_json(LcReport const& r)
{
    json j;
    j["verdict"] = r.verdict;
    j["failure_kind"] = std::string(to_string(r.failure_kind));
    j["witness_index"] = r.witness_index ? json(*r.witness_index) : json(nullptr);
    j["margin"] = std::isfinite(r.margin) ? json(r.margin) : json(nullptr);
    j["exact"] = r.exact;
    return j;
}

json to_json(KarlinReport const& r)
{
    json j;
    j["status"] = std::string(to_string(r.status));
    j["sum"] = r.sum;
    j["first_moment"] = r.first_moment;
    j["term_signs"] = r.terms.signs;
    j["partial_sum_signs"] = r.partial_sums.signs;
    j["max_double_partial"] = r.max_double_partial;
    j["terms_ok"] = r.terms_ok;
    j["partial_ok"] = r.partial_ok;
    j["double_ok"] = r.double_ok;
    j["reason"] = r.reason;
    return j;
}

json to_json(ChoiXiaReport const& r)
{
    json j;
    j["lambda"] = r.lambda;
    j["r"] = r.r;
    j["delta"] = r.delta;
    j["condition"] = r.condition;
    j["m_threshold"] = std::isfinite(r.m_threshold) ? json(r.m_threshold) : json("inf");
    j["m"] = r.m;
    j["d_m"] = to_json(r.d_m);
    j["d_m_plus_1"] = to_json(r.d_m1);
    j["v_poisson"] = to_json(r.v_poisson);
    j["status"] = std::string(to_string(r.status));
    j["note"] = r.note;
    return j;
}

json to_json(ApproximationTable const& t)
{
    json j;
    j["family"] = t.family;
    j["mean"] = t.mean;
    json rows = json::array();
    for (auto const& row : t.rows) {
        rows.push_back({{"m", row.m}, {"p", row.p}, {"kl", to_json(row.kl)}});
    }
    j["rows"] = std::move(rows);
    j["argmin_row"] = t.argmin_row;
    j["poisson_row"] = t.poisson_row ? to_json(*t.poisson_row) : json(nullptr);
    json checks = json::array();
    for (Verdict const& v : t.checks) {
        checks.push_back(to_json(v));
    }
    j["checks"] = std::move(checks);
    return j;
}

} // namespace lcorder
