#include "lcorder/suites.hpp"

#include "lcorder/divergence.hpp"
#include "lcorder/instances.hpp"
#include "lcorder/parallel.hpp"
#include "lcorder/random.hpp"
#include "lcorder/serialize.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace lcorder::suites {

using nlohmann::json;

namespace {

constexpr std::uint64_t stream_of(std::string_view name)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t instance_seed(SuiteConfig const& cfg, std::string_view stream, std::int64_t k)
{
    return derive_seed(cfg.seed, stream_of(stream), static_cast<std::uint64_t>(k));
}

template <typename Fn>
std::vector<InstanceRecord> per_instance(SuiteConfig const& cfg, std::string_view stream, std::int64_t n, Fn&& fn)
{
    return parallel_map(n, [&](std::int64_t k) {
        InstanceRecord r;
        r.index = k;
        r.seed = instance_seed(cfg, stream, k);
        fn(r);
        return r;
    });
}

json chain_json(instances::Chain const& c)
{
    json j;
    j["base"] = c.base;
    j["side"] = c.side == instances::MeanSide::left ? "left" : "right";
    json links = json::array();
    for (Pmf const& f : c.links) {
        links.push_back(to_json(f));
    }
    j["links"] = links;
    return j;
}

// Triangle chains; the karlin suite reuses them through the same stream.
instances::Chain triangle_chain(std::uint64_t seed, std::int64_t k, double eps)
{
    auto const side = k % 2 == 0 ? instances::MeanSide::left : instances::MeanSide::right;
    return instances::random_chain(seed, 3, side, eps);
}

SuiteResult triangle(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"triangle", {}, false};
    out.records = per_instance(cfg, "triangle", n, [&](InstanceRecord& r) {
        auto const chain = triangle_chain(r.seed, r.index, cfg.tol.eps_trunc);
        Pmf const& f = chain.links[0];
        Pmf const& g = chain.links[1];
        Pmf const& h = chain.links[2];
        r.verdicts.push_back(check_triangle(f, g, h, cfg.tol));
        DivergenceValue const dfh = kl(f, h);
        DivergenceValue const dfg = kl(f, g);
        DivergenceValue const dgh = kl(g, h);
        double const residual = dfh.value - dfg.value - dgh.value - triangle_cross_term(f, g, h);
        json c;
        c["residual"] = residual;
        r.verdicts.push_back(within_tolerance("margin-identity", residual, 1e-10, c));
        r.extra["chain"] = chain_json(chain);
    });
    return out;
}

SuiteResult quadrangle(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"quadrangle", {}, false};
    out.records = per_instance(cfg, "quadrangle", n, [&](InstanceRecord& r) {
        auto const side = r.index % 2 == 0 ? instances::MeanSide::left : instances::MeanSide::right;
        auto const chain = instances::random_chain(r.seed, 4, side, cfg.tol.eps_trunc);
        auto const& l = chain.links;
        r.verdicts.push_back(check_quadrangle(l[0], l[1], l[2], l[3], cfg.tol));
        // g = g2 collapses to the triangle on the pair that shares a mean.
        Pmf const& mid = side == instances::MeanSide::left ? l[1] : l[2];
        Verdict const q = check_quadrangle(l[0], mid, mid, l[3], cfg.tol);
        Verdict const t = check_triangle(l[0], mid, l[3], cfg.tol);
        json c;
        c["quadrangle_margin"] = q.margin;
        c["triangle_margin"] = t.margin;
        double const diff = std::isfinite(q.margin) && std::isfinite(t.margin) ? q.margin - t.margin : NAN;
        r.verdicts.push_back(std::isnan(diff) ? inconclusive("quadrangle-specialization", "non-finite margin", c)
                                              : within_tolerance("quadrangle-specialization", diff, 1e-12, c));
        r.extra["chain"] = chain_json(chain);
    });
    return out;
}

std::vector<Pmf> maxent_targets(double eps)
{
    std::vector<Pmf> out;
    for (std::int64_t n = 1; n <= 12; ++n) {
        for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            out.push_back(realize(FamilySpec::binomial(n, p), eps));
        }
    }
    for (int k = 1; k <= 12; ++k) {
        out.push_back(realize(FamilySpec::poisson(0.5 * k), eps));
    }
    return out;
}

SuiteResult maxent(SuiteConfig const& cfg, std::int64_t draws)
{
    SuiteResult out{"maxent", {}, false};
    auto const targets = maxent_targets(cfg.tol.eps_trunc);
    auto const n = static_cast<std::int64_t>(targets.size());
    out.records = per_instance(cfg, "maxent", n, [&](InstanceRecord& r) {
        Pmf const& g = targets[static_cast<std::size_t>(r.index)];
        r.verdicts.push_back(check_maxent(g, static_cast<int>(draws), r.seed, cfg.tol));
        if (!g.infinite_support()) {
            r.verdicts.push_back(check_minent(g, static_cast<int>(draws), mix_seed(r.seed), cfg.tol));
        }
        r.extra["g"] = g.label();
        r.extra["draws"] = draws;
    });
    return out;
}

SuiteResult approx_binomial(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"approx-binomial", {}, false};
    out.records = per_instance(cfg, "approx-binomial", n, [&](InstanceRecord& r) {
        Rng rng(r.seed);
        auto const len = static_cast<std::size_t>(rng.integer(1, 10));
        auto const ps = instances::random_probabilities(mix_seed(r.seed), len, 0.05, 0.95);
        r.verdicts = scenario_bernoulli(ps, cfg.tol);
        r.extra["ps"] = ps;
    });
    return out;
}

SuiteResult approx_negbinomial(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"approx-negbinomial", {}, false};
    out.records = per_instance(cfg, "approx-negbinomial", n, [&](InstanceRecord& r) {
        Rng rng(r.seed);
        auto const len = static_cast<std::size_t>(rng.integer(1, 6));
        auto const rs = instances::random_probabilities(mix_seed(r.seed), len, 0.2, 0.9);
        r.verdicts = scenario_geometric(rs, cfg.tol);
        r.extra["rs"] = rs;
    });
    return out;
}

// Largest |a_i - b_i| over indices where both pmfs are exact.
double exact_gap(Pmf const& a, Pmf const& b)
{
    std::int64_t const lo = std::min(a.first(), b.first());
    std::int64_t const hi = std::min(a.exact_last(), b.exact_last());
    double gap = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i) {
        gap = std::max(gap, std::abs(a.at(i) - b.at(i)));
    }
    return gap;
}

SuiteResult closure(SuiteConfig const& cfg, std::int64_t per_kind)
{
    SuiteResult out{"closure", {}, false};
    constexpr std::array kinds{ClosureKind::liggett, ClosureKind::davenport_polya, ClosureKind::poisson_limit_ulc,
                               ClosureKind::poisson_limit_lcx};
    out.records = per_instance(cfg, "closure", per_kind * 4, [&](InstanceRecord& r) {
        ClosureKind const kind = kinds[static_cast<std::size_t>(r.index % 4)];
        ClosureParams const params = ClosureParams::random(kind, r.seed);
        r.verdicts.push_back(check_convolution_closure(kind, params, mix_seed(r.seed), cfg.tol));
        json c = params.to_json();
        if (kind == ClosureKind::liggett) {
            Pmf const a = realize(FamilySpec::binomial(params.k, params.p));
            Pmf const b = realize(FamilySpec::binomial(params.m, params.p));
            Pmf const ab = realize(FamilySpec::binomial(params.k + params.m, params.p));
            r.verdicts.push_back(within_tolerance("closure-exact", exact_gap(convolve(a, b), ab), 1e-10, c));
        } else if (kind == ClosureKind::davenport_polya) {
            double const eps = cfg.tol.eps_trunc;
            Pmf const a = realize(FamilySpec::negbinomial(static_cast<double>(params.k), params.p), eps);
            Pmf const b = realize(FamilySpec::negbinomial(static_cast<double>(params.m), params.p), eps);
            Pmf const ab = realize(FamilySpec::negbinomial(static_cast<double>(params.k + params.m), params.p), eps);
            r.verdicts.push_back(within_tolerance("closure-exact", exact_gap(convolve(a, b), ab), 1e-10, c));
        }
        r.extra["kind"] = std::string(to_string(kind));
        r.extra["params"] = c;
    });
    return out;
}

Verdict karlin_verdict(Pmf const& f, Pmf const& g, CheckTolerances const& tol)
{
    auto const a = difference_sequence(f, g);
    KarlinReport const rep = karlin_partial_sums(a, tol.mean);
    Verdict v;
    v.check = "karlin";
    v.status = rep.status;
    v.lhs = {0.0, 0.0, true};
    v.rhs = {rep.max_double_partial, 0.0, true};
    v.margin = -rep.max_double_partial;
    v.context = to_json(rep);
    v.context["offset"] = std::min(f.first(), g.first());
    return v;
}

SuiteResult karlin(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"karlin", {}, false};
    out.records = per_instance(cfg, "triangle", n, [&](InstanceRecord& r) {
        auto const chain = triangle_chain(r.seed, r.index, cfg.tol.eps_trunc);
        auto const& l = chain.links;
        // the partial-sum test applies to the pair that shares a mean
        if (chain.side == instances::MeanSide::left) {
            r.verdicts.push_back(karlin_verdict(l[0], l[1], cfg.tol));
        } else {
            r.verdicts.push_back(karlin_verdict(l[1], l[2], cfg.tol));
        }
    });
    return out;
}

std::vector<std::pair<std::string, std::vector<double>>> concave_tables(double centre, std::int64_t len)
{
    std::vector<std::pair<std::string, std::vector<double>>> out;
    auto table = [&](std::string name, std::function<double(double)> w) {
        std::vector<double> t(static_cast<std::size_t>(len));
        for (std::int64_t i = 0; i < len; ++i) {
            t[static_cast<std::size_t>(i)] = w(static_cast<double>(i));
        }
        out.emplace_back(std::move(name), std::move(t));
    };
    table("linear", [](double i) { return i; });
    table("negative-quadratic", [centre](double i) { return -(i - centre) * (i - centre); });
    table("capped-linear", [centre](double i) { return std::min(i, std::floor(centre)); });
    table("log1p", [](double i) { return std::log1p(i); });
    table("min", [centre](double i) { return std::min(2.0 * i, centre + 0.5 * i); });
    return out;
}

SuiteResult concave(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"concave", {}, false};
    out.records = per_instance(cfg, "concave", n, [&](InstanceRecord& r) {
        auto const chain = instances::random_chain(r.seed, 2, instances::MeanSide::left, cfg.tol.eps_trunc);
        Pmf const& f = chain.links[0];
        Pmf const& g = chain.links[1];
        std::int64_t const len = std::max(f.last(), g.last()) + 1;
        for (auto const& [name, w] : concave_tables(lcorder::mean(g).value, len)) {
            Verdict v = check_concave_dominance(f, g, w, cfg.tol);
            v.context["weight"] = name;
            r.verdicts.push_back(v);
            if (name == "linear") {
                json c;
                c["weight"] = name;
                r.verdicts.push_back(within_tolerance("concave-linear-margin", v.margin, 1e-10, c));
            }
        }
        r.extra["chain"] = chain_json(chain);
    });
    return out;
}

SuiteResult ehm_choi_xia(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"ehm-choi-xia", {}, false};
    out.records = per_instance(cfg, "ehm-choi-xia", n + 1, [&](InstanceRecord& r) {
        if (r.index == n) {
            std::vector<double> const ps(12, 0.5);
            ChoiXiaReport const rep = check_choi_xia(ps, 12);
            Verdict v;
            v.check = "choi-xia";
            v.status = rep.status;
            v.lhs = rep.d_m1;
            v.rhs = rep.d_m;
            v.margin = rep.d_m1.value - rep.d_m.value;
            v.context = to_json(rep);
            r.verdicts.push_back(v);
            double const err = std::max({rep.d_m.error_bound, rep.d_m1.error_bound, rep.v_poisson.error_bound});
            json c;
            c["max_error_bound"] = err;
            r.verdicts.push_back(
                from_bool("choi-xia-precision", err <= 1e-10 && rep.d_m.finite && rep.d_m1.finite, c));
            return;
        }
        Rng rng(r.seed);
        auto const len = static_cast<std::size_t>(rng.integer(1, 12));
        auto const ps = instances::random_probabilities(mix_seed(r.seed), len, 0.05, 0.95);
        double lambda = 0.0;
        for (double p : ps) {
            lambda += p;
        }
        Pmf const f = bernoulli_sum(ps);
        auto const trials = static_cast<std::int64_t>(ps.size());
        Pmf const bin = realize(FamilySpec::binomial(trials, lambda / static_cast<double>(trials)));
        json c;
        c["ps"] = ps;
        r.verdicts.push_back(judge("ehm-bound", {ehm_bound(ps), 0.0, true}, total_variation(f, bin), c));
    });
    return out;
}

SuiteResult iprojection(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"iprojection", {}, false};
    out.records = per_instance(cfg, "iprojection", n, [&](InstanceRecord& r) {
        auto const chain = instances::random_chain(r.seed, 3, instances::MeanSide::left, cfg.tol.eps_trunc);
        r.verdicts.push_back(check_iprojection(chain.links[1], chain.links[2], 20, mix_seed(r.seed), cfg.tol));
        r.extra["chain"] = chain_json(chain);
    });
    return out;
}

double gamma_entropy(double a, double b)
{
    return a + std::log(b) + boost::math::lgamma(a) + (1.0 - a) * boost::math::digamma(a);
}

double gamma_kl(double a1, double b1, double a2, double b2)
{
    return (a1 - a2) * boost::math::digamma(a1) - boost::math::lgamma(a1) + boost::math::lgamma(a2) +
           a2 * (std::log(b2) - std::log(b1)) + a1 * (b1 - b2) / b2;
}

void gamma_oracles(InstanceRecord& r, GridSpec const& grid)
{
    for (auto [a, b] : {std::pair{0.5, 1.0}, {1.0, 2.0}, {2.0, 1.0}, {3.5, 0.7}, {7.5, 1.3}}) {
        DivergenceValue const h = differential_entropy(pdf_gamma(a, b, grid));
        json c;
        c["alpha"] = a;
        c["beta"] = b;
        c["value"] = h.value;
        c["oracle"] = gamma_entropy(a, b);
        r.verdicts.push_back(within_tolerance("gamma-entropy-oracle", h.value - gamma_entropy(a, b), 1e-4, c));
    }
    for (auto [a1, b1, a2, b2] : {std::array{2.0, 1.0, 2.0, 2.0}, {1.5, 1.0, 3.0, 0.8}, {4.0, 0.5, 2.5, 1.0}}) {
        DivergenceValue const d = kl_continuous(pdf_gamma(a1, b1, grid), pdf_gamma(a2, b2, grid));
        double const oracle = gamma_kl(a1, b1, a2, b2);
        json c;
        c["f"] = {a1, b1};
        c["g"] = {a2, b2};
        c["value"] = d.value;
        c["oracle"] = oracle;
        r.verdicts.push_back(within_tolerance("gamma-kl-oracle", d.value - oracle, 1e-4, c));
    }
    // hypoexponential: exponentials with scales 1 and 2
    std::vector<double> const ones{1.0, 1.0};
    std::vector<double> const scales{1.0, 2.0};
    GridPdf const s = weighted_gamma_sum(ones, scales, grid);
    double worst = 0.0;
    bool covered = true;
    for (std::size_t j = 0; j < s.nodes.size(); ++j) {
        double const x = s.nodes[j];
        double const exact = std::exp(-x / 2.0) - std::exp(-x);
        double const gap = std::abs(s.density[j] - exact);
        worst = std::max(worst, gap);
        covered = covered && gap <= s.density_error[j] + 1e-12 * exact;
    }
    json c;
    c["max_abs_gap"] = worst;
    r.verdicts.push_back(from_bool("hypoexponential-oracle", covered && worst <= 1e-4, c));
}

void within_halving(InstanceRecord& r, std::string name, DivergenceValue const& a, DivergenceValue const& b)
{
    json c;
    c["coarse"] = to_json(a);
    c["fine"] = to_json(b);
    r.verdicts.push_back(within_tolerance(std::move(name), a.value - b.value, a.error_bound + b.error_bound, c));
}

SuiteResult gamma(SuiteConfig const& cfg, std::int64_t n)
{
    SuiteResult out{"gamma", {}, false};
    GridSpec coarse = cfg.grid;
    coarse.nodes = (cfg.grid.nodes - 1) / 4 + 1;
    coarse.quadrature_points = (cfg.grid.quadrature_points - 1) / 2 + 1;
    // The grid convolutions parallelise over output nodes, so configurations
    // run one after another.
    for (std::int64_t k = 0; k <= n; ++k) {
        InstanceRecord r;
        r.index = k;
        r.seed = instance_seed(cfg, "gamma", k);
        if (k == n) {
            gamma_oracles(r, cfg.grid);
            out.records.push_back(std::move(r));
            break;
        }
        Rng rng(r.seed);
        auto const len = static_cast<std::size_t>(rng.integer(1, 3));
        std::vector<double> alphas;
        std::vector<double> betas;
        for (std::size_t i = 0; i < len; ++i) {
            alphas.push_back(rng.uniform(1.0, 3.0));
            betas.push_back(rng.uniform(0.5, 2.0));
        }
        double a_plus = 0.0;
        double m = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            a_plus += alphas[i];
            m += alphas[i] * betas[i];
        }
        r.extra["alphas"] = alphas;
        r.extra["betas"] = betas;
        r.verdicts.push_back(check_gamma_minentropy(alphas, betas, 10, mix_seed(r.seed), cfg.grid));
        std::vector<double> const a_grid{a_plus, a_plus + 1.0, 2.0 * a_plus};
        double const b0 = m / a_plus;
        std::vector<double> const b_grid{0.5 * b0, b0, 2.0 * b0};
        for (Verdict& v : check_gamma_triangle(alphas, betas, a_grid, b_grid, cfg.grid)) {
            r.verdicts.push_back(std::move(v));
        }
        r.verdicts.push_back(check_gamma_lower_bound(alphas, betas, cfg.grid));
        r.verdicts.push_back(check_gamma_convolution(alphas[0], a_plus, mix_seed(r.seed + 1), coarse));

        GridPdf const fs = weighted_gamma_sum(alphas, betas, cfg.grid);
        GridPdf const fs_fine = weighted_gamma_sum(alphas, betas, cfg.grid.refined());
        GridPdf const g = pdf_gamma(a_plus, b0, cfg.grid);
        GridPdf const g_fine = pdf_gamma(a_plus, b0, cfg.grid.refined());
        within_halving(r, "grid-halving-entropy", differential_entropy(fs), differential_entropy(fs_fine));
        within_halving(r, "grid-halving-kl", kl_continuous(fs, g), kl_continuous(fs_fine, g_fine));
        out.records.push_back(std::move(r));
    }
    return out;
}

SuiteResult open_problem_fuzz(SuiteConfig const& cfg, std::int64_t budget)
{
    SuiteResult out{"open-problem-fuzz", {}, true};
    constexpr std::array modes{FuzzMode::unconstrained, FuzzMode::reflexive, FuzzMode::liggett};
    constexpr std::array names{"unconstrained", "reflexive", "liggett"};
    for (std::size_t k = 0; k < modes.size(); ++k) {
        std::uint64_t const seed = instance_seed(cfg, "open-problem-fuzz", static_cast<std::int64_t>(k));
        FuzzOutcome const res = fuzz_open_problem(budget, seed, modes[k], cfg.tol);
        InstanceRecord r;
        r.index = static_cast<std::int64_t>(k);
        r.seed = seed;
        r.extra["mode"] = names[k];
        r.extra["tried"] = res.tried;
        r.extra["counterexamples"] = res.counterexamples;
        out.records.push_back(std::move(r));
    }
    return out;
}

using Runner = SuiteResult (*)(SuiteConfig const&, std::int64_t);

struct Entry
{
    std::string name;
    Runner run;
    std::int64_t instances;
};

std::vector<Entry> const& registry()
{
    static std::vector<Entry> const entries{
        {"triangle", triangle, 500},
        {"quadrangle", quadrangle, 500},
        {"maxent", maxent, 200},
        {"approx-binomial", approx_binomial, 50},
        {"approx-negbinomial", approx_negbinomial, 50},
        {"closure", closure, 500},
        {"karlin", karlin, 500},
        {"concave", concave, 200},
        {"ehm-choi-xia", ehm_choi_xia, 500},
        {"iprojection", iprojection, 100},
        {"gamma", gamma, 5},
        {"open-problem-fuzz", open_problem_fuzz, 2000},
    };
    return entries;
}

Entry const& find(std::string const& name)
{
    for (Entry const& e : registry()) {
        if (e.name == name) {
            return e;
        }
    }
    throw InputError("unknown suite \"" + name + "\"");
}

} // namespace

std::vector<std::string> const& suite_names()
{
    static std::vector<std::string> const names = [] {
        std::vector<std::string> out;
        for (Entry const& e : registry()) {
            out.push_back(e.name);
        }
        return out;
    }();
    return names;
}

std::int64_t default_instances(std::string const& suite)
{
    return find(suite).instances;
}

SuiteResult run_suite(std::string const& name, SuiteConfig const& cfg)
{
    Entry const& e = find(name);
    std::int64_t const n = cfg.instances.value_or(e.instances);
    if (n < 0) {
        throw InputError("instance count must be non-negative");
    }
    return e.run(cfg, n);
}

std::vector<std::pair<std::string, Tally>> tally(SuiteResult const& r)
{
    std::vector<std::pair<std::string, Tally>> out;
    for (InstanceRecord const& rec : r.records) {
        for (Verdict const& v : rec.verdicts) {
            auto it = std::find_if(out.begin(), out.end(), [&](auto const& p) { return p.first == v.check; });
            if (it == out.end()) {
                out.emplace_back(v.check, Tally{});
                it = std::prev(out.end());
            }
            switch (v.status) {
            case Status::holds: ++it->second.holds; break;
            case Status::violated: ++it->second.violated; break;
            case Status::inconclusive: ++it->second.inconclusive; break;
            }
        }
    }
    return out;
}

Tally total(SuiteResult const& r)
{
    Tally t;
    for (auto const& [name, c] : tally(r)) {
        t.holds += c.holds;
        t.violated += c.violated;
        t.inconclusive += c.inconclusive;
    }
    return t;
}

std::vector<json> to_json_lines(InstanceRecord const& r, std::string const& suite)
{
    json head;
    head["suite"] = suite;
    head["index"] = r.index;
    head["seed"] = r.seed;
    std::vector<json> out;
    if (r.verdicts.empty()) {
        json line = head;
        for (auto const& [k, v] : r.extra.items()) {
            line[k] = v;
        }
        out.push_back(std::move(line));
        return out;
    }
    for (Verdict const& v : r.verdicts) {
        json line = head;
        json const fields = lcorder::to_json(v);
        for (auto const& [k, x] : fields.items()) {
            line[k] = x;
        }
        if (v.status != Status::holds && !r.extra.empty()) {
            line["instance"] = r.extra;
        }
        out.push_back(std::move(line));
    }
    return out;
}

} // namespace lcorder::suites
