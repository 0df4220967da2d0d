#include "lcorder/continuous.hpp"

#include "lcorder/compensated_sum.hpp"
#include "lcorder/random.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcorder {

using nlohmann::json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAnalyticReach = 1e-6;
constexpr std::uint64_t kPerturbStream = 0x6A33;
constexpr std::uint64_t kMixtureStream = 0x6A37;

void check_node_count(int nodes)
{
    if (nodes < 5 || (nodes - 1) % 4 != 0) {
        throw DomainError("grid needs 4k+1 nodes");
    }
}

double simpson_coefficient(std::size_t j, std::size_t last)
{
    if (j == 0 || j == last) {
        return 1.0;
    }
    return j % 2 == 1 ? 4.0 : 2.0;
}

double step_of(GridPdf const& f)
{
    return (std::log(f.hi) - std::log(f.lo)) / static_cast<double>(f.nodes.size() - 1);
}

// Mass-weighted mean relative error of a grid density.
double mean_relative_error(GridPdf const& f)
{
    CompensatedSum err;
    CompensatedSum mass;
    for (std::size_t j = 0; j < f.nodes.size(); ++j) {
        err += f.weights[j] * f.density_error[j];
        mass += f.weights[j] * f.density[j];
    }
    return mass.value() > 0.0 ? err.value() / mass.value() : kInf;
}

double tail_term(double tail, double log_scale)
{
    if (tail <= 0.0) {
        return 0.0;
    }
    return tail * (2.0 + std::abs(std::log(tail)) + std::abs(log_scale));
}

double edge_log(GridPdf const& f)
{
    double out = 0.0;
    for (double l : {f.log_density.front(), f.log_density.back()}) {
        if (std::isfinite(l)) {
            out = std::max(out, std::abs(l));
        }
    }
    return out;
}

void check_gamma_params(double alpha, double beta)
{
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw DomainError("gamma parameters must be positive");
    }
}

Verdict lc_verdict(std::string check, LcReport const& r, json ctx)
{
    Verdict v;
    v.check = std::move(check);
    v.status = r.verdict ? Status::holds : Status::violated;
    v.lhs = {r.margin, 0.0, true};
    v.rhs = {0.0, 0.0, true};
    v.margin = -r.margin;
    ctx["failure_kind"] = std::string(to_string(r.failure_kind));
    if (r.witness_index) {
        ctx["witness_index"] = *r.witness_index;
    }
    v.context = std::move(ctx);
    return v;
}

} // namespace

GridSpec GridSpec::refined() const
{
    GridSpec s = *this;
    s.nodes = 2 * nodes - 1;
    s.quadrature_points = 2 * quadrature_points - 1;
    return s;
}

double GridPdf::log_density_at(double x) const
{
    if (analytic) {
        return analytic(x);
    }
    if (!(x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12))) {
        return kNegInf;
    }
    double const h = step_of(*this);
    double const t = (std::log(x) - std::log(lo)) / h;
    auto const last = static_cast<std::int64_t>(nodes.size()) - 1;
    auto j = static_cast<std::int64_t>(std::floor(t));
    j = std::clamp<std::int64_t>(j, 0, last - 1);
    double const s = t - static_cast<double>(j);
    auto const at = [&](std::int64_t k) { return log_density[static_cast<std::size_t>(k)]; };
    if (j >= 1 && j + 2 <= last) {
        double const y0 = at(j - 1);
        double const y1 = at(j);
        double const y2 = at(j + 1);
        double const y3 = at(j + 2);
        if (std::isfinite(y0) && std::isfinite(y1) && std::isfinite(y2) && std::isfinite(y3)) {
            // cubic Lagrange through nodes j-1 .. j+2
            return y0 * (-s * (s - 1.0) * (s - 2.0) / 6.0) + y1 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0) +
                   y2 * (-(s + 1.0) * s * (s - 2.0) / 2.0) + y3 * ((s + 1.0) * s * (s - 1.0) / 6.0);
        }
    }
    double const y1 = at(j);
    double const y2 = at(j + 1);
    if (!std::isfinite(y1) || !std::isfinite(y2)) {
        return s < 0.5 ? y1 : y2;
    }
    return y1 + s * (y2 - y1);
}

double GridPdf::relative_error_at(double x) const
{
    if (analytic) {
        return 0.0;
    }
    double const t = (std::log(x) - std::log(lo)) / step_of(*this);
    auto const j = static_cast<std::size_t>(std::clamp(std::lround(t), 0L, static_cast<long>(nodes.size() - 1)));
    return density[j] > 0.0 ? density_error[j] / density[j] : kInf;
}

Integral integrate(GridPdf const& f, std::span<const double> values)
{
    std::size_t const last = f.nodes.size() - 1;
    double const h = step_of(f);
    CompensatedSum fine;
    CompensatedSum coarse;
    for (std::size_t j = 0; j <= last; ++j) {
        fine += f.weights[j] * values[j];
        if (j % 2 == 0) {
            coarse += simpson_coefficient(j / 2, last / 2) * f.nodes[j] * values[j];
        }
    }
    double const c = coarse.value() * 2.0 * h / 3.0;
    return {fine.value(), std::abs(fine.value() - c)};
}

GridPdf grid_from_log_density(double lo, double hi, int nodes, kernels::LogDensity log_density, double tail_bound,
                              std::string label, bool keep_analytic)
{
    check_node_count(nodes);
    if (!(lo > 0.0) || !(hi > lo)) {
        throw DomainError("grid window must satisfy 0 < lo < hi");
    }
    GridPdf f;
    f.lo = lo;
    f.hi = hi;
    f.tail_bound = tail_bound;
    f.label = std::move(label);
    auto const n = static_cast<std::size_t>(nodes);
    double const u0 = std::log(lo);
    double const h = (std::log(hi) - u0) / static_cast<double>(n - 1);
    f.nodes.resize(n);
    f.log_density.resize(n);
    f.density.resize(n);
    f.density_error.assign(n, 0.0);
    f.weights.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        f.nodes[j] = j == n - 1 ? hi : std::exp(u0 + h * static_cast<double>(j));
        f.log_density[j] = log_density(f.nodes[j]);
        f.density[j] = std::exp(f.log_density[j]);
        f.weights[j] = h / 3.0 * simpson_coefficient(j, n - 1) * f.nodes[j];
    }
    if (keep_analytic) {
        f.analytic = std::move(log_density);
    }
    return f;
}

double gamma_log_density(double x, double alpha, double beta)
{
    if (!(x > 0.0)) {
        return kNegInf;
    }
    return -alpha * std::log(beta) + (alpha - 1.0) * std::log(x) - x / beta - boost::math::lgamma(alpha);
}

GridPdf pdf_gamma(double alpha, double beta, GridSpec const& spec)
{
    check_gamma_params(alpha, beta);
    double const lo = beta * boost::math::gamma_p_inv(alpha, spec.eps);
    double const hi = beta * boost::math::gamma_q_inv(alpha, spec.eps);
    double const c = -alpha * std::log(beta) - boost::math::lgamma(alpha);
    auto fn = [alpha, beta, c](double x) {
        return x > 0.0 ? c + (alpha - 1.0) * std::log(x) - x / beta : kNegInf;
    };
    return grid_from_log_density(lo, hi, spec.nodes, fn, 2.0 * spec.eps,
                                 "gamma(" + std::to_string(alpha) + "," + std::to_string(beta) + ")");
}

GridPdf pdf_gamma_mixture(double alpha, std::span<const double> betas, std::span<const double> mix,
                          GridSpec const& spec)
{
    if (betas.empty() || betas.size() != mix.size()) {
        throw DomainError("mixture needs matching, non-empty scales and weights");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < betas.size(); ++j) {
        check_gamma_params(alpha, betas[j]);
        if (!(mix[j] > 0.0)) {
            throw DomainError("mixture weights must be positive");
        }
        total += mix[j];
    }
    double lo = kInf;
    double hi = 0.0;
    std::vector<double> log_w;
    std::vector<double> b(betas.begin(), betas.end());
    for (std::size_t j = 0; j < b.size(); ++j) {
        lo = std::min(lo, b[j] * boost::math::gamma_p_inv(alpha, spec.eps));
        hi = std::max(hi, b[j] * boost::math::gamma_q_inv(alpha, spec.eps));
        log_w.push_back(std::log(mix[j] / total));
    }
    auto fn = [alpha, b, log_w](double x) {
        double top = kNegInf;
        std::vector<double> terms(b.size());
        for (std::size_t j = 0; j < b.size(); ++j) {
            terms[j] = log_w[j] + gamma_log_density(x, alpha, b[j]);
            top = std::max(top, terms[j]);
        }
        if (top == kNegInf) {
            return kNegInf;
        }
        double s = 0.0;
        for (double t : terms) {
            s += std::exp(t - top);
        }
        return top + std::log(s);
    };
    return grid_from_log_density(lo, hi, spec.nodes, fn, 2.0 * spec.eps, "gamma-mixture");
}

GridPdf convolve(GridPdf const& f, GridPdf const& g, GridSpec const& spec)
{
    check_node_count(spec.nodes);
    // X + Y outside [f.lo + g.lo, f.hi + g.hi] needs X or Y outside its window.
    double const lo = f.lo + g.lo;
    double const hi = f.hi + g.hi;
    GridPdf h = grid_from_log_density(lo, hi, spec.nodes, [](double) { return 0.0; }, 0.0, "", false);
    kernels::LogDensity const log_f = [&f](double x) { return f.log_density_at(x); };
    kernels::LogDensity const log_g = [&g](double x) { return g.log_density_at(x); };
    // Closed-form inputs are integrated below their windows too, which
    // recovers most of the truncated lower-tail mass.
    auto const start = [](GridPdf const& a) { return a.is_analytic() ? a.lo * kAnalyticReach : a.lo; };
    kernels::DensityQuadrature const q{start(f), start(g), spec.quadrature_points};
    auto const est = kernels::parallel::convolve_density(h.nodes, log_f, log_g, q);
    double const inherited = mean_relative_error(f) + mean_relative_error(g);
    double const f_max = std::exp(*std::max_element(f.log_density.begin(), f.log_density.end()));
    double const g_max = std::exp(*std::max_element(g.log_density.begin(), g.log_density.end()));
    // Mass of one summand outside its window meets the other density near x
    // (lower tail) or anywhere below x - hi (upper tail, grid inputs only).
    auto const missing = [](GridPdf const& a, GridPdf const& b, double b_max, double x) {
        double near = std::max(std::exp(b.log_density_at(x)), std::exp(b.log_density_at(x - a.lo)));
        if (!a.is_analytic() && x > a.hi) {
            near = std::max(near, b_max);
        }
        return a.tail_bound * near;
    };
    for (std::size_t j = 0; j < est.size(); ++j) {
        double const x = h.nodes[j];
        h.density[j] = est[j].value;
        h.log_density[j] = est[j].value > 0.0 ? std::log(est[j].value) : kNegInf;
        h.density_error[j] =
            est[j].error + inherited * est[j].value + missing(f, g, g_max, x) + missing(g, f, f_max, x);
    }
    h.tail_bound = f.tail_bound + g.tail_bound;
    h.label = "(" + f.label + ")*(" + g.label + ")";
    return h;
}

GridPdf weighted_gamma_sum(std::span<const double> alphas, std::span<const double> betas, GridSpec const& spec)
{
    if (alphas.empty() || alphas.size() != betas.size()) {
        throw DomainError("weighted_gamma_sum needs matching, non-empty alphas and betas");
    }
    GridPdf s = pdf_gamma(alphas[0], betas[0], spec);
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        s = convolve(s, pdf_gamma(alphas[i], betas[i], spec), spec);
    }
    s.label = "weighted_gamma_sum(n=" + std::to_string(alphas.size()) + ")";
    return s;
}

DivergenceValue differential_entropy(GridPdf const& f)
{
    std::size_t const n = f.nodes.size();
    std::vector<double> v(n, 0.0);
    CompensatedSum propagated;
    for (std::size_t j = 0; j < n; ++j) {
        if (f.density[j] > 0.0) {
            v[j] = -f.density[j] * f.log_density[j];
            propagated += f.weights[j] * f.density_error[j] * (std::abs(f.log_density[j]) + 1.0);
        }
    }
    Integral const I = integrate(f, v);
    return {I.value, I.error + propagated.value() + tail_term(f.tail_bound, edge_log(f)), true};
}

DivergenceValue kl_continuous(GridPdf const& f, GridPdf const& g)
{
    std::size_t const n = f.nodes.size();
    std::vector<double> v(n, 0.0);
    CompensatedSum propagated;
    CompensatedSum outside;
    double edge = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(f.density[j] > 0.0)) {
            continue;
        }
        double const x = f.nodes[j];
        double const lg = g.log_density_at(x);
        if (lg == kNegInf) {
            if (g.is_analytic()) {
                return DivergenceValue::infinite();
            }
            outside += f.weights[j] * f.density[j];
            continue;
        }
        double const ratio = f.log_density[j] - lg;
        v[j] = f.density[j] * ratio;
        propagated += f.weights[j] *
                      (f.density_error[j] * (std::abs(ratio) + 1.0) + f.density[j] * g.relative_error_at(x));
        if (j == 0 || j + 1 == n) {
            edge = std::max(edge, std::abs(ratio));
        }
    }
    Integral const I = integrate(f, v);
    DivergenceValue out{I.value, I.error + propagated.value() + tail_term(f.tail_bound, edge), true};
    if (outside.value() > 1e-6) {
        return DivergenceValue::infinite();
    }
    if (outside.value() > 0.0) {
        out.error_bound += tail_term(outside.value(), edge);
    }
    return out;
}

LcReport lc_le_continuous(GridPdf const& f, GridPdf const& g, double tol)
{
    GridPdf const& grid = (f.is_analytic() && !g.is_analytic()) ? g : f;
    double const lo = std::max(f.lo, g.lo);
    double const hi = std::min(f.hi, g.hi);
    struct Point
    {
        std::size_t index;
        double x;
        double lf;
        double lg;
        double noise;
    };
    std::vector<Point> pts;
    for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
        double const x = grid.nodes[j];
        if (x < lo || x > hi) {
            continue;
        }
        double const lf = f.log_density_at(x);
        double const lg = g.log_density_at(x);
        double const noise = f.relative_error_at(x) + g.relative_error_at(x);
        pts.push_back({j, x, lf, lg, noise});
    }
    LcReport report;
    report.exact = false;
    if (pts.empty()) {
        report.verdict = false;
        report.failure_kind = LcFailure::support_not_contained;
        return report;
    }
    // Zero densities at the window ends are underflow; inside they are holes.
    std::size_t a = 0;
    std::size_t b = pts.size();
    auto const usable = [](Point const& p) { return std::isfinite(p.lf) && std::isfinite(p.lg); };
    while (a < b && !usable(pts[a])) {
        ++a;
    }
    while (b > a && !usable(pts[b - 1])) {
        --b;
    }
    for (std::size_t k = a; k < b; ++k) {
        if (!std::isfinite(pts[k].lf)) {
            report.verdict = false;
            report.failure_kind = LcFailure::f_support_not_interval;
            report.witness_index = static_cast<std::int64_t>(pts[k].index);
            return report;
        }
        if (!std::isfinite(pts[k].lg)) {
            report.verdict = false;
            report.failure_kind = LcFailure::support_not_contained;
            report.witness_index = static_cast<std::int64_t>(pts[k].index);
            return report;
        }
    }
    report.margin = -kInf;
    double worst = 0.0;
    for (std::size_t k = a + 1; k + 1 < b; ++k) {
        Point const& p0 = pts[k - 1];
        Point const& p1 = pts[k];
        Point const& p2 = pts[k + 1];
        double const hm = p1.x - p0.x;
        double const hp = p2.x - p1.x;
        double const l0 = p0.lf - p0.lg;
        double const l1 = p1.lf - p1.lg;
        double const l2 = p2.lf - p2.lg;
        double const chord = (hp * l0 + hm * l2) / (hm + hp);
        double const defect = chord - l1;
        report.margin = std::max(report.margin, defect);
        double const allowed =
            tol * (1.0 + std::abs(p1.lf) + std::abs(p1.lg)) + p0.noise + p1.noise + p2.noise;
        double const excess = defect - allowed;
        if (excess > 0.0 && excess > worst) {
            worst = excess;
            report.verdict = false;
            report.failure_kind = LcFailure::concavity_violated;
            report.witness_index = static_cast<std::int64_t>(p1.index);
        }
    }
    if (b - a < 3) {
        report.margin = 0.0;
    }
    return report;
}

Verdict check_gamma_minentropy(std::span<const double> alphas, std::span<const double> betas, int n_perturbations,
                               std::uint64_t rng_seed, GridSpec const& spec)
{
    if (alphas.empty() || alphas.size() != betas.size()) {
        throw DomainError("alphas and betas must be non-empty and of equal length");
    }
    json ctx;
    ctx["alphas"] = std::vector<double>(alphas.begin(), alphas.end());
    ctx["betas"] = std::vector<double>(betas.begin(), betas.end());
    if (std::any_of(alphas.begin(), alphas.end(), [](double a) { return a < 1.0; })) {
        return inconclusive("gamma-minent", "every alpha must be at least 1", ctx);
    }
    double m = 0.0;
    double a_plus = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        check_gamma_params(alphas[i], betas[i]);
        m += alphas[i] * betas[i];
        a_plus += alphas[i];
    }
    DivergenceValue const h_equal = differential_entropy(pdf_gamma(a_plus, m / a_plus, spec));
    std::vector<Verdict> verdicts;
    for (int k = 0; k < n_perturbations; ++k) {
        Rng rng(derive_seed(rng_seed, kPerturbStream, static_cast<std::uint64_t>(k)));
        std::vector<double> b(betas.begin(), betas.end());
        double mk = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] *= std::exp(rng.uniform(-1.0, 1.0));
            mk += alphas[i] * b[i];
        }
        for (double& x : b) {
            x *= m / mk;
        }
        json c;
        c["perturbation"] = k;
        c["perturbed_betas"] = b;
        verdicts.push_back(judge("gamma-minent", differential_entropy(weighted_gamma_sum(alphas, b, spec)), h_equal, c));
    }
    Verdict out = aggregate("gamma-minent", verdicts);
    out.context.update(ctx);
    return out;
}

std::vector<Verdict> check_gamma_triangle(std::span<const double> alphas, std::span<const double> betas,
                                          std::span<const double> a_grid, std::span<const double> b_grid,
                                          GridSpec const& spec)
{
    if (alphas.empty() || alphas.size() != betas.size()) {
        throw DomainError("alphas and betas must be non-empty and of equal length");
    }
    double m = 0.0;
    double a_plus = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        check_gamma_params(alphas[i], betas[i]);
        m += alphas[i] * betas[i];
        a_plus += alphas[i];
    }
    std::vector<double> as(a_grid.begin(), a_grid.end());
    std::sort(as.begin(), as.end());
    if (as.empty() || as.front() < a_plus * (1.0 - 1e-12)) {
        throw DomainError("every a must be at least the alpha total");
    }
    GridPdf const fs = weighted_gamma_sum(alphas, betas, spec);
    DivergenceValue const d_base = kl_continuous(fs, pdf_gamma(a_plus, m / a_plus, spec));
    std::vector<GridPdf> ga;
    std::vector<DivergenceValue> d_ga;
    for (double a : as) {
        ga.push_back(pdf_gamma(a, m / a, spec));
        d_ga.push_back(kl_continuous(fs, ga.back()));
    }
    json ctx;
    ctx["alphas"] = std::vector<double>(alphas.begin(), alphas.end());
    ctx["betas"] = std::vector<double>(betas.begin(), betas.end());
    std::vector<Verdict> out;
    for (std::size_t k = 0; k < as.size(); ++k) {
        json c = ctx;
        c["a"] = as[k];
        out.push_back(judge("gamma-chain", d_ga[k], d_base, c));
        for (std::size_t k2 = k; k2 < as.size(); ++k2) {
            for (double b : b_grid) {
                GridPdf const h = pdf_gamma(as[k2], b, spec);
                json c2 = c;
                c2["a_prime"] = as[k2];
                c2["b"] = b;
                out.push_back(judge("gamma-three-term", kl_continuous(fs, h), d_ga[k] + kl_continuous(ga[k], h), c2));
            }
        }
    }
    return out;
}

Verdict check_gamma_lower_bound(std::span<const double> alphas, std::span<const double> betas, GridSpec const& spec)
{
    GridPdf const fs = weighted_gamma_sum(alphas, betas, spec);
    double m = 0.0;
    double a_plus = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        m += alphas[i] * betas[i];
        a_plus += alphas[i];
    }
    json ctx;
    ctx["alphas"] = std::vector<double>(alphas.begin(), alphas.end());
    ctx["betas"] = std::vector<double>(betas.begin(), betas.end());
    // The scale of the gamma only adds a linear term to the log ratio.
    return lc_verdict("gamma-lower-bound", lc_le_continuous(pdf_gamma(a_plus, m / a_plus, spec), fs), ctx);
}

Verdict check_gamma_convolution(double a1, double a2, std::uint64_t rng_seed, GridSpec const& spec)
{
    check_gamma_params(a1, 1.0);
    check_gamma_params(a2, 1.0);
    auto const draw = [&](std::uint64_t stream) {
        Rng rng(derive_seed(rng_seed, kMixtureStream, stream));
        auto const k = rng.integer(1, 3);
        std::vector<double> b;
        std::vector<double> w;
        for (std::int64_t j = 0; j < k; ++j) {
            b.push_back(rng.uniform(0.3, 3.0));
            w.push_back(rng.uniform(0.2, 1.0));
        }
        return std::pair{b, w};
    };
    auto const [bf, wf] = draw(0);
    auto const [bg, wg] = draw(1);
    GridPdf const f = pdf_gamma_mixture(a1, bf, wf, spec);
    GridPdf const g = pdf_gamma_mixture(a2, bg, wg, spec);
    json ctx;
    ctx["a1"] = a1;
    ctx["a2"] = a2;
    ctx["f_scales"] = bf;
    ctx["g_scales"] = bg;
    if (!lc_le_continuous(pdf_gamma(a1, 1.0, spec), f).verdict ||
        !lc_le_continuous(pdf_gamma(a2, 1.0, spec), g).verdict) {
        return inconclusive("gamma-convolution", "order hypothesis failed", ctx);
    }
    GridPdf const fg = convolve(f, g, spec);
    double mean_fg = 0.0;
    double wsum_f = 0.0;
    double wsum_g = 0.0;
    for (std::size_t j = 0; j < bf.size(); ++j) {
        mean_fg += a1 * bf[j] * wf[j];
        wsum_f += wf[j];
    }
    mean_fg /= wsum_f;
    double mg = 0.0;
    for (std::size_t j = 0; j < bg.size(); ++j) {
        mg += a2 * bg[j] * wg[j];
        wsum_g += wg[j];
    }
    mean_fg += mg / wsum_g;
    GridPdf const bound = pdf_gamma(a1 + a2, mean_fg / (a1 + a2), spec);
    return lc_verdict("gamma-convolution", lc_le_continuous(bound, fg), ctx);
}

json grid_header(GridPdf const& f)
{
    json j;
    j["lo"] = f.lo;
    j["hi"] = f.hi;
    j["nodes"] = f.nodes.size();
    j["quadrature"] = f.quadrature;
    j["tail_bound"] = f.tail_bound;
    j["label"] = f.label;
    j["analytic"] = f.is_analytic();
    return j;
}

} // namespace lcorder
