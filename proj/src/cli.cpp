#include "lcorder/cli.hpp"

#include "lcorder/continuous.hpp"
#include "lcorder/divergence.hpp"
#include "lcorder/inequalities.hpp"
#include "lcorder/lc_order.hpp"
#include "lcorder/serialize.hpp"
#include "lcorder/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace lcorder::cli {

using nlohmann::json;

namespace {

constexpr char const* kVerdictSchema = "# lcorder-verdicts v1";
constexpr char const* kSummarySchema = "# lcorder-summary v1";
constexpr char const* kApproxSchema = "# lcorder-approx v1";
constexpr char const* kPmfSchema = "# lcorder-pmf v1";

struct Options
{
    std::uint64_t seed = 1;
    double eps_trunc = kDefaultTruncation;
    double tol_mean = kMeanTolerance;
    double tol_lc = kLcTolerance;
    std::string format = "json";
    std::optional<std::int64_t> instances;
    bool strict = false;
    int grid_nodes = GridSpec{}.nodes;
};

// A spec argument is either inline JSON or a path to a JSON file.
json load_spec(std::string const& arg)
{
    std::string text = arg;
    if (arg.empty() || arg.front() != '{') {
        std::ifstream in(arg);
        if (!in) {
            throw InputError("cannot read spec file \"" + arg + "\"");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    try {
        return json::parse(text);
    } catch (json::parse_error const& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
}

GridSpec grid_spec(Options const& o)
{
    GridSpec s;
    s.nodes = o.grid_nodes;
    return s;
}

CheckTolerances tolerances(Options const& o)
{
    if (!(o.tol_mean > 0.0) || !(o.tol_lc > 0.0) || !(o.eps_trunc > 0.0) || !(o.eps_trunc < 1e-3)) {
        throw InputError("tolerances must be positive and eps-trunc below 1e-3");
    }
    return {o.tol_mean, o.tol_lc, o.eps_trunc};
}

json grid_summary(GridPdf const& f)
{
    std::vector<double> x(f.nodes.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = f.nodes[j] * f.density[j];
    }
    Integral const m = integrate(f, x);
    json j;
    j["header"] = grid_header(f);
    j["mean"] = {{"value", m.value}, {"error_bound", m.error}};
    j["entropy"] = to_json(differential_entropy(f));
    return j;
}

void write_file(std::string const& path, std::string const& text)
{
    std::ofstream file(path);
    if (!file) {
        throw InputError("cannot write \"" + path + "\"");
    }
    file << text;
}

int cmd_dist(Options const& o, std::string const& spec_arg, std::string const& out_path, std::ostream& out)
{
    json const spec = load_spec(spec_arg);
    if (is_continuous_spec(spec)) {
        GridPdf const f = grid_from_json(spec, grid_spec(o));
        std::ostringstream csv;
        write_grid_csv(csv, f);
        if (!out_path.empty()) {
            write_file(out_path, csv.str());
        }
        if (o.format == "csv") {
            out << csv.str();
        } else {
            out << grid_summary(f).dump() << '\n';
        }
        return kExitOk;
    }
    Pmf const f = pmf_from_json(spec, tolerances(o).eps_trunc);
    json const ser = to_json(f);
    if (!out_path.empty()) {
        write_file(out_path, ser.dump(2) + "\n");
    }
    if (o.format == "csv") {
        out << kPmfSchema << '\n' << "i,weight\n" << std::setprecision(17);
        for (std::int64_t i = f.first(); i <= f.last(); ++i) {
            out << i << ',' << f.at(i) << '\n';
        }
        return kExitOk;
    }
    MeanValue const m = mean(f);
    json j;
    j["pmf"] = ser;
    j["mean"] = {{"value", m.value}, {"error_bound", m.error_bound}};
    j["entropy"] = to_json(entropy(f));
    j["support"] = {f.first(), f.infinite_support() ? json("inf") : json(f.last())};
    out << j.dump() << '\n';
    return kExitOk;
}

int cmd_order(Options const& o, std::string const& f_arg, std::string const& g_arg, std::ostream& out)
{
    json const fs = load_spec(f_arg);
    json const gs = load_spec(g_arg);
    LcReport report;
    if (is_continuous_spec(fs) || is_continuous_spec(gs)) {
        if (!is_continuous_spec(fs) || !is_continuous_spec(gs)) {
            throw InputError("order needs two discrete or two continuous specs");
        }
        report = lc_le_continuous(grid_from_json(fs, grid_spec(o)), grid_from_json(gs, grid_spec(o)));
    } else {
        CheckTolerances const tol = tolerances(o);
        report = lc_le(pmf_from_json(fs, tol.eps_trunc), pmf_from_json(gs, tol.eps_trunc), tol.lc);
    }
    json j = to_json(report);
    j["relation"] = "f <=_lc g";
    out << j.dump() << '\n';
    return report.verdict ? kExitOk : kExitViolated;
}

int cmd_div(Options const& o, std::string const& measure, std::string const& f_arg, std::string const& g_arg,
            std::ostream& out)
{
    json const fs = load_spec(f_arg);
    bool const continuous = is_continuous_spec(fs);
    double const eps = tolerances(o).eps_trunc;
    DivergenceValue v;
    if (measure == "entropy") {
        if (!g_arg.empty()) {
            throw InputError("entropy takes a single distribution");
        }
        v = continuous ? differential_entropy(grid_from_json(fs, grid_spec(o))) : entropy(pmf_from_json(fs, eps));
    } else {
        if (g_arg.empty()) {
            throw InputError(measure + " needs two distributions");
        }
        json const gs = load_spec(g_arg);
        if (continuous != is_continuous_spec(gs)) {
            throw InputError("cannot compare a discrete and a continuous distribution");
        }
        if (continuous) {
            if (measure != "kl") {
                throw InputError("continuous inputs support kl and entropy only");
            }
            v = kl_continuous(grid_from_json(fs, grid_spec(o)), grid_from_json(gs, grid_spec(o)));
        } else {
            Pmf const f = pmf_from_json(fs, eps);
            Pmf const g = pmf_from_json(gs, eps);
            v = measure == "kl" ? kl(f, g) : total_variation(f, g);
        }
    }
    json j = to_json(v);
    j["measure"] = measure;
    out << j.dump() << '\n';
    return kExitOk;
}

int cmd_approx(Options const& o, std::string const& kind, std::vector<double> const& probs, double m_max,
               std::ostream& out)
{
    CheckTolerances const tol = tolerances(o);
    if (probs.empty()) {
        throw InputError("approx needs --probs");
    }
    auto const n = static_cast<double>(probs.size());
    double const top = m_max > 0.0 ? m_max : 4.0 * n;
    if (top < n) {
        throw InputError("--m-max must be at least the number of summands");
    }
    ApproximationTable table;
    if (kind == "binomial") {
        std::array const p_grid{0.1, 0.3, 0.5, 0.7, 0.9};
        table = best_binomial(probs, static_cast<std::int64_t>(std::floor(top)), p_grid, tol);
    } else {
        std::vector<double> m_grid;
        for (double m = n; m <= top + 1e-12; m += 0.5) {
            m_grid.push_back(m);
        }
        std::array const r_grid{0.2, 0.5, 0.8};
        table = best_negbinomial(probs, m_grid, r_grid, tol);
    }
    bool const violated = std::any_of(table.checks.begin(), table.checks.end(),
                                      [](Verdict const& v) { return v.status == Status::violated; });
    if (o.format == "json") {
        out << to_json(table).dump() << '\n';
    } else {
        out << kApproxSchema << '\n' << "family,m,p,kl,kl_error\n" << std::setprecision(17);
        for (ApproximationRow const& r : table.rows) {
            out << table.family << ',' << r.m << ',' << r.p << ',' << r.kl.value << ',' << r.kl.error_bound << '\n';
        }
        if (table.poisson_row) {
            out << "poisson,inf," << table.mean << ',' << table.poisson_row->value << ','
                << table.poisson_row->error_bound << '\n';
        }
    }
    return violated ? kExitViolated : kExitOk;
}

std::string csv_number(double x)
{
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

void write_verdict_csv(std::ostream& out, suites::SuiteResult const& r)
{
    out << kVerdictSchema << '\n' << "suite,index,seed,check,status,lhs,lhs_error,rhs,rhs_error,margin\n";
    for (auto const& rec : r.records) {
        for (Verdict const& v : rec.verdicts) {
            out << r.suite << ',' << rec.index << ',' << rec.seed << ',' << v.check << ',' << to_string(v.status)
                << ',' << csv_number(v.lhs.value) << ',' << csv_number(v.lhs.error_bound) << ','
                << csv_number(v.rhs.value) << ',' << csv_number(v.rhs.error_bound) << ',' << csv_number(v.margin)
                << '\n';
        }
    }
}

std::string summary_csv(suites::SuiteResult const& r)
{
    std::ostringstream s;
    s << kSummarySchema << '\n' << "suite,check,holds,violated,inconclusive\n";
    for (auto const& [check, t] : suites::tally(r)) {
        s << r.suite << ',' << check << ',' << t.holds << ',' << t.violated << ',' << t.inconclusive << '\n';
    }
    return s.str();
}

void save_counterexamples(suites::SuiteResult const& r, std::string const& dir)
{
    std::filesystem::create_directories(dir);
    for (auto const& rec : r.records) {
        std::string const mode = rec.extra.value("mode", std::string("run"));
        for (json const& inst : rec.extra.value("counterexamples", json::array())) {
            auto const path = std::filesystem::path(dir) /
                              ("counterexample-" + mode + "-" + std::to_string(inst.at("index").get<std::int64_t>()) +
                               ".json");
            write_file(path.string(), inst.dump(2) + "\n");
        }
    }
}

int cmd_verify(Options const& o, std::string const& suite, std::string const& cx_dir, std::string const& summary_path,
               std::ostream& out, std::ostream& err)
{
    suites::SuiteConfig cfg;
    cfg.seed = o.seed;
    cfg.tol = tolerances(o);
    cfg.instances = o.instances;
    cfg.grid = grid_spec(o);
    suites::SuiteResult const r = suites::run_suite(suite, cfg);
    if (o.format == "csv") {
        write_verdict_csv(out, r);
    } else {
        for (auto const& rec : r.records) {
            for (json const& line : suites::to_json_lines(rec, r.suite)) {
                out << line.dump() << '\n';
            }
        }
        json s;
        s["suite"] = r.suite;
        s["seed"] = o.seed;
        json checks = json::array();
        for (auto const& [check, t] : suites::tally(r)) {
            checks.push_back({{"check", check}, {"holds", t.holds}, {"violated", t.violated},
                              {"inconclusive", t.inconclusive}});
        }
        s["checks"] = checks;
        out << json{{"summary", s}}.dump() << '\n';
    }
    if (!summary_path.empty()) {
        write_file(summary_path, summary_csv(r));
    }
    if (!cx_dir.empty()) {
        save_counterexamples(r, cx_dir);
    }
    suites::Tally const t = suites::total(r);
    err << r.suite << ": " << t.holds << " holds, " << t.violated << " violated, " << t.inconclusive
        << " inconclusive\n";
    if (r.exploratory) {
        return kExitOk;
    }
    if (t.violated > 0 || (o.strict && t.inconclusive > 0)) {
        return kExitViolated;
    }
    return kExitOk;
}

int cmd_replay(std::string const& path, std::ostream& out)
{
    json const inst = load_spec(path);
    if (!inst.is_object() || !inst.contains("report")) {
        throw InputError("not a counterexample record");
    }
    LcReport const r = replay_open_problem(inst);
    json j;
    j["stored"] = inst.at("report");
    j["replayed"] = to_json(r);
    out << j.dump() << '\n';
    return inst.at("report").value("verdict", true) == r.verdict ? kExitOk : kExitViolated;
}

} // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Relative log-concavity toolkit", "lcorder"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--seed", o.seed, "random seed")->envname("LCORDER_SEED");
    app.add_option("--eps-trunc", o.eps_trunc, "truncation budget for infinite supports");
    app.add_option("--tol-mean", o.tol_mean, "means closer than this are equal");
    app.add_option("--tol-lc", o.tol_lc, "relative slack in second differences");
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--instances", o.instances, "instances per suite");
    app.add_flag("--strict", o.strict, "inconclusive verdicts fail the run");
    app.add_option("--grid-nodes", o.grid_nodes, "nodes per continuous grid (4k+1)");

    std::string spec_a;
    std::string spec_b;
    std::string out_path;
    auto* dist = app.add_subcommand("dist", "build a distribution and print its summary");
    dist->add_option("spec", spec_a, "JSON spec or file")->required();
    dist->add_option("--out", out_path, "write the canonical serialization here");

    auto* order = app.add_subcommand("order", "decide f <=_lc g");
    order->add_option("f", spec_a)->required();
    order->add_option("g", spec_b)->required();

    std::string measure = "kl";
    auto* div = app.add_subcommand("div", "entropy, KL divergence or total variation");
    div->add_option("f", spec_a)->required();
    div->add_option("g", spec_b);
    div->add_option("--measure", measure)->check(CLI::IsMember({"kl", "tv", "entropy"}));

    std::string kind = "binomial";
    std::vector<double> probs;
    double m_max = 0.0;
    auto* approx = app.add_subcommand("approx", "best binomial / negative binomial table");
    approx->add_option("--kind", kind)->check(CLI::IsMember({"binomial", "negbinomial"}));
    approx->add_option("--probs", probs, "Bernoulli ps or geometric rs")->required();
    approx->add_option("--m-max", m_max, "largest m (default 4n)");

    std::string suite;
    std::string cx_dir;
    std::string summary_path;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite)->required();
    verify->add_option("--counterexample-dir", cx_dir, "save exploratory findings here");
    verify->add_option("--summary", summary_path, "write the summary CSV here");

    auto* replay = app.add_subcommand("replay", "re-run a saved counterexample");
    replay->add_option("file", spec_a)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*dist) {
            return cmd_dist(o, spec_a, out_path, out);
        }
        if (*order) {
            return cmd_order(o, spec_a, spec_b, out);
        }
        if (*div) {
            return cmd_div(o, measure, spec_a, spec_b, out);
        }
        if (*approx) {
            return cmd_approx(o, kind, probs, m_max, out);
        }
        if (*verify) {
            return cmd_verify(o, suite, cx_dir, summary_path, out, err);
        }
        return cmd_replay(spec_a, out);
    } catch (InputError const& e) {
        err << "input error: " << e.what() << '\n';
    } catch (DomainError const& e) {
        err << "domain error: " << e.what() << '\n';
    } catch (json::exception const& e) {
        err << "input error: " << e.what() << '\n';
    } catch (std::invalid_argument const& e) {
        err << "input error: " << e.what() << '\n';
    } catch (std::filesystem::filesystem_error const& e) {
        err << "input error: " << e.what() << '\n';
    }
    return kExitInput;
}

} // namespace lcorder::cli
