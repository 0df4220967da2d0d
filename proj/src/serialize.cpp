#include "lcorder/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

namespace lcorder {

using nlohmann::json;

namespace {

json const& field(json const& j, char const* name)
{
    if (!j.is_object() || !j.contains(name)) {
        throw InputError(std::string("spec is missing \"") + name + "\"");
    }
    return j.at(name);
}

double number(json const& j, char const* name)
{
    json const& v = field(j, name);
    if (!v.is_number()) {
        throw InputError(std::string("\"") + name + "\" must be a number");
    }
    return v.get<double>();
}

std::vector<double> numbers(json const& j, char const* name)
{
    json const& v = field(j, name);
    if (!v.is_array()) {
        throw InputError(std::string("\"") + name + "\" must be an array of numbers");
    }
    std::vector<double> out;
    for (json const& x : v) {
        if (x.is_number()) {
            out.push_back(x.get<double>());
        } else if (x.is_string() && x.get<std::string>() == "-inf") {
            out.push_back(-std::numeric_limits<double>::infinity());
        } else {
            throw InputError(std::string("\"") + name + "\" must be an array of numbers");
        }
    }
    return out;
}

std::int64_t integer(json const& j, char const* name)
{
    double const v = number(j, name);
    if (v != std::floor(v)) {
        throw InputError(std::string("\"") + name + "\" must be an integer");
    }
    return static_cast<std::int64_t>(v);
}

std::vector<Pmf> pmf_list(json const& j, char const* name, double eps_trunc)
{
    json const& v = field(j, name);
    if (!v.is_array() || v.empty()) {
        throw InputError(std::string("\"") + name + "\" must be a non-empty array of specs");
    }
    std::vector<Pmf> out;
    for (json const& x : v) {
        out.push_back(pmf_from_json(x, eps_trunc / static_cast<double>(v.size())));
    }
    return out;
}

} // namespace

json to_json(FamilySpec const& spec)
{
    switch (spec.kind) {
    case FamilyKind::bernoulli:
        return {{"kind", "bernoulli"}, {"p", spec.p}};
    case FamilyKind::binomial:
        return {{"kind", "binomial"}, {"n", static_cast<std::int64_t>(spec.n)}, {"p", spec.p}};
    case FamilyKind::poisson:
        return {{"kind", "poisson"}, {"lambda", spec.lambda}};
    case FamilyKind::geometric:
        return {{"kind", "geometric"}, {"p", spec.p}};
    case FamilyKind::negbinomial:
        return {{"kind", "negbinomial"}, {"n", spec.n}, {"r", spec.p}};
    }
    return json::object();
}

FamilySpec family_from_json(json const& j)
{
    std::string const kind = field(j, "kind").get<std::string>();
    if (kind == "bernoulli") {
        return FamilySpec::bernoulli(number(j, "p"));
    }
    if (kind == "binomial") {
        return FamilySpec::binomial(integer(j, "n"), number(j, "p"));
    }
    if (kind == "poisson") {
        return FamilySpec::poisson(number(j, "lambda"));
    }
    if (kind == "geometric") {
        return FamilySpec::geometric(number(j, "p"));
    }
    if (kind == "negbinomial") {
        return FamilySpec::negbinomial(number(j, "n"), number(j, "r"));
    }
    throw InputError("unknown family kind \"" + kind + "\"");
}

json to_json(Pmf const& f)
{
    json j;
    j["kind"] = "explicit";
    j["offset"] = f.offset();
    auto const w = f.weights();
    if (std::any_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
        json logs = json::array();
        for (double l : f.log_weights()) {
            logs.push_back(std::isfinite(l) ? json(l) : json("-inf"));
        }
        j["log_weights"] = std::move(logs);
    } else {
        j["weights"] = std::vector<double>(w.begin(), w.end());
    }
    j["tail_bound"] = f.tail_bound();
    j["infinite_support"] = f.infinite_support();
    if (f.exact_last() != f.last()) {
        j["exact_last"] = f.exact_last();
    }
    j["label"] = f.label();
    if (f.family()) {
        j["family"] = to_json(*f.family());
    }
    return j;
}

Pmf pmf_from_json(json const& j, double eps_trunc)
{
    if (!j.is_object()) {
        throw InputError("a distribution spec must be a JSON object");
    }
    std::string const kind = field(j, "kind").get<std::string>();
    if (kind == "bernoulli" || kind == "binomial" || kind == "poisson" || kind == "geometric" ||
        kind == "negbinomial") {
        return realize(family_from_json(j), eps_trunc);
    }
    if (kind == "bernoulli_sum") {
        auto const ps = numbers(j, "ps");
        return bernoulli_sum(ps);
    }
    if (kind == "geometric_sum") {
        auto const rs = numbers(j, "rs");
        return geometric_sum(rs, eps_trunc);
    }
    if (kind == "explicit") {
        if (j.contains("family")) {
            // A realised family: rebuild it so extension keeps working.
            FamilySpec const spec = family_from_json(j.at("family"));
            double const tail = j.value("tail_bound", eps_trunc);
            return realize(spec, std::clamp(tail, 1e-300, 1e-6));
        }
        std::int64_t const offset = j.contains("offset") ? integer(j, "offset") : 0;
        double const tail = j.value("tail_bound", 0.0);
        bool const infinite = j.value("infinite_support", false);
        std::string label = j.value("label", std::string{});
        if (j.contains("log_weights")) {
            return Pmf::from_log_weights(offset, numbers(j, "log_weights"), tail, infinite, std::move(label));
        }
        return Pmf::from_weights(offset, numbers(j, "weights"), tail, infinite, std::move(label));
    }
    if (kind == "convolution") {
        auto const parts = pmf_list(j, "of", eps_trunc);
        Pmf s = parts.front();
        for (std::size_t k = 1; k < parts.size(); ++k) {
            s = convolve(s, parts[k]);
        }
        return s;
    }
    if (kind == "mixture") {
        auto const parts = pmf_list(j, "components", eps_trunc);
        auto const w = numbers(j, "weights");
        return mixture(parts, w);
    }
    throw InputError("unknown distribution kind \"" + kind + "\"");
}

bool is_continuous_spec(json const& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        return false;
    }
    std::string const kind = j.at("kind").get<std::string>();
    return kind == "gamma" || kind == "gamma_sum" || kind == "gamma_mixture";
}

GridPdf grid_from_json(json const& j, GridSpec const& spec)
{
    if (!is_continuous_spec(j)) {
        throw InputError("not a continuous distribution spec");
    }
    std::string const kind = j.at("kind").get<std::string>();
    if (kind == "gamma") {
        return pdf_gamma(number(j, "alpha"), number(j, "beta"), spec);
    }
    if (kind == "gamma_sum") {
        return weighted_gamma_sum(numbers(j, "alphas"), numbers(j, "betas"), spec);
    }
    return pdf_gamma_mixture(number(j, "alpha"), numbers(j, "betas"), numbers(j, "weights"), spec);
}

void write_grid_csv(std::ostream& out, GridPdf const& f)
{
    out << "# " << grid_header(f).dump() << '\n';
    out << "x,density,density_error\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < f.nodes.size(); ++k) {
        out << f.nodes[k] << ',' << f.density[k] << ',' << f.density_error[k] << '\n';
    }
}

} // namespace lcorder
