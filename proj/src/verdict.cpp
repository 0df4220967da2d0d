#include "lcorder/verdict.hpp"

#include <cmath>
#include <limits>

namespace lcorder {

using nlohmann::json;

std::string_view to_string(Status status)
{
    switch (status) {
    case Status::holds:
        return "holds";
    case Status::violated:
        return "violated";
    case Status::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

Verdict judge(std::string check, DivergenceValue const& lhs, DivergenceValue const& rhs, json context,
              bool strict)
{
    Verdict v;
    v.check = std::move(check);
    v.lhs = lhs;
    v.rhs = rhs;
    v.context = std::move(context);
    if (strict) {
        v.context["strict"] = true;
    }
    if (!lhs.finite || !rhs.finite) {
        v.status = Status::inconclusive;
        v.margin = std::numeric_limits<double>::quiet_NaN();
        v.context["reason"] = "non-finite divergence";
        return v;
    }
    v.margin = lhs.value - rhs.value;
    double const err = v.combined_error();
    if (!std::isfinite(err)) {
        v.status = Status::inconclusive;
        v.context["reason"] = "unbounded error";
        return v;
    }
    bool const ok = strict ? v.margin > err : v.margin >= -err;
    v.status = ok ? Status::holds : Status::violated;
    return v;
}

Verdict within_tolerance(std::string check, double value, double tolerance, json context)
{
    Verdict v;
    v.check = std::move(check);
    v.lhs = {tolerance, 0.0, true};
    v.rhs = {std::abs(value), 0.0, true};
    v.margin = tolerance - std::abs(value);
    v.context = std::move(context);
    v.context["value"] = value;
    v.status = std::abs(value) <= tolerance ? Status::holds : Status::violated;
    return v;
}

Verdict inconclusive(std::string check, std::string reason, json context)
{
    Verdict v;
    v.check = std::move(check);
    v.status = Status::inconclusive;
    v.margin = std::numeric_limits<double>::quiet_NaN();
    v.context = std::move(context);
    v.context["reason"] = std::move(reason);
    return v;
}

Verdict from_bool(std::string check, bool ok, json context)
{
    Verdict v;
    v.check = std::move(check);
    v.status = ok ? Status::holds : Status::violated;
    v.margin = ok ? 0.0 : -1.0;
    v.context = std::move(context);
    return v;
}

Verdict aggregate(std::string check, std::span<const Verdict> verdicts)
{
    Verdict out;
    out.check = std::move(check);
    std::size_t holds = 0;
    std::size_t violated = 0;
    std::size_t unknown = 0;
    double best = std::numeric_limits<double>::infinity();
    Verdict const* worst = nullptr;
    for (Verdict const& v : verdicts) {
        switch (v.status) {
        case Status::holds:
            ++holds;
            break;
        case Status::violated:
            ++violated;
            break;
        case Status::inconclusive:
            ++unknown;
            break;
        }
        if (v.status == Status::inconclusive) {
            continue;
        }
        double const score = v.margin + v.combined_error();
        if (worst == nullptr || score < best) {
            best = score;
            worst = &v;
        }
    }
    out.status = violated > 0 ? Status::violated : (unknown > 0 ? Status::inconclusive : Status::holds);
    if (worst != nullptr) {
        out.lhs = worst->lhs;
        out.rhs = worst->rhs;
        out.margin = worst->margin;
        out.context["worst"] = worst->context;
    }
    out.context["count"] = verdicts.size();
    out.context["holds"] = holds;
    out.context["violated"] = violated;
    out.context["inconclusive"] = unknown;
    return out;
}

json to_json(DivergenceValue const& v)
{
    json j;
    j["value"] = v.finite ? json(v.value) : json("inf");
    j["error_bound"] = std::isfinite(v.error_bound) ? json(v.error_bound) : json("inf");
    j["finite"] = v.finite;
    return j;
}

json to_json(Verdict const& v)
{
    json j;
    j["check"] = v.check;
    j["status"] = std::string(to_string(v.status));
    j["lhs"] = to_json(v.lhs);
    j["rhs"] = to_json(v.rhs);
    j["margin"] = std::isfinite(v.margin) ? json(v.margin) : json(nullptr);
    j["context"] = v.context;
    return j;
}

} // namespace lcorder
