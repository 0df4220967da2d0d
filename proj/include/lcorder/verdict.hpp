#pragma once

#include "lcorder/divergence.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <string_view>

namespace lcorder {

enum class Status { holds, violated, inconclusive };

std::string_view to_string(Status status);

/// Outcome of checking lhs >= rhs under certified error bars.
struct Verdict
{
    std::string check;
    Status status = Status::holds;
    DivergenceValue lhs;
    DivergenceValue rhs;
    /// lhs - rhs.
    double margin = 0.0;
    nlohmann::json context = nlohmann::json::object();

    [[nodiscard]] double combined_error() const { return lhs.error_bound + rhs.error_bound; }
};

/// lhs >= rhs holds unless it fails by more than the combined error bound.
/// With `strict`, lhs > rhs must hold by more than that bound. Non-finite
/// operands or infinite error bounds are inconclusive.
Verdict judge(std::string check, DivergenceValue const& lhs, DivergenceValue const& rhs,
              nlohmann::json context = nlohmann::json::object(), bool strict = false);

/// |value| <= tolerance (or value >= -tolerance when one_sided) as a verdict.
Verdict within_tolerance(std::string check, double value, double tolerance,
                         nlohmann::json context = nlohmann::json::object());

Verdict inconclusive(std::string check, std::string reason,
                     nlohmann::json context = nlohmann::json::object());

/// Boolean outcome (e.g. an order relation) as a verdict.
Verdict from_bool(std::string check, bool ok, nlohmann::json context = nlohmann::json::object());

/// Worst status of the inputs; margin/lhs/rhs taken from the member with
/// the smallest error-normalised margin.
Verdict aggregate(std::string check, std::span<const Verdict> verdicts);

nlohmann::json to_json(DivergenceValue const& v);
nlohmann::json to_json(Verdict const& v);

} // namespace lcorder
