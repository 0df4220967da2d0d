#pragma once

#include "lcorder/continuous.hpp"
#include "lcorder/inequalities.hpp"
#include "lcorder/verdict.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Seeded batches of checks. Instance k of a suite draws everything from
// derive_seed(seed, suite stream, k), so any instance replays on its own.

namespace lcorder::suites {

struct SuiteConfig
{
    std::uint64_t seed = 1;
    CheckTolerances tol;
    /// Per-suite default when unset.
    std::optional<std::int64_t> instances;
    GridSpec grid;
};

struct InstanceRecord
{
    std::int64_t index = 0;
    std::uint64_t seed = 0;
    std::vector<Verdict> verdicts;
    /// Suite-specific payload merged into the output line.
    nlohmann::json extra = nlohmann::json::object();
};

struct SuiteResult
{
    std::string suite;
    std::vector<InstanceRecord> records;
    /// True for exploratory suites whose findings never fail a run.
    bool exploratory = false;
};

std::vector<std::string> const& suite_names();
std::int64_t default_instances(std::string const& suite);

/// Throws InputError for an unknown name.
SuiteResult run_suite(std::string const& name, SuiteConfig const& cfg);

struct Tally
{
    std::int64_t holds = 0;
    std::int64_t violated = 0;
    std::int64_t inconclusive = 0;
};

/// Per check name, in first-seen order.
std::vector<std::pair<std::string, Tally>> tally(SuiteResult const& r);
Tally total(SuiteResult const& r);

/// One line per verdict ({"suite", "index", "seed"} plus the verdict);
/// verdicts that do not hold also carry the instance payload. A record
/// without verdicts becomes a single line with its payload.
std::vector<nlohmann::json> to_json_lines(InstanceRecord const& r, std::string const& suite);

} // namespace lcorder::suites
