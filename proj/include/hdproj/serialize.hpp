// ============================================================================
// JSON and CSV report serialization.  Key order is part of the format, so
// everything goes through nlohmann's ordered_json.
// ============================================================================

#pragma once

#include <string>

#include <json.hpp>

#include "hdproj/projection_tests.hpp"
#include "hdproj/simulation.hpp"

namespace hdproj {

using ordered_json = nlohmann::ordered_json;

// {statistic, std_error, p_value, theta_hat, ci_95, per_fold, mean_direction};
// ci_95 is null for tests that do not produce an interval.
ordered_json to_json(const TestResult& result);

// {reps, rejections, rejection_rate, statistic_samples, ks_to_normal,
//  degenerate_reps, seed}
ordered_json to_json(const McReport& report);

ordered_json to_json(const DegeneracyReport& report);

// Two columns (rep, t), one row per retained statistic sample.
std::string samples_csv(const McReport& report);

// Report file envelope: {"version", "config", <key>: payload}.
ordered_json report_file(const ordered_json& config, const std::string& key,
                         ordered_json payload);

}  // namespace hdproj
