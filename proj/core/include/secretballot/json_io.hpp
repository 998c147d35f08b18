#pragma once

#include <string>

#include "secretballot/monte_carlo.hpp"
#include "secretballot/sequential_dp.hpp"

// JSON round-trips for the types that cross process boundaries (policy
// files, simulation summaries, verification summaries). The functions speak
// std::string so the JSON library stays a private dependency of the core.

namespace secretballot {

/// One entry per vote prefix, in node-index order:
///   {"team_size": 2,
///    "entries": [{"history": "", "threshold": 0.51, "decided": false},
///                {"history": "0", "threshold": "dont-care", "decided": true},
///                ...]}
/// Infinite thresholds serialize as "+inf"/"-inf"; don't-care prefixes
/// (unreachable or already decided) as "dont-care" with decided true.
std::string policy_to_json(const PolicyTree& policy);

/// Inverse of policy_to_json. Throws std::invalid_argument on malformed
/// documents: unknown threshold spellings, bad history strings, duplicate
/// entries, or a decided flag that contradicts the threshold.
PolicyTree policy_from_json(const std::string& text);

/// {"family": "gaussian-shift", "mean0": ..., "mean1": ..., "stddev": ...}
/// or {"family": "exponential-scale", "scale0": ..., "scale1": ...}.
std::string model_to_json(const LikelihoodModel& model);

/// Inverse of model_to_json; throws std::invalid_argument on unknown
/// families, missing fields, or parameter values the model rejects.
LikelihoodModel model_from_json(const std::string& text);

std::string sim_report_to_json(const SimReport& report);

/// Serializes everything in the report except the policy tree itself (dump
/// that separately with policy_to_json).
std::string verify_report_to_json(const SecretBallotReport& report);

}  // namespace secretballot
