#pragma once

#include <cstdint>
#include <span>

#include "secretballot/sequential_dp.hpp"
#include "secretballot/team_problem.hpp"

// Monte Carlo estimates of the team risk for both vote protocols. Trials are
// indexed deterministically (see rng.hpp): simulate(..., trials, seed) equals
// any partition of [0, trials) into simulate_*_counts ranges merged together,
// which is how the callers parallelize.

namespace secretballot {

/// Raw tallies from a block of simulated trials.
struct SimCounts {
  std::uint64_t h0_trials = 0;
  std::uint64_t h1_trials = 0;
  std::uint64_t false_alarms = 0;       // team decided 1 while H=0
  std::uint64_t missed_detections = 0;  // team decided 0 while H=1

  SimCounts& operator+=(const SimCounts& other);
};

/// Summary of a simulation, comparable against the analytic risk.
struct SimReport {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  SimCounts counts;
  double empirical_risk = 0.0;
  double empirical_false_alarm = 0.0;       // conditional on H=0
  double empirical_missed_detection = 0.0;  // conditional on H=1
  double ci95_halfwidth = 0.0;  // normal-approximation 95% interval on risk
};

/// Simulates trials [first_trial, last_trial) of the one-shot vote.
/// thresholds may contain the +-infinity sentinels but not NaN.
SimCounts simulate_parallel_counts(const TeamProblem& problem,
                                   std::span<const double> thresholds,
                                   std::uint64_t first_trial,
                                   std::uint64_t last_trial,
                                   std::uint64_t seed);

/// Simulates trials [first_trial, last_trial) of the sequential vote. Every
/// prefix the simulation can reach must be covered by the policy; this is
/// validated up front, and std::invalid_argument names the first uncovered
/// prefix. A trial consumes the same observation draws as the one-shot
/// simulation, so identical thresholds give identical votes.
SimCounts simulate_sequential_counts(const TeamProblem& problem,
                                     const PolicyTree& policy,
                                     std::uint64_t first_trial,
                                     std::uint64_t last_trial,
                                     std::uint64_t seed);

/// Turns tallies into rates, risk and a 95% confidence halfwidth.
SimReport make_report(const TeamProblem& problem, const SimCounts& counts,
                      std::uint64_t trials, std::uint64_t seed);

/// Convenience wrappers over the _counts functions for trials [0, trials).
/// Throws std::invalid_argument when trials == 0.
SimReport simulate_parallel(const TeamProblem& problem,
                            std::span<const double> thresholds,
                            std::uint64_t trials, std::uint64_t seed);
SimReport simulate_sequential(const TeamProblem& problem,
                              const PolicyTree& policy, std::uint64_t trials,
                              std::uint64_t seed);

}  // namespace secretballot
