#include "secretballot/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "secretballot/numeric.hpp"
#include "secretballot/rng.hpp"

namespace secretballot {
namespace {

/// Slot layout inside a trial: slot 0 picks the hypothesis, slot 1 + k is
/// agent k's observation. The layout is shared by both protocols so equal
/// thresholds produce equal votes.
std::uint64_t trial_base(const TeamProblem& problem, std::uint64_t trial) {
  return trial * static_cast<std::uint64_t>(problem.team_size + 1);
}

void check_range(std::uint64_t first_trial, std::uint64_t last_trial) {
  if (first_trial > last_trial) {
    throw std::invalid_argument("trial range is reversed");
  }
}

/// Rejects policies with an uncovered prefix that the simulated walk could
/// actually reach (+-infinity thresholds prune one child branch).
void check_simulatable(const TeamProblem& problem, const PolicyTree& policy,
                       std::uint32_t node, int depth, int ones) {
  const int votes_needed = problem.votes_needed - ones;
  const int agents_remaining = problem.team_size - depth;
  if (votes_needed <= 0 || votes_needed > agents_remaining) return;  // decided
  const double t = policy.threshold_at(node);
  if (std::isnan(t)) {
    std::string bits;
    for (int k = depth - 1; k >= 0; --k) {
      bits.push_back((node >> k) & 1u ? '1' : '0');
    }
    throw std::invalid_argument("policy does not cover reachable history \"" +
                                bits + "\"");
  }
  if (t != std::numeric_limits<double>::infinity()) {
    check_simulatable(problem, policy, 2 * node + 1, depth + 1, ones + 1);
  }
  if (t != -std::numeric_limits<double>::infinity()) {
    check_simulatable(problem, policy, 2 * node, depth + 1, ones);
  }
}

}  // namespace

SimCounts& SimCounts::operator+=(const SimCounts& other) {
  h0_trials += other.h0_trials;
  h1_trials += other.h1_trials;
  false_alarms += other.false_alarms;
  missed_detections += other.missed_detections;
  return *this;
}

SimCounts simulate_parallel_counts(const TeamProblem& problem,
                                   std::span<const double> thresholds,
                                   std::uint64_t first_trial,
                                   std::uint64_t last_trial,
                                   std::uint64_t seed) {
  check_range(first_trial, last_trial);
  if (thresholds.size() != static_cast<std::size_t>(problem.team_size)) {
    throw std::invalid_argument(
        "expected one threshold per agent, got " +
        std::to_string(thresholds.size()) + " for team_size=" +
        std::to_string(problem.team_size));
  }
  for (double t : thresholds) {
    if (std::isnan(t)) {
      throw std::invalid_argument("vote thresholds must not be NaN");
    }
  }
  SimCounts counts;
  for (std::uint64_t trial = first_trial; trial < last_trial; ++trial) {
    const std::uint64_t base = trial_base(problem, trial);
    const int h = uniform_draw(seed, base) < problem.prior_h0 ? 0 : 1;
    int votes = 0;
    for (int agent = 0; agent < problem.team_size; ++agent) {
      const double y = problem.model.quantile(
          h, uniform_draw(seed, base + 1 + static_cast<std::uint64_t>(agent)));
      if (y > thresholds[static_cast<std::size_t>(agent)]) ++votes;
    }
    const bool decide_one = votes >= problem.votes_needed;
    if (h == 0) {
      ++counts.h0_trials;
      if (decide_one) ++counts.false_alarms;
    } else {
      ++counts.h1_trials;
      if (!decide_one) ++counts.missed_detections;
    }
  }
  return counts;
}

SimCounts simulate_sequential_counts(const TeamProblem& problem,
                                     const PolicyTree& policy,
                                     std::uint64_t first_trial,
                                     std::uint64_t last_trial,
                                     std::uint64_t seed) {
  check_range(first_trial, last_trial);
  if (policy.team_size() != problem.team_size) {
    throw std::invalid_argument("policy is sized for team_size " +
                                std::to_string(policy.team_size()) +
                                ", problem has " +
                                std::to_string(problem.team_size));
  }
  check_simulatable(problem, policy, 1, 0, 0);

  SimCounts counts;
  for (std::uint64_t trial = first_trial; trial < last_trial; ++trial) {
    const std::uint64_t base = trial_base(problem, trial);
    const int h = uniform_draw(seed, base) < problem.prior_h0 ? 0 : 1;
    std::uint32_t node = 1;
    int votes_needed = problem.votes_needed;
    int agents_remaining = problem.team_size;
    int cast = 0;
    // Walk until the outcome is forced; later agents would not change it.
    while (votes_needed > 0 && votes_needed <= agents_remaining) {
      const double y = problem.model.quantile(
          h, uniform_draw(seed, base + 1 + static_cast<std::uint64_t>(cast)));
      const int vote = y > policy.threshold_at(node) ? 1 : 0;
      node = 2 * node + static_cast<std::uint32_t>(vote);
      votes_needed -= vote;
      agents_remaining -= 1;
      ++cast;
    }
    const bool decide_one = votes_needed <= 0;
    if (h == 0) {
      ++counts.h0_trials;
      if (decide_one) ++counts.false_alarms;
    } else {
      ++counts.h1_trials;
      if (!decide_one) ++counts.missed_detections;
    }
  }
  return counts;
}

SimReport make_report(const TeamProblem& problem, const SimCounts& counts,
                      std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) {
    throw std::invalid_argument("trials must be positive");
  }
  SimReport report;
  report.trials = trials;
  report.seed = seed;
  report.counts = counts;
  const double n = static_cast<double>(trials);
  const double fa_rate = static_cast<double>(counts.false_alarms) / n;
  const double md_rate = static_cast<double>(counts.missed_detections) / n;
  report.empirical_risk = problem.cost_false_alarm * fa_rate +
                          problem.cost_missed_detection * md_rate;
  report.empirical_false_alarm =
      counts.h0_trials == 0
          ? 0.0
          : static_cast<double>(counts.false_alarms) /
                static_cast<double>(counts.h0_trials);
  report.empirical_missed_detection =
      counts.h1_trials == 0
          ? 0.0
          : static_cast<double>(counts.missed_detections) /
                static_cast<double>(counts.h1_trials);
  // Per-trial cost is 0, cost_false_alarm or cost_missed_detection; the
  // normal approximation on its mean gives the interval.
  const double second_moment =
      problem.cost_false_alarm * problem.cost_false_alarm * fa_rate +
      problem.cost_missed_detection * problem.cost_missed_detection * md_rate;
  const double variance = std::max(
      0.0, second_moment - report.empirical_risk * report.empirical_risk);
  report.ci95_halfwidth = kZ975 * std::sqrt(variance / n);
  return report;
}

SimReport simulate_parallel(const TeamProblem& problem,
                            std::span<const double> thresholds,
                            std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) {
    throw std::invalid_argument("trials must be positive");
  }
  return make_report(
      problem, simulate_parallel_counts(problem, thresholds, 0, trials, seed),
      trials, seed);
}

SimReport simulate_sequential(const TeamProblem& problem,
                              const PolicyTree& policy, std::uint64_t trials,
                              std::uint64_t seed) {
  if (trials == 0) {
    throw std::invalid_argument("trials must be positive");
  }
  return make_report(
      problem, simulate_sequential_counts(problem, policy, 0, trials, seed),
      trials, seed);
}

}  // namespace secretballot
