#pragma once

#include <span>
#include <vector>

#include "secretballot/observation_models.hpp"

// The decision problem a voting team faces: a prior over the hypothesis,
// asymmetric decision costs, an observation model shared by all agents, and a
// count-based fusion rule (the team decides 1 iff at least votes_needed of
// the team_size secret votes are 1).

namespace secretballot {

/// Team-level error probabilities under a fusion rule.
struct GlobalErrorRates {
  double false_alarm = 0.0;        // P{team decides 1 | H = 0}
  double missed_detection = 0.0;   // P{team decides 0 | H = 1}
};

struct TeamProblem {
  double prior_h0;              // P{H = 0}, in (0, 1) after validation
  double cost_false_alarm;      // cost of deciding 1 when H = 0
  double cost_missed_detection; // cost of deciding 0 when H = 1
  LikelihoodModel model;
  int team_size;                // number of voting agents, >= 1
  int votes_needed;             // 1s required for a team decision of 1

  /// Throws std::invalid_argument when any field is out of range.
  TeamProblem(double prior_h0, double cost_false_alarm,
              double cost_missed_detection, LikelihoodModel model,
              int team_size, int votes_needed);

  double prior_h1() const { return 1.0 - prior_h0; }

  /// Same costs and model, different prior (validated).
  TeamProblem with_prior(double prior) const;

  /// Same prior, costs and model, different fusion rule (validated).
  TeamProblem with_fusion(int team_size, int votes_needed) const;
};

/// Distribution of the number of successes among independent Bernoulli
/// trials with the given probabilities; result[k] = P{exactly k successes}.
std::vector<double> poisson_binomial_pmf(std::span<const double> probs);

/// P{at least k successes} among independent Bernoulli trials, computed
/// without subtracting near-equal quantities. k <= 0 gives 1, k > size gives 0.
double poisson_binomial_tail(std::span<const double> probs, int k);

/// Team error rates when agent i votes 1 with probability
/// 1 - pairs[i].missed_detection under H=1 and pairs[i].false_alarm under H=0.
GlobalErrorRates global_error_rates(std::span<const ErrorPair> pairs,
                                    int votes_needed);

/// Expected cost of the one-shot vote with the given per-agent thresholds.
/// Throws std::invalid_argument unless thresholds.size() == team_size.
double bayes_risk(const TeamProblem& problem, std::span<const double> thresholds);

/// bayes_risk with every agent at the same threshold.
double common_threshold_risk(const TeamProblem& problem, double threshold);

/// Closed form for team_size == 2, votes_needed == 1 (either agent can force
/// the decision to 1). Throws std::invalid_argument for any other rule.
double two_agent_or_risk(const TeamProblem& problem, double t1, double t2);

}  // namespace secretballot
