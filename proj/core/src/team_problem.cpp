#include "secretballot/team_problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace secretballot {
namespace {

void check_prior(double prior_h0) {
  if (!(prior_h0 > 0.0) || !(prior_h0 < 1.0)) {
    throw std::invalid_argument("prior_h0 must lie strictly between 0 and 1");
  }
}

void check_cost(const char* name, double cost) {
  if (!std::isfinite(cost) || cost <= 0.0) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

void check_fusion(int team_size, int votes_needed) {
  if (team_size < 1) {
    throw std::invalid_argument("team_size must be at least 1, got " +
                                std::to_string(team_size));
  }
  if (votes_needed < 1 || votes_needed > team_size) {
    throw std::invalid_argument(
        "votes_needed must lie in [1, team_size]; got votes_needed=" +
        std::to_string(votes_needed) + " with team_size=" +
        std::to_string(team_size));
  }
}

}  // namespace

TeamProblem::TeamProblem(double prior_h0, double cost_false_alarm,
                         double cost_missed_detection, LikelihoodModel model,
                         int team_size, int votes_needed)
    : prior_h0(prior_h0),
      cost_false_alarm(cost_false_alarm),
      cost_missed_detection(cost_missed_detection),
      model(model),
      team_size(team_size),
      votes_needed(votes_needed) {
  check_prior(prior_h0);
  check_cost("cost_false_alarm", cost_false_alarm);
  check_cost("cost_missed_detection", cost_missed_detection);
  check_fusion(team_size, votes_needed);
}

TeamProblem TeamProblem::with_prior(double prior) const {
  return TeamProblem(prior, cost_false_alarm, cost_missed_detection, model,
                     team_size, votes_needed);
}

TeamProblem TeamProblem::with_fusion(int new_team_size, int new_votes_needed) const {
  return TeamProblem(prior_h0, cost_false_alarm, cost_missed_detection, model,
                     new_team_size, new_votes_needed);
}

std::vector<double> poisson_binomial_pmf(std::span<const double> probs) {
  std::vector<double> pmf(probs.size() + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t filled = 0;
  for (double p : probs) {
    if (std::isnan(p) || p < 0.0 || p > 1.0) {
      throw std::invalid_argument("success probabilities must lie in [0, 1]");
    }
    // One convolution step: shift mass up by one success with probability p.
    for (std::size_t k = filled + 1; k-- > 0;) {
      pmf[k + 1] += pmf[k] * p;
      pmf[k] *= 1.0 - p;
    }
    ++filled;
  }
  return pmf;
}

double poisson_binomial_tail(std::span<const double> probs, int k) {
  if (k <= 0) return 1.0;
  if (static_cast<std::size_t>(k) > probs.size()) return 0.0;
  const std::vector<double> pmf = poisson_binomial_pmf(probs);
  // Sum the upper block directly; pmf entries are nonnegative, so a tiny
  // tail never suffers the cancellation that 1 - (lower sum) would.
  double tail = 0.0;
  for (std::size_t i = pmf.size(); i-- > static_cast<std::size_t>(k);) {
    tail += pmf[i];
  }
  return tail;
}

GlobalErrorRates global_error_rates(std::span<const ErrorPair> pairs,
                                    int votes_needed) {
  check_fusion(static_cast<int>(pairs.size()), votes_needed);
  std::vector<double> vote1_h0(pairs.size());
  std::vector<double> vote0_h1(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    vote1_h0[i] = pairs[i].false_alarm;
    vote0_h1[i] = pairs[i].missed_detection;
  }
  GlobalErrorRates rates;
  rates.false_alarm = poisson_binomial_tail(vote1_h0, votes_needed);
  // Missing the detection means at most votes_needed - 1 ones under H=1,
  // i.e. at least team_size - votes_needed + 1 zeros.
  rates.missed_detection = poisson_binomial_tail(
      vote0_h1, static_cast<int>(pairs.size()) - votes_needed + 1);
  return rates;
}

double bayes_risk(const TeamProblem& problem, std::span<const double> thresholds) {
  if (thresholds.size() != static_cast<std::size_t>(problem.team_size)) {
    throw std::invalid_argument(
        "expected one threshold per agent, got " +
        std::to_string(thresholds.size()) + " for team_size=" +
        std::to_string(problem.team_size));
  }
  std::vector<ErrorPair> pairs;
  pairs.reserve(thresholds.size());
  for (double t : thresholds) pairs.push_back(problem.model.error_probs(t));
  const GlobalErrorRates rates = global_error_rates(pairs, problem.votes_needed);
  return problem.cost_false_alarm * problem.prior_h0 * rates.false_alarm +
         problem.cost_missed_detection * problem.prior_h1() *
             rates.missed_detection;
}

double common_threshold_risk(const TeamProblem& problem, double threshold) {
  const std::vector<double> thresholds(
      static_cast<std::size_t>(problem.team_size), threshold);
  return bayes_risk(problem, thresholds);
}

double two_agent_or_risk(const TeamProblem& problem, double t1, double t2) {
  if (problem.team_size != 2 || problem.votes_needed != 1) {
    throw std::invalid_argument(
        "two_agent_or_risk requires team_size=2, votes_needed=1");
  }
  const ErrorPair e1 = problem.model.error_probs(t1);
  const ErrorPair e2 = problem.model.error_probs(t2);
  // Decide 1 unless both vote 0: false alarm = 1 - (1-pI1)(1-pI2),
  // missed detection = pII1 * pII2.
  const double false_alarm =
      e1.false_alarm + e2.false_alarm - e1.false_alarm * e2.false_alarm;
  const double missed = e1.missed_detection * e2.missed_detection;
  return problem.cost_false_alarm * problem.prior_h0 * false_alarm +
         problem.cost_missed_detection * problem.prior_h1() * missed;
}

}  // namespace secretballot
