#include "secretballot/sequential_dp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "secretballot/numeric.hpp"

namespace secretballot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxSweeps = 4000;
constexpr double kSweepMoveTol = 1e-13;

void check_vote(int vote) {
  if (vote != 0 && vote != 1) {
    throw std::invalid_argument("vote must be 0 or 1, got " +
                                std::to_string(vote));
  }
}

/// Remaining fusion arithmetic at a dense tree node: the node's depth is the
/// number of announced votes and its extra set bits are the announced 1s.
struct NodeArithmetic {
  int agents_remaining;
  int votes_needed;

  bool decided() const {
    return votes_needed <= 0 || votes_needed > agents_remaining;
  }
  bool decided_one() const { return votes_needed <= 0; }
};

NodeArithmetic node_arithmetic(const TeamProblem& problem, std::uint32_t node) {
  const int depth = std::bit_width(node) - 1;
  const int ones = std::popcount(node) - 1;
  return {problem.team_size - depth, problem.votes_needed - ones};
}

std::string node_history_string(std::uint32_t node) {
  std::string bits;
  const int depth = std::bit_width(node) - 1;
  for (int k = depth - 1; k >= 0; --k) {
    bits.push_back((node >> k) & 1u ? '1' : '0');
  }
  return bits;
}

/// Shared scratch space for the dense tree passes. Arrays are heap-ordered
/// with the root at 1; x/y carry the probability of reaching each node under
/// H=0/H=1, u/v the conditional team error probabilities from each node on.
struct TreeWorkspace {
  std::uint32_t leaf_begin;  // first leaf index, == 1 << team_size
  std::vector<double> x, y, u, v;

  explicit TreeWorkspace(int team_size)
      : leaf_begin(1u << team_size),
        x(2u * leaf_begin, 0.0),
        y(2u * leaf_begin, 0.0),
        u(2u * leaf_begin, 0.0),
        v(2u * leaf_begin, 0.0) {}
};

/// Fills u/v for every leaf and every decided node (they never change).
void seed_decided_values(const TeamProblem& problem, TreeWorkspace& ws) {
  for (std::uint32_t i = 1; i < 2u * ws.leaf_begin; ++i) {
    const NodeArithmetic a = node_arithmetic(problem, i);
    if (i >= ws.leaf_begin || a.decided()) {
      ws.u[i] = a.decided_one() ? 1.0 : 0.0;
      ws.v[i] = 1.0 - ws.u[i];
    }
  }
}

/// Propagates reach probabilities from the root using `thresholds` (dense,
/// NaN allowed wherever the node is decided or unreachable).
void forward_pass(const TeamProblem& problem,
                  const std::vector<double>& thresholds, TreeWorkspace& ws) {
  ws.x[1] = problem.prior_h0;
  ws.y[1] = problem.prior_h1();
  for (std::uint32_t i = 1; i < ws.leaf_begin; ++i) {
    const NodeArithmetic a = node_arithmetic(problem, i);
    if (a.decided() || (ws.x[i] == 0.0 && ws.y[i] == 0.0)) {
      ws.x[2 * i] = ws.x[2 * i + 1] = 0.0;
      ws.y[2 * i] = ws.y[2 * i + 1] = 0.0;
      continue;
    }
    const double t = thresholds[i];
    if (std::isnan(t)) {
      throw std::invalid_argument("policy does not cover reachable history \"" +
                                  node_history_string(i) + "\"");
    }
    const ErrorPair e = problem.model.error_probs(t);
    ws.x[2 * i] = ws.x[i] * (1.0 - e.false_alarm);
    ws.x[2 * i + 1] = ws.x[i] * e.false_alarm;
    ws.y[2 * i] = ws.y[i] * e.missed_detection;
    ws.y[2 * i + 1] = ws.y[i] * (1.0 - e.missed_detection);
  }
}

/// Recomputes u/v bottom-up for the undecided nodes without touching the
/// thresholds, and returns the policy risk at the root.
double backward_evaluate(const TeamProblem& problem,
                         const std::vector<double>& thresholds,
                         TreeWorkspace& ws) {
  for (std::uint32_t i = ws.leaf_begin; i-- > 1;) {
    const NodeArithmetic a = node_arithmetic(problem, i);
    if (a.decided()) continue;
    if (ws.x[i] == 0.0 && ws.y[i] == 0.0) {
      // Unreachable: give the node zero value; every use upstream is
      // weighted by a zero transition probability.
      ws.u[i] = 0.0;
      ws.v[i] = 0.0;
      continue;
    }
    const ErrorPair e = problem.model.error_probs(thresholds[i]);
    ws.u[i] = (1.0 - e.false_alarm) * ws.u[2 * i] +
              e.false_alarm * ws.u[2 * i + 1];
    ws.v[i] = e.missed_detection * ws.v[2 * i] +
              (1.0 - e.missed_detection) * ws.v[2 * i + 1];
  }
  return problem.cost_false_alarm * problem.prior_h0 * ws.u[1] +
         problem.cost_missed_detection * problem.prior_h1() * ws.v[1];
}

/// One optimization sweep: bottom-up exact re-solve of every undecided node
/// given the current reach probabilities and the already-updated subtrees.
/// Returns the largest threshold movement.
double backward_improve(const TeamProblem& problem, const ProbeWindow& window,
                        std::vector<double>& thresholds, TreeWorkspace& ws) {
  double max_move = 0.0;
  for (std::uint32_t i = ws.leaf_begin; i-- > 1;) {
    const NodeArithmetic a = node_arithmetic(problem, i);
    if (a.decided()) continue;
    // The node's threshold trades u against v with these positive weights;
    // the exact minimizer is a likelihood-ratio threshold.
    const double beta = problem.cost_false_alarm * ws.x[i] *
                        (ws.u[2 * i + 1] - ws.u[2 * i]);
    const double gamma = problem.cost_missed_detection * ws.y[i] *
                         (ws.v[2 * i] - ws.v[2 * i + 1]);
    if (beta > 0.0 && gamma > 0.0) {
      const double proposal = std::clamp(
          problem.model.likelihood_ratio_inverse(beta / gamma), window.lo,
          window.hi);
      max_move = std::max(max_move, std::fabs(proposal - thresholds[i]));
      thresholds[i] = proposal;
    }
    const ErrorPair e = problem.model.error_probs(thresholds[i]);
    ws.u[i] = (1.0 - e.false_alarm) * ws.u[2 * i] +
              e.false_alarm * ws.u[2 * i + 1];
    ws.v[i] = e.missed_detection * ws.v[2 * i] +
              (1.0 - e.missed_detection) * ws.v[2 * i + 1];
  }
  return max_move;
}

PolicyOptimum run_sweeps(const TeamProblem& problem,
                         std::vector<double> thresholds) {
  const ProbeWindow window =
      threshold_probe_window(problem.model, problem.prior_h0);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    if (!node_arithmetic(problem, i).decided()) {
      thresholds[i] = std::clamp(thresholds[i], window.lo, window.hi);
    }
  }

  TreeWorkspace ws(problem.team_size);
  seed_decided_values(problem, ws);

  PolicyOptimum result;
  while (result.sweeps < kMaxSweeps) {
    forward_pass(problem, thresholds, ws);
    const double moved = backward_improve(problem, window, thresholds, ws);
    ++result.sweeps;
    result.sweep_risks.push_back(
        problem.cost_false_alarm * problem.prior_h0 * ws.u[1] +
        problem.cost_missed_detection * problem.prior_h1() * ws.v[1]);
    if (moved < kSweepMoveTol) {
      result.converged = true;
      break;
    }
  }

  // Clean evaluation of the final thresholds (reach probabilities and values
  // from the same policy).
  forward_pass(problem, thresholds, ws);
  result.risk = backward_evaluate(problem, thresholds, ws);

  result.policy = PolicyTree(problem.team_size);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    if (!node_arithmetic(problem, i).decided()) {
      result.policy.set_threshold_at(i, thresholds[i]);
    }
  }
  return result;
}

}  // namespace

TreeSizeError::TreeSizeError(int team_size)
    : std::length_error("sequential team_size " + std::to_string(team_size) +
                        " exceeds the supported maximum of " +
                        std::to_string(kMaxSequentialTeamSize) +
                        " (the policy tree is dense in 2^team_size)"),
      team_size_(team_size) {}

History History::from_string(const std::string& bits) {
  History h;
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument(
          "history strings may only contain '0' and '1'");
    }
    h.push_back(c - '0');
  }
  return h;
}

void History::push_back(int vote) {
  check_vote(vote);
  if (size_ >= 31) {
    throw std::invalid_argument("history is limited to 31 votes");
  }
  bits_ |= static_cast<std::uint32_t>(vote) << size_;
  ++size_;
}

int History::vote(int position) const {
  if (position < 0 || position >= size_) {
    throw std::invalid_argument("vote position " + std::to_string(position) +
                                " outside history of size " +
                                std::to_string(size_));
  }
  return static_cast<int>((bits_ >> position) & 1u);
}

std::string History::to_string() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(size_));
  for (int k = 0; k < size_; ++k) out.push_back(vote(k) ? '1' : '0');
  return out;
}

std::uint32_t History::node_index() const {
  std::uint32_t index = 1;
  for (int k = 0; k < size_; ++k) {
    index = 2 * index + static_cast<std::uint32_t>(vote(k));
  }
  return index;
}

double belief_update(double belief_h0, const ErrorPair& errors, int vote) {
  check_vote(vote);
  if (!(belief_h0 >= 0.0) || !(belief_h0 <= 1.0)) {
    throw std::invalid_argument("belief_h0 must lie in [0, 1]");
  }
  const double like0 =
      vote == 1 ? errors.false_alarm : 1.0 - errors.false_alarm;
  const double like1 =
      vote == 1 ? 1.0 - errors.missed_detection : errors.missed_detection;
  const double total = belief_h0 * like0 + (1.0 - belief_h0) * like1;
  if (total <= 0.0) {
    throw std::domain_error(
        "announced vote has zero probability under both hypotheses "
        "(inconsistent policy/vote pair)");
  }
  return belief_h0 * like0 / total;
}

BeliefState fusion_rule_update(const BeliefState& state, int vote) {
  check_vote(vote);
  if (state.agents_remaining < 1) {
    throw std::invalid_argument("no agents left to vote");
  }
  BeliefState next = state;
  next.agents_remaining -= 1;
  next.votes_needed -= vote;
  return next;
}

PolicyTree::PolicyTree(int team_size) : team_size_(team_size) {
  if (team_size < 1) {
    throw std::invalid_argument("team_size must be at least 1, got " +
                                std::to_string(team_size));
  }
  if (team_size > kMaxSequentialTeamSize) {
    throw TreeSizeError(team_size);
  }
  thresholds_.assign(std::size_t{1} << team_size, kNaN);
}

void PolicyTree::check_prefix(const History& prefix) const {
  if (prefix.size() >= team_size_) {
    throw std::invalid_argument("history of size " +
                                std::to_string(prefix.size()) +
                                " leaves no agent to vote in a team of " +
                                std::to_string(team_size_));
  }
}

double PolicyTree::threshold(const History& prefix) const {
  check_prefix(prefix);
  return thresholds_[prefix.node_index()];
}

void PolicyTree::set_threshold(const History& prefix, double threshold) {
  check_prefix(prefix);
  thresholds_[prefix.node_index()] = threshold;
}

bool PolicyTree::covers(const History& prefix) const {
  check_prefix(prefix);
  return !std::isnan(thresholds_[prefix.node_index()]);
}

NodeValue value(const TeamProblem& problem, const BeliefState& state) {
  if (state.agents_remaining < 0) {
    throw std::invalid_argument("agents_remaining must be nonnegative");
  }
  if (!(state.belief_h0 >= 0.0) || !(state.belief_h0 <= 1.0)) {
    throw std::invalid_argument("belief_h0 must lie in [0, 1]");
  }
  if (state.decided_one()) {
    return {problem.cost_false_alarm * state.belief_h0, kNaN};
  }
  if (state.decided_zero()) {
    return {problem.cost_missed_detection * (1.0 - state.belief_h0), kNaN};
  }
  // Certain beliefs admit a zero-risk policy: every remaining agent votes
  // with the certainty.
  if (state.belief_h0 <= 0.0) return {0.0, -kInf};
  if (state.belief_h0 >= 1.0) return {0.0, kInf};
  const TeamProblem reduced =
      problem.with_prior(state.belief_h0)
          .with_fusion(state.agents_remaining, state.votes_needed);
  const PolicyOptimum opt = optimize_policy(reduced);
  return {opt.risk, opt.policy.threshold(History())};
}

PolicyOptimum optimize_policy(const TeamProblem& problem, PolicyInit init) {
  if (problem.team_size > kMaxSequentialTeamSize) {
    throw TreeSizeError(problem.team_size);
  }
  double seed;
  if (init == PolicyInit::anchored) {
    seed = optimize_identical_threshold(problem).thresholds.front();
  } else {
    // Single-agent likelihood-ratio vote ignoring the rest of the team.
    seed = problem.model.likelihood_ratio_inverse(
        problem.cost_false_alarm * problem.prior_h0 /
        (problem.cost_missed_detection * problem.prior_h1()));
  }
  std::vector<double> thresholds(std::size_t{2} << problem.team_size, kNaN);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    if (!node_arithmetic(problem, i).decided()) thresholds[i] = seed;
  }
  return run_sweeps(problem, std::move(thresholds));
}

PolicyOptimum optimize_policy_from(const TeamProblem& problem,
                                   const PolicyTree& start) {
  if (problem.team_size > kMaxSequentialTeamSize) {
    throw TreeSizeError(problem.team_size);
  }
  if (start.team_size() != problem.team_size) {
    throw std::invalid_argument("starting policy is sized for team_size " +
                                std::to_string(start.team_size()) +
                                ", problem has " +
                                std::to_string(problem.team_size));
  }
  std::vector<double> thresholds(std::size_t{2} << problem.team_size, kNaN);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    if (node_arithmetic(problem, i).decided()) continue;
    const double t = start.threshold_at(i);
    if (std::isnan(t)) {
      throw std::invalid_argument(
          "starting policy does not cover reachable history \"" +
          node_history_string(i) + "\"");
    }
    thresholds[i] = t;
  }
  return run_sweeps(problem, std::move(thresholds));
}

double evaluate_policy_risk(const TeamProblem& problem,
                            const PolicyTree& policy) {
  if (policy.team_size() != problem.team_size) {
    throw std::invalid_argument("policy is sized for team_size " +
                                std::to_string(policy.team_size()) +
                                ", problem has " +
                                std::to_string(problem.team_size));
  }
  std::vector<double> thresholds(std::size_t{2} << problem.team_size, kNaN);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    thresholds[i] = policy.threshold_at(i);
  }
  TreeWorkspace ws(problem.team_size);
  seed_decided_values(problem, ws);
  forward_pass(problem, thresholds, ws);
  return backward_evaluate(problem, thresholds, ws);
}

double belief_at(const TeamProblem& problem, const PolicyTree& policy,
                 const History& prefix) {
  if (prefix.size() > problem.team_size) {
    throw std::invalid_argument("history longer than the team");
  }
  double belief = problem.prior_h0;
  double reach = 1.0;
  History walked;
  for (int k = 0; k < prefix.size(); ++k) {
    const double t = policy.threshold(walked);
    if (std::isnan(t)) {
      throw std::domain_error("policy does not cover history \"" +
                              walked.to_string() + "\"");
    }
    const ErrorPair e = problem.model.error_probs(t);
    const int vote = prefix.vote(k);
    const double like0 = vote == 1 ? e.false_alarm : 1.0 - e.false_alarm;
    const double like1 =
        vote == 1 ? 1.0 - e.missed_detection : e.missed_detection;
    reach = belief * like0 + (1.0 - belief) * like1;
    if (reach <= 0.0) {
      throw std::domain_error("history \"" + prefix.to_string() +
                              "\" has zero probability under this policy");
    }
    belief = belief * like0 / reach;
    walked.push_back(vote);
  }
  return belief;
}

StationarityResidual conditioned_stationarity_residual(
    const TeamProblem& problem, int first_vote, double threshold,
    double first_threshold) {
  check_vote(first_vote);
  if (problem.team_size < 2) {
    throw std::invalid_argument(
        "conditioning on a first vote needs team_size >= 2");
  }
  BeliefState root{};
  root.belief_h0 = problem.prior_h0;
  root.agents_remaining = problem.team_size;
  root.votes_needed = problem.votes_needed;
  BeliefState after = fusion_rule_update(root, first_vote);
  if (after.decided()) {
    throw std::invalid_argument(
        "the announced first vote already forces the team decision");
  }
  after.belief_h0 = belief_update(
      problem.prior_h0, problem.model.error_probs(first_threshold),
      first_vote);
  const TeamProblem reduced =
      problem.with_prior(after.belief_h0)
          .with_fusion(after.agents_remaining, after.votes_needed);
  return stationarity_residual(reduced, threshold);
}

StationarityResidual conditioned_stationarity_residual(
    const TeamProblem& problem, int first_vote, double threshold) {
  const double lambda_star =
      optimize_identical_threshold(problem).thresholds.front();
  return conditioned_stationarity_residual(problem, first_vote, threshold,
                                           lambda_star);
}

SecretBallotReport verify_secret_ballot(const TeamProblem& problem,
                                        double threshold_tolerance,
                                        double risk_tolerance) {
  SecretBallotReport report;
  report.threshold_tolerance = threshold_tolerance;
  report.risk_tolerance = risk_tolerance;

  const OptimizationResult one_shot = optimize_identical_threshold(problem);
  report.lambda_star = one_shot.thresholds.front();
  report.risk_parallel = one_shot.risk;

  PolicyOptimum anchored = optimize_policy(problem, PolicyInit::anchored);
  const PolicyOptimum myopic = optimize_policy(problem, PolicyInit::myopic);
  report.risk_sequential = std::min(anchored.risk, myopic.risk);
  report.risk_gap = std::fabs(report.risk_sequential - report.risk_parallel);
  report.converged =
      one_shot.converged && anchored.converged && myopic.converged;

  // Deviations over the reachable undecided prefixes of the anchored tree.
  TreeWorkspace ws(problem.team_size);
  std::vector<double> thresholds(std::size_t{2} << problem.team_size, kNaN);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    thresholds[i] = anchored.policy.threshold_at(i);
  }
  forward_pass(problem, thresholds, ws);
  for (std::uint32_t i = 1; i < (1u << problem.team_size); ++i) {
    if (node_arithmetic(problem, i).decided()) continue;
    if (ws.x[i] == 0.0 && ws.y[i] == 0.0) continue;
    const double deviation = std::fabs(thresholds[i] - report.lambda_star);
    report.max_threshold_deviation =
        std::max(report.max_threshold_deviation, deviation);
    if (i == 1) report.root_threshold_deviation = deviation;
    ++report.histories_checked;
  }

  report.pass = report.converged &&
                report.max_threshold_deviation <= threshold_tolerance &&
                report.risk_gap <= risk_tolerance;
  report.policy = std::move(anchored.policy);
  return report;
}

}  // namespace secretballot
