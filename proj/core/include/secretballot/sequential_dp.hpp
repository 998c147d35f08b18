#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "secretballot/team_problem.hpp"
#include "secretballot/threshold_optimizer.hpp"

// The sequential variant of the vote: agents announce their votes one at a
// time, each later agent knowing every earlier vote (but never the raw
// observations). A policy assigns a vote threshold to every possible prefix
// of announced votes; optimize_policy finds the policy of minimal expected
// cost, and verify_secret_ballot compares it against the one-shot optimum.

namespace secretballot {

inline constexpr int kMaxSequentialTeamSize = 14;

/// Thrown when a sequential solve would allocate a policy tree beyond the
/// supported team size (the tree is dense in 2^team_size).
class TreeSizeError : public std::length_error {
 public:
  explicit TreeSizeError(int team_size);
  int team_size() const { return team_size_; }

 private:
  int team_size_;
};

/// A prefix of announced votes, oldest vote first.
class History {
 public:
  History() = default;

  /// Parses a string of '0'/'1' characters; throws std::invalid_argument on
  /// other characters or more than 31 votes.
  static History from_string(const std::string& bits);

  /// Appends one vote; throws std::invalid_argument unless vote is 0 or 1
  /// and the history holds fewer than 31 votes.
  void push_back(int vote);

  int size() const { return size_; }
  int vote(int position) const;  // 0-based, oldest first
  std::string to_string() const;

  /// Index of this node in a dense heap-ordered policy tree: the empty
  /// history is node 1, and announcing vote d moves node i to node 2*i + d.
  std::uint32_t node_index() const;

  bool operator==(const History&) const = default;

 private:
  std::uint32_t bits_ = 0;  // vote k stored in bit k
  int size_ = 0;
};

/// Everything a voter knows after a prefix of announced votes: the updated
/// weight on H=0 plus the remaining fusion arithmetic.
struct BeliefState {
  double belief_h0 = 0.0;    // P{H = 0 | announced votes}
  int agents_remaining = 0;  // votes not yet cast
  int votes_needed = 0;      // further 1-votes required for a team decision of 1

  bool decided_one() const { return votes_needed <= 0; }
  bool decided_zero() const { return votes_needed > agents_remaining; }
  bool decided() const { return decided_one() || decided_zero(); }
};

/// Posterior weight on H=0 after one announced threshold vote with the given
/// error pair. Throws std::domain_error when that vote has probability zero
/// under both hypotheses (an inconsistent policy/vote pair).
double belief_update(double belief_h0, const ErrorPair& errors, int vote);

/// Advances the fusion arithmetic (not the belief) by one announced vote.
BeliefState fusion_rule_update(const BeliefState& state, int vote);

/// Vote thresholds for every prefix of announced votes, stored densely by
/// History::node_index. Entries may be +-infinity (always vote 1 / always
/// vote 0); NaN marks "don't care" (the prefix is unreachable or the team
/// decision is already forced there).
class PolicyTree {
 public:
  PolicyTree() = default;

  /// All entries start as don't-care. Throws std::invalid_argument when
  /// team_size < 1 and TreeSizeError when team_size > kMaxSequentialTeamSize.
  explicit PolicyTree(int team_size);

  int team_size() const { return team_size_; }
  std::uint32_t node_count() const {
    return static_cast<std::uint32_t>(thresholds_.size());
  }

  /// Threshold for the agent voting after `prefix`. Throws
  /// std::invalid_argument when prefix.size() >= team_size.
  double threshold(const History& prefix) const;
  void set_threshold(const History& prefix, double threshold);
  bool covers(const History& prefix) const;

  // Raw dense access (nodes 1 .. 2^team_size - 1) for hot loops.
  double threshold_at(std::uint32_t node) const { return thresholds_[node]; }
  void set_threshold_at(std::uint32_t node, double t) { thresholds_[node] = t; }

 private:
  void check_prefix(const History& prefix) const;

  int team_size_ = 0;
  std::vector<double> thresholds_;  // size 1 << team_size; index 0 unused
};

/// Minimal expected cost from a belief state onward, with the threshold the
/// next voter should use (NaN when the state is already decided, +-infinity
/// when the belief is already certain).
struct NodeValue {
  double risk = 0.0;
  double threshold = 0.0;
};

NodeValue value(const TeamProblem& problem, const BeliefState& state);

/// Starting point for the sequential solve. `anchored` seeds every prefix
/// with the best common one-shot threshold: along genuinely flat ridges of
/// the sequential risk (see optimize_policy) this picks the symmetric
/// representative, and anywhere else the sweeps move freely away from it.
/// `myopic` seeds with the single-agent threshold that ignores the team,
/// giving an independent start for cross-checking the reached risk.
enum class PolicyInit { anchored, myopic };

struct PolicyOptimum {
  PolicyTree policy;
  double risk = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> sweep_risks;  // risk after each full sweep
};

/// Optimal sequential policy by exact cyclic best-response on the policy
/// tree: every sweep re-solves each reachable undecided prefix's one
/// dimensional problem in closed form (leaf-to-root, then reweighting).
/// Stops when no threshold moves by more than 1e-13 or after 4000 sweeps.
///
/// Thresholds are kept inside the central probe window. Note the minimizer
/// set need not be a single point: memoryless observation families make the
/// risk of a "need every remaining vote" chain depend on its thresholds only
/// through their sum, so whole ridges can be exactly optimal. The returned
/// policy is then the ridge point selected by the starting tree.
///
/// Throws TreeSizeError when team_size > kMaxSequentialTeamSize.
PolicyOptimum optimize_policy(const TeamProblem& problem,
                              PolicyInit init = PolicyInit::anchored);

/// Same solve from a caller-supplied starting policy. Reachable undecided
/// prefixes must carry non-NaN thresholds; they are clamped into the probe
/// window before the first sweep.
PolicyOptimum optimize_policy_from(const TeamProblem& problem,
                                   const PolicyTree& start);

/// Expected cost of following `policy` exactly (no re-optimization).
/// Throws std::invalid_argument when a reachable undecided prefix is not
/// covered.
double evaluate_policy_risk(const TeamProblem& problem,
                            const PolicyTree& policy);

/// P{H=0 | the announced votes equal `prefix`} under `policy`. Throws
/// std::domain_error when the prefix has zero probability.
double belief_at(const TeamProblem& problem, const PolicyTree& policy,
                 const History& prefix);

/// First-order optimality gap of `threshold` for the second voter, given
/// that the first voter used the best common one-shot threshold and announced
/// `first_vote`. The gap is evaluated on the reduced team the second voter
/// faces (updated belief, one fewer agent, adjusted fusion rule). Throws
/// std::invalid_argument when team_size < 2 or when the first vote already
/// forces the team decision.
StationarityResidual conditioned_stationarity_residual(
    const TeamProblem& problem, int first_vote, double threshold);

/// Same, with the first voter's threshold supplied by the caller.
StationarityResidual conditioned_stationarity_residual(
    const TeamProblem& problem, int first_vote, double threshold,
    double first_threshold);

/// Side-by-side comparison of the one-shot and sequential optima.
struct SecretBallotReport {
  double lambda_star = 0.0;      // best common one-shot threshold
  double risk_parallel = 0.0;    // one-shot risk at lambda_star
  double risk_sequential = 0.0;  // best sequential risk found
  double risk_gap = 0.0;         // |risk_sequential - risk_parallel|
  double max_threshold_deviation = 0.0;  // over reachable undecided prefixes
  double root_threshold_deviation = 0.0;
  int histories_checked = 0;
  double threshold_tolerance = 0.0;
  double risk_tolerance = 0.0;
  bool converged = false;  // every underlying solve converged
  bool pass = false;
  PolicyTree policy;  // the anchored sequential optimum
};

/// Optimizes the sequential vote two independent ways (anchored and myopic
/// starts), takes the better risk, and checks that (a) every reachable
/// undecided prefix of the anchored optimum uses the one-shot threshold to
/// within threshold_tolerance and (b) sequential and one-shot risks agree to
/// within risk_tolerance.
SecretBallotReport verify_secret_ballot(const TeamProblem& problem,
                                        double threshold_tolerance = 1e-6,
                                        double risk_tolerance = 1e-9);

}  // namespace secretballot
