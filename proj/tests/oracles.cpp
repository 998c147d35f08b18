#include "oracles.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace secretballot::testing {
namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa,
                double b, double fb, double m, double fm, double whole,
                double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  return adaptive(f, a, fa, b, fb, m, fm, simpson(f, a, fa, b, fb, m, fm), tol,
                  60);
}

GlobalErrorRates enumerate_error_rates(const std::vector<ErrorPair>& pairs,
                                       int votes_needed) {
  const int n = static_cast<int>(pairs.size());
  GlobalErrorRates rates;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double p_h0 = 1.0;
    double p_h1 = 1.0;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      const bool one = (mask >> i) & 1u;
      ones += one ? 1 : 0;
      p_h0 *= one ? pairs[i].false_alarm : 1.0 - pairs[i].false_alarm;
      p_h1 *= one ? 1.0 - pairs[i].missed_detection : pairs[i].missed_detection;
    }
    if (ones >= votes_needed) {
      rates.false_alarm += p_h0;
    } else {
      rates.missed_detection += p_h1;
    }
  }
  return rates;
}

double enumerate_tail(const std::vector<double>& probs, int k) {
  const int n = static_cast<int>(probs.size());
  double tail = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double p = 1.0;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      const bool one = (mask >> i) & 1u;
      ones += one ? 1 : 0;
      p *= one ? probs[i] : 1.0 - probs[i];
    }
    if (ones >= k) tail += p;
  }
  return tail;
}

double enumerate_one_shot_risk(const TeamProblem& problem,
                               const std::vector<double>& thresholds) {
  std::vector<ErrorPair> pairs;
  pairs.reserve(thresholds.size());
  for (double t : thresholds) pairs.push_back(problem.model.error_probs(t));
  const GlobalErrorRates rates =
      enumerate_error_rates(pairs, problem.votes_needed);
  return problem.cost_false_alarm * problem.prior_h0 * rates.false_alarm +
         problem.cost_missed_detection * problem.prior_h1() *
             rates.missed_detection;
}

double grid_search_common_threshold(const TeamProblem& problem, double lo,
                                    double hi) {
  const auto risk = [&](double t) {
    return enumerate_one_shot_risk(
        problem,
        std::vector<double>(static_cast<std::size_t>(problem.team_size), t));
  };
  constexpr int kGridPoints = 4001;
  double best_t = lo;
  double best_r = risk(lo);
  for (int i = 1; i < kGridPoints; ++i) {
    const double t = lo + (hi - lo) * i / (kGridPoints - 1);
    const double r = risk(t);
    if (r < best_r) {
      best_r = r;
      best_t = t;
    }
  }
  double a = std::max(lo, best_t - (hi - lo) / (kGridPoints - 1));
  double b = std::min(hi, best_t + (hi - lo) / (kGridPoints - 1));
  // Shrink the bracket by thirds around the smaller interior value.
  for (int round = 0; round < 200 && b - a > 1e-13; ++round) {
    const double u = a + (b - a) / 3.0;
    const double v = b - (b - a) / 3.0;
    if (risk(u) <= risk(v)) {
      b = v;
    } else {
      a = u;
    }
  }
  return 0.5 * (a + b);
}

namespace {

/// P{the team eventually decides 1 | H = hypothesis} from one node downward.
double decide_one_probability(const TeamProblem& problem,
                              const PolicyTree& policy, int hypothesis,
                              const History& prefix, int votes_still_needed) {
  const int remaining = problem.team_size - prefix.size();
  if (votes_still_needed <= 0) return 1.0;
  if (votes_still_needed > remaining) return 0.0;
  const double threshold = policy.threshold(prefix);
  if (std::isnan(threshold)) {
    throw std::invalid_argument("reachable prefix without a threshold: \"" +
                                prefix.to_string() + "\"");
  }
  const ErrorPair e = problem.model.error_probs(threshold);
  const double p_vote1 =
      hypothesis == 0 ? e.false_alarm : 1.0 - e.missed_detection;
  History ones = prefix;
  ones.push_back(1);
  History zeros = prefix;
  zeros.push_back(0);
  return p_vote1 * decide_one_probability(problem, policy, hypothesis, ones,
                                          votes_still_needed - 1) +
         (1.0 - p_vote1) * decide_one_probability(problem, policy, hypothesis,
                                                  zeros, votes_still_needed);
}

}  // namespace

double enumerate_policy_risk(const TeamProblem& problem,
                             const PolicyTree& policy) {
  const History root;
  const double pe1 =
      decide_one_probability(problem, policy, 0, root, problem.votes_needed);
  const double pe2 = 1.0 - decide_one_probability(problem, policy, 1, root,
                                                  problem.votes_needed);
  return problem.cost_false_alarm * problem.prior_h0 * pe1 +
         problem.cost_missed_detection * problem.prior_h1() * pe2;
}

PolicyTree descend_policy(const TeamProblem& problem, const PolicyTree& start,
                          double lo, double hi, int rounds) {
  PolicyTree policy = start;
  const int n = problem.team_size;
  // Collect the undecided prefixes once; their reachability never changes.
  std::vector<History> nodes;
  const std::function<void(const History&, int)> collect =
      [&](const History& prefix, int votes_still_needed) {
        const int remaining = n - prefix.size();
        if (votes_still_needed <= 0 || votes_still_needed > remaining) return;
        nodes.push_back(prefix);
        History ones = prefix;
        ones.push_back(1);
        History zeros = prefix;
        zeros.push_back(0);
        collect(ones, votes_still_needed - 1);
        collect(zeros, votes_still_needed);
      };
  collect(History(), problem.votes_needed);

  for (int round = 0; round < rounds; ++round) {
    double moved = 0.0;
    for (const History& prefix : nodes) {
      double a = lo;
      double b = hi;
      const auto risk_with = [&](double t) {
        policy.set_threshold(prefix, t);
        return enumerate_policy_risk(problem, policy);
      };
      for (int step = 0; step < 80 && b - a > 1e-12; ++step) {
        const double u = a + (b - a) / 3.0;
        const double v = b - (b - a) / 3.0;
        if (risk_with(u) <= risk_with(v)) {
          b = v;
        } else {
          a = u;
        }
      }
      const double best = 0.5 * (a + b);
      moved = std::max(moved, std::fabs(best - policy.threshold(prefix)));
      policy.set_threshold(prefix, best);
    }
    if (moved < 1e-11) break;
  }
  return policy;
}

}  // namespace secretballot::testing
