#include "secretballot/threshold_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "secretballot/numeric.hpp"

namespace secretballot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kProbeCount = 512;
// Cyclic best response converges linearly at a problem-dependent rate; wide
// teams with strong vote coupling have been observed to need a few hundred
// sweeps from distant starts, so the cap leaves generous headroom.
constexpr int kPbpoMaxSweeps = 2000;
constexpr double kPbpoMoveTol = 1e-9;

/// |a - b| that treats equal infinities as no movement.
double threshold_change(double a, double b) {
  if (a == b) return 0.0;
  return std::fabs(a - b);
}

/// Cost-weighted pivot odds for one agent: the agent's vote changes the team
/// decision exactly when the others split votes_needed-1 to team-rest, and
/// beta/gamma below are the prior-and-cost weights of that event under H=0
/// and H=1 respectively.
struct PivotWeights {
  double beta = 0.0;   // cost_false_alarm * prior_h0 * P{pivot | H=0}
  double gamma = 0.0;  // cost_missed_detection * prior_h1 * P{pivot | H=1}
};

PivotWeights pivot_weights(const TeamProblem& problem,
                           std::span<const double> thresholds, std::size_t agent) {
  std::vector<double> vote1_h0;
  std::vector<double> vote1_h1;
  vote1_h0.reserve(thresholds.size() - 1);
  vote1_h1.reserve(thresholds.size() - 1);
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    if (j == agent) continue;
    const ErrorPair e = problem.model.error_probs(thresholds[j]);
    vote1_h0.push_back(e.false_alarm);
    vote1_h1.push_back(1.0 - e.missed_detection);
  }
  const int pivot_count = problem.votes_needed - 1;
  const std::vector<double> pmf0 = poisson_binomial_pmf(vote1_h0);
  const std::vector<double> pmf1 = poisson_binomial_pmf(vote1_h1);
  PivotWeights w;
  w.beta = problem.cost_false_alarm * problem.prior_h0 *
           pmf0[static_cast<std::size_t>(pivot_count)];
  w.gamma = problem.cost_missed_detection * problem.prior_h1() *
            pmf1[static_cast<std::size_t>(pivot_count)];
  return w;
}

/// Pivot weights for `agent` with every decision-forcing teammate pulled just
/// inside the probe window: +-infinity sentinels to the window ends and
/// at-or-below-support thresholds to a whisker above the support edge. As the
/// pull shrinks these weights converge to the limiting pivot odds, and they
/// are strictly positive, so they define a best response even where the exact
/// odds are 0/0.
PivotWeights limiting_pivot_weights(const TeamProblem& problem,
                                    std::span<const double> thresholds,
                                    std::size_t agent,
                                    const ProbeWindow& window) {
  const double support_lo = problem.model.support_lower_bound();
  const double whisker = window.lo + 1e-9 * (window.hi - window.lo);
  std::vector<double> nudged(thresholds.begin(), thresholds.end());
  for (double& tj : nudged) {
    if (tj == kInf) {
      tj = window.hi;
    } else if (tj == -kInf || tj <= support_lo) {
      tj = std::isfinite(support_lo) ? whisker : window.lo;
    }
  }
  return pivot_weights(problem, nudged, agent);
}

}  // namespace

StationarityResidual stationarity_residual(const TeamProblem& problem,
                                           double threshold) {
  const ErrorPair e = problem.model.error_probs(threshold);
  const int m = problem.team_size;
  const int l = problem.votes_needed;
  // Log of the pivot odds: the threshold is first-order optimal when the
  // likelihood ratio there equals exp(num - den).
  const double num = std::log(problem.cost_false_alarm * problem.prior_h0) +
                     xlogy(l - 1, e.false_alarm) +
                     xlogy(m - l, 1.0 - e.false_alarm);
  const double den =
      std::log(problem.cost_missed_detection * problem.prior_h1()) +
      xlogy(m - l, e.missed_detection) + xlogy(l - 1, 1.0 - e.missed_detection);
  double lr;
  if (threshold == -kInf) {
    lr = 0.0;  // infimum of the likelihood-ratio range
  } else if (threshold == kInf) {
    lr = kInf;
  } else if (problem.model.support_lower_bound() > threshold) {
    lr = problem.model.likelihood_ratio(problem.model.support_lower_bound());
  } else {
    lr = problem.model.likelihood_ratio(threshold);
  }
  StationarityResidual res;
  if (std::isfinite(num) && std::isfinite(den)) {
    const double ratio = std::exp(num - den);
    res.value = lr - ratio;
    res.degenerate = !std::isfinite(res.value);
    return res;
  }
  res.degenerate = true;
  if (num == -kInf && den == -kInf) {
    res.value = std::numeric_limits<double>::quiet_NaN();
  } else if (num == -kInf) {
    res.value = lr;  // pivot odds collapse to zero
  } else {
    res.value = -kInf;  // pivot odds blow up
  }
  return res;
}

ProbeWindow threshold_probe_window(const LikelihoodModel& model,
                                   double prior_h0, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 0.5)) {
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  }
  const double prior_h1 = 1.0 - prior_h0;
  const auto mixture_cdf = [&](double t) {
    return prior_h0 * model.cdf(0, t) + prior_h1 * model.cdf(1, t);
  };
  const double lo_bracket =
      std::min(model.quantile(0, alpha), model.quantile(1, alpha)) - 1.0;
  const double hi_bracket =
      std::max(model.quantile(0, 1.0 - alpha), model.quantile(1, 1.0 - alpha)) +
      1.0;
  ProbeWindow window;
  const double support_lo = model.support_lower_bound();
  if (std::isfinite(support_lo)) {
    // A bounded support makes its lower edge the canonical "always vote 1"
    // threshold; include it so boundary optima are representable exactly.
    window.lo = support_lo;
  } else {
    window.lo = bisect_root([&](double t) { return mixture_cdf(t) - alpha; },
                            lo_bracket, hi_bracket)
                    .x;
  }
  window.hi =
      bisect_root([&](double t) { return mixture_cdf(t) - (1.0 - alpha); },
                  lo_bracket, hi_bracket)
          .x;
  return window;
}

OptimizationResult optimize_identical_threshold(const TeamProblem& problem,
                                                double residual_tol) {
  const ProbeWindow window =
      threshold_probe_window(problem.model, problem.prior_h0);
  OptimizationResult result;

  // Coarse scan: locate the best dip and count how many the curve has.
  std::vector<double> probe_t(kProbeCount);
  std::vector<double> probe_r(kProbeCount);
  const double step = (window.hi - window.lo) / (kProbeCount - 1);
  std::size_t best = 0;
  double r_min = kInf;
  double r_max = -kInf;
  for (int i = 0; i < kProbeCount; ++i) {
    probe_t[i] = window.lo + step * i;
    probe_r[i] = common_threshold_risk(problem, probe_t[i]);
    if (probe_r[i] < probe_r[best]) best = i;
    r_min = std::min(r_min, probe_r[i]);
    r_max = std::max(r_max, probe_r[i]);
  }
  const double dip_margin = 1e-12 * (r_max - r_min);
  int dips = 0;
  for (int i = 1; i + 1 < kProbeCount; ++i) {
    if (probe_r[i] + dip_margin < probe_r[i - 1] &&
        probe_r[i] + dip_margin < probe_r[i + 1]) {
      ++dips;
    }
  }
  result.multimodal_warning = dips > 1;

  // Narrow with golden section on the winning bracket.
  const double bracket_lo = best == 0 ? window.lo : probe_t[best - 1];
  const double bracket_hi =
      best + 1 == kProbeCount ? window.hi : probe_t[best + 1];
  const GoldenResult golden = golden_section_minimize(
      [&](double t) { return common_threshold_risk(problem, t); }, bracket_lo,
      bracket_hi, 1e-10);
  double lambda = golden.x;
  double risk = golden.fx;
  result.iterations = golden.iterations;

  // Polish by driving the first-order gap to zero; keep the polished point
  // only when it is a genuine root and does not cost risk.
  const auto gap = [&](double t) { return stationarity_residual(problem, t); };
  if (!gap(lambda).degenerate) {
    for (double radius = 1e-6; radius <= 0.2; radius *= 8.0) {
      const double a = std::max(lambda - radius, window.lo);
      const double b = std::min(lambda + radius, window.hi);
      const StationarityResidual fa = gap(a);
      const StationarityResidual fb = gap(b);
      if (fa.degenerate || fb.degenerate) break;
      if (std::signbit(fa.value) != std::signbit(fb.value)) {
        const BisectResult root = bisect_root(
            [&](double t) { return gap(t).value; }, a, b, 200);
        result.iterations += root.iterations;
        if (root.bracketed) {
          const double polished_risk = common_threshold_risk(problem, root.x);
          if (polished_risk <= risk + 1e-15) {
            lambda = root.x;
            risk = polished_risk;
          }
        }
        break;
      }
    }
  }

  // A minimum on a finite support edge is a legitimate constrained optimum:
  // the rule degenerates to "always vote 1" and the first-order condition is
  // one-sided (the gap must be nonnegative, i.e. risk cannot drop by moving
  // into the support). Snap exactly onto the edge when the edge ties the best
  // risk found and that certificate holds; the risk slope can vanish to high
  // order at the edge, leaving a wide basin that is flat to double precision,
  // so the tie test is on risk alone, not on where the line search stopped.
  bool edge_optimum = false;
  StationarityResidual final_gap = gap(lambda);
  const double support_lo = problem.model.support_lower_bound();
  if (std::isfinite(support_lo) && window.lo == support_lo) {
    const double edge_risk = common_threshold_risk(problem, window.lo);
    if (edge_risk <= risk + 1e-15) {
      StationarityResidual edge_gap = gap(window.lo);
      if (edge_gap.degenerate) {
        // Pivot odds can be 0/0 exactly on the edge; a whisker inside the
        // window still carries the slope sign.
        edge_gap = gap(window.lo + 1e-9 * (window.hi - window.lo));
      }
      if (!edge_gap.degenerate && edge_gap.value >= -residual_tol) {
        lambda = window.lo;
        risk = edge_risk;
        final_gap = edge_gap;
        edge_optimum = true;
      }
    }
  }

  result.thresholds.assign(static_cast<std::size_t>(problem.team_size), lambda);
  result.risk = risk;
  result.residual = final_gap.value;
  result.converged =
      edge_optimum ||
      (!final_gap.degenerate && std::fabs(final_gap.value) <= residual_tol);
  return result;
}

OptimizationResult pbpo_optimize(const TeamProblem& problem,
                                 std::span<const double> initial_thresholds) {
  const std::size_t n = static_cast<std::size_t>(problem.team_size);
  if (initial_thresholds.size() != n) {
    throw std::invalid_argument(
        "expected one initial threshold per agent, got " +
        std::to_string(initial_thresholds.size()) + " for team_size=" +
        std::to_string(problem.team_size));
  }
  for (double t : initial_thresholds) {
    if (std::isnan(t)) {
      throw std::invalid_argument("initial thresholds must not be NaN");
    }
  }

  const ProbeWindow window =
      threshold_probe_window(problem.model, problem.prior_h0);
  OptimizationResult result;
  result.thresholds.assign(initial_thresholds.begin(), initial_thresholds.end());
  std::vector<double>& t = result.thresholds;

  bool converged = false;
  int sweeps = 0;
  while (sweeps < kPbpoMaxSweeps && !converged) {
    ++sweeps;
    double max_move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      PivotWeights w = pivot_weights(problem, t, i);
      double proposal = t[i];
      if (w.beta == 0.0 && w.gamma == 0.0) {
        // A teammate's fixed vote currently forces the decision, so this
        // agent's risk is flat and "best response" is undefined. Respond to
        // the forcing teammates pulled just inside the window instead (the
        // limiting best response). The move is risk-neutral now, but it
        // dissolves frozen states in which one decision-forcing teammate
        // would otherwise pin everyone else at arbitrary thresholds.
        w = limiting_pivot_weights(problem, t, i, window);
        if (w.beta == 0.0 && w.gamma == 0.0) continue;  // numerically dead
      }
      if (w.gamma == 0.0) {
        proposal = kInf;  // a vote of 1 can only ever cause a false alarm
      } else if (w.beta == 0.0) {
        proposal = -kInf;  // a vote of 0 can only ever miss the detection
      } else {
        // The agent's conditional risk is strictly quasiconvex in its own
        // threshold, with the unique stationary point where the likelihood
        // ratio equals the pivot odds, so the clamped closed form is the
        // exact in-window minimizer. (A response below the support edge
        // clamps to the edge, which acts identically to any threshold under
        // it; a comparison-based line search would only blur the solution
        // with its ~sqrt(eps) value-noise floor.)
        proposal = std::clamp(
            problem.model.likelihood_ratio_inverse(w.beta / w.gamma),
            window.lo, window.hi);
      }
      max_move = std::max(max_move, threshold_change(proposal, t[i]));
      t[i] = proposal;
    }
    result.sweep_risks.push_back(bayes_risk(problem, t));
    converged = max_move < kPbpoMoveTol;
  }

  // Certify the fixed point: worst interior first-order gap at the final
  // thresholds (sentinel-pinned and never-pivotal agents carry no gap, and an
  // agent sitting on the support edge is optimal one-sidedly whenever its gap
  // points into the support).
  const double support_lo = problem.model.support_lower_bound();
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t[i])) continue;
    const PivotWeights w = pivot_weights(problem, t, i);
    if (w.beta <= 0.0 || w.gamma <= 0.0) continue;
    const double gap_i =
        problem.model.likelihood_ratio(std::max(t[i], support_lo)) -
        w.beta / w.gamma;
    if (t[i] <= support_lo && gap_i >= 0.0) continue;
    residual = std::max(residual, std::fabs(gap_i));
  }
  result.risk = bayes_risk(problem, t);
  result.residual = residual;
  result.iterations = sweeps;
  result.converged = converged && residual <= 1e-8;
  return result;
}

}  // namespace secretballot
