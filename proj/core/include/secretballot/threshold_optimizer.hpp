#pragma once

#include <span>
#include <vector>

#include "secretballot/team_problem.hpp"

// Optimizers for the one-shot vote. optimize_identical_threshold finds the
// best common threshold; pbpo_optimize lets each agent repeatedly best-respond
// to the others until no threshold moves.

namespace secretballot {

/// Value of the first-order optimality gap at a common threshold t: the
/// likelihood ratio at t minus the cost-weighted odds that t is pivotal.
/// Zero at an interior optimum. degenerate is set when a per-agent error
/// probability has hit 0 or 1 and the gap is not informative (value is then
/// +-inf or NaN).
struct StationarityResidual {
  double value = 0.0;
  bool degenerate = false;
};

StationarityResidual stationarity_residual(const TeamProblem& problem,
                                           double threshold);

/// Central range of thresholds worth probing: between the alpha and 1-alpha
/// quantiles of the prior-weighted observation mixture. When the observation
/// support is bounded below (exponential-scale), lo is the support edge
/// itself: the threshold there is the canonical "always vote 1" rule, and
/// lopsided priors or costs can make it the genuine optimum.
struct ProbeWindow {
  double lo = 0.0;
  double hi = 0.0;
};

ProbeWindow threshold_probe_window(const LikelihoodModel& model,
                                   double prior_h0, double alpha = 5e-5);

struct OptimizationResult {
  std::vector<double> thresholds;   // one per agent
  double risk = 0.0;
  double residual = 0.0;            // worst first-order gap at the solution
  int iterations = 0;
  bool converged = false;
  bool multimodal_warning = false;  // coarse scan saw more than one local dip
  std::vector<double> sweep_risks;  // risk after each best-response sweep
};

/// Best common threshold: coarse scan of the probe window, golden-section on
/// the winning bracket, then a root polish of the first-order gap. converged
/// means the final gap is at most residual_tol in absolute value — or, when
/// the minimum sits on a finite support edge, that the one-sided condition
/// holds there (the gap is nonnegative, so moving into the support cannot
/// lower the risk). In the one-sided case residual reports the measured gap;
/// only its sign is meaningful.
OptimizationResult optimize_identical_threshold(const TeamProblem& problem,
                                                double residual_tol = 1e-8);

/// Cyclic best-response over agents from the given start. Each inner solve
/// minimizes that agent's exact conditional risk given the others; agents
/// whose vote can only matter under one hypothesis get pinned to the
/// corresponding +-infinity sentinel. Stops when no threshold moves by more
/// than 1e-9 (converged) or after 2000 sweeps.
OptimizationResult pbpo_optimize(const TeamProblem& problem,
                                 std::span<const double> initial_thresholds);

}  // namespace secretballot
