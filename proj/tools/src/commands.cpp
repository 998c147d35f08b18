#include "commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

#include "secretballot/json_io.hpp"
#include "secretballot/monte_carlo.hpp"
#include "secretballot/rng.hpp"
#include "secretballot/sequential_dp.hpp"
#include "secretballot/threshold_optimizer.hpp"

namespace secretballot::cli {

using nlohmann::json;

namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

/// Threshold spread across pbpo runs: the widest per-agent range, with equal
/// infinities counting as zero width.
double threshold_spread(const std::vector<OptimizationResult>& runs) {
  if (runs.empty()) return 0.0;
  const std::size_t n = runs.front().thresholds.size();
  double spread = 0.0;
  for (std::size_t agent = 0; agent < n; ++agent) {
    double lo = runs.front().thresholds[agent];
    double hi = lo;
    for (const OptimizationResult& run : runs) {
      lo = std::min(lo, run.thresholds[agent]);
      hi = std::max(hi, run.thresholds[agent]);
    }
    const double width = hi == lo ? 0.0 : hi - lo;
    spread = std::max(spread, width);
  }
  return spread;
}

}  // namespace

int run_optimize(const GlobalOptions& options) {
  const json config = load_config(options.config_path);
  const TeamProblem problem = parse_problem(config);
  const double tol = resolved_tol(options, config);
  const std::uint64_t seed = resolved_seed(options, config);

  const json opt_cfg = config.value("optimize", json::object());
  const int pbpo_inits = opt_cfg.value("pbpo_inits", 8);
  const double pbpo_spread_radius = opt_cfg.value("pbpo_spread", 0.5);
  const bool want_curve = opt_cfg.value("risk_curve", false);
  if (pbpo_inits < 0) throw ConfigError("optimize.pbpo_inits must be >= 0");
  if (!(pbpo_spread_radius > 0.0)) {
    throw ConfigError("optimize.pbpo_spread must be positive");
  }

  log_line("optimize: team_size=" + std::to_string(problem.team_size) +
           " votes_needed=" + std::to_string(problem.votes_needed));
  const ProbeWindow window =
      threshold_probe_window(problem.model, problem.prior_h0);
  const OptimizationResult common = optimize_identical_threshold(problem);
  const double lambda_star = common.thresholds.front();

  // Best-response multistart around the common optimum: run 0 starts exactly
  // there, the rest are uniform perturbations within the configured radius.
  std::vector<OptimizationResult> runs;
  bool all_converged = true;
  double worst_residual = 0.0;
  double risk_lo = common.risk;
  double risk_hi = common.risk;
  const std::size_t n = static_cast<std::size_t>(problem.team_size);
  for (int init = 0; init < pbpo_inits; ++init) {
    std::vector<double> start(n, lambda_star);
    if (init > 0) {
      for (std::size_t agent = 0; agent < n; ++agent) {
        const double u = uniform_draw(
            seed, static_cast<std::uint64_t>(init) * n + agent);
        start[agent] = std::clamp(
            lambda_star + (2.0 * u - 1.0) * pbpo_spread_radius, window.lo,
            window.hi);
      }
    }
    OptimizationResult run = pbpo_optimize(problem, start);
    all_converged = all_converged && run.converged;
    worst_residual = std::max(worst_residual, run.residual);
    risk_lo = std::min(risk_lo, run.risk);
    risk_hi = std::max(risk_hi, run.risk);
    runs.push_back(std::move(run));
  }

  json doc = {{"problem", problem_to_config(problem)},
              {"tol", tol},
              {"seed", seed},
              {"window", {{"lo", window.lo}, {"hi", window.hi}}},
              {"lambda_star", lambda_star},
              {"risk", common.risk},
              {"residual", common.residual},
              {"iterations", common.iterations},
              {"converged", common.converged},
              {"multimodal_warning", common.multimodal_warning},
              {"thresholds", common.thresholds}};
  if (pbpo_inits > 0) {
    doc["pbpo"] = {{"inits", pbpo_inits},
                   {"spread_radius", pbpo_spread_radius},
                   {"threshold_spread", threshold_spread(runs)},
                   {"risk_spread", risk_hi - risk_lo},
                   {"worst_residual", worst_residual},
                   {"all_converged", all_converged}};
  }
  write_output_file(options, "optimize.json", doc.dump(2) + "\n");

  if (want_curve) {
    std::string csv = "threshold,risk\n";
    constexpr int kCurvePoints = 512;
    for (int i = 0; i < kCurvePoints; ++i) {
      const double t =
          window.lo + (window.hi - window.lo) * i / (kCurvePoints - 1);
      csv += format_double(t) + "," +
             format_double(common_threshold_risk(problem, t)) + "\n";
    }
    write_output_file(options, "risk_curve.csv", csv);
  }

  std::printf("optimize: lambda_star=%.12g risk=%.12g residual=%.3g converged=%s\n",
              lambda_star, common.risk, common.residual,
              common.converged ? "yes" : "no");
  return 0;
}

int run_verify(const GlobalOptions& options) {
  const json config = load_config(options.config_path);
  const TeamProblem problem = parse_problem(config);
  const double tol = resolved_tol(options, config);
  const double risk_tol = config.value("risk_tol", 1e-9);
  if (!(risk_tol > 0.0)) throw ConfigError("risk_tol must be positive");

  log_line("verify: team_size=" + std::to_string(problem.team_size) +
           " votes_needed=" + std::to_string(problem.votes_needed));
  const SecretBallotReport report =
      verify_secret_ballot(problem, tol, risk_tol);

  json doc = json::parse(verify_report_to_json(report));
  doc["problem"] = problem_to_config(problem);
  doc["tol"] = tol;
  doc["risk_tol"] = risk_tol;
  doc["policy_file"] = "policy.json";
  doc["history_file"] = "verify_history.csv";
  write_output_file(options, "verify.json", doc.dump(2) + "\n");
  write_output_file(options, "policy.json", policy_to_json(report.policy) + "\n");

  // Per-history detail: threshold, deviation from the one-shot optimum, and
  // the belief a voter holds there.
  std::string csv = "history,threshold,deviation,belief_h0\n";
  const std::uint32_t nodes = 1u << problem.team_size;
  for (std::uint32_t node = 1; node < nodes; ++node) {
    int depth = 0;
    int ones = 0;
    for (std::uint32_t probe = node; probe > 1; probe >>= 1) {
      ++depth;
      ones += static_cast<int>(probe & 1u);
    }
    const int votes_needed = problem.votes_needed - ones;
    if (votes_needed <= 0 || votes_needed > problem.team_size - depth) {
      continue;  // decided: no vote happens here
    }
    std::string bits;
    for (int k = depth - 1; k >= 0; --k) {
      bits.push_back((node >> k) & 1u ? '1' : '0');
    }
    const History history = History::from_string(bits);
    const double threshold = report.policy.threshold(history);
    csv += "\"" + bits + "\"," + format_double(threshold) + "," +
           format_double(std::fabs(threshold - report.lambda_star)) + "," +
           format_double(belief_at(problem, report.policy, history)) + "\n";
  }
  write_output_file(options, "verify_history.csv", csv);

  std::printf(
      "verify: %s lambda_star=%.12g max_deviation=%.3g risk_gap=%.3g "
      "histories=%d\n",
      report.pass ? "PASS" : "FAIL", report.lambda_star,
      report.max_threshold_deviation, report.risk_gap,
      report.histories_checked);
  return report.pass ? 0 : 1;
}

int run_simulate(const GlobalOptions& options) {
  const json config = load_config(options.config_path);
  const TeamProblem problem = parse_problem(config);
  const std::uint64_t seed = resolved_seed(options, config);
  const std::uint64_t trials = resolved_trials(options, config);
  const int jobs = resolved_jobs(options, config);

  const json sim_cfg = config.value("simulate", json::object());
  const std::string mode = sim_cfg.value("mode", "parallel");
  if (mode != "parallel" && mode != "sequential") {
    throw ConfigError("simulate.mode must be \"parallel\" or \"sequential\"");
  }
  log_line("simulate: mode=" + mode + " trials=" + std::to_string(trials) +
           " jobs=" + std::to_string(jobs));

  // Deterministic parallelism: counter-indexed draws make any contiguous
  // partition of the trial range reproduce the single-threaded tallies.
  const auto run_blocks =
      [&](const std::function<SimCounts(std::uint64_t, std::uint64_t)>& block) {
        std::vector<SimCounts> partial(static_cast<std::size_t>(jobs));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) {
          const std::uint64_t first =
              trials * static_cast<std::uint64_t>(j) / jobs;
          const std::uint64_t last =
              trials * static_cast<std::uint64_t>(j + 1) / jobs;
          workers.emplace_back([&partial, &block, j, first, last] {
            partial[static_cast<std::size_t>(j)] = block(first, last);
          });
        }
        for (std::thread& w : workers) w.join();
        SimCounts total;
        for (const SimCounts& c : partial) total += c;
        return total;
      };

  SimCounts counts;
  double analytic_risk = 0.0;
  json mode_detail;
  if (mode == "parallel") {
    std::vector<double> thresholds;
    const json thresholds_cfg = sim_cfg.value("thresholds", json("optimal"));
    if (thresholds_cfg.is_string() && thresholds_cfg == "optimal") {
      thresholds = optimize_identical_threshold(problem).thresholds;
    } else if (thresholds_cfg.is_array()) {
      for (const json& t : thresholds_cfg) {
        if (!t.is_number()) {
          throw ConfigError("simulate.thresholds must be numbers");
        }
        thresholds.push_back(t.get<double>());
      }
      if (thresholds.size() != static_cast<std::size_t>(problem.team_size)) {
        throw ConfigError("simulate.thresholds needs one entry per agent");
      }
    } else {
      throw ConfigError(
          "simulate.thresholds must be \"optimal\" or an array of numbers");
    }
    counts = run_blocks([&](std::uint64_t first, std::uint64_t last) {
      return simulate_parallel_counts(problem, thresholds, first, last, seed);
    });
    analytic_risk = bayes_risk(problem, thresholds);
    mode_detail = {{"thresholds", thresholds}};
  } else {
    const auto policy_it = sim_cfg.find("policy");
    if (policy_it == sim_cfg.end() || !policy_it->is_string()) {
      throw ConfigError(
          "simulate.policy (a policy JSON path) is required for sequential "
          "mode");
    }
    const std::string policy_path = policy_it->get<std::string>();
    std::ifstream in(policy_path);
    if (!in) {
      throw ConfigError("cannot open policy file \"" + policy_path + "\"");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const PolicyTree policy = policy_from_json(buffer.str());
    counts = run_blocks([&](std::uint64_t first, std::uint64_t last) {
      return simulate_sequential_counts(problem, policy, first, last, seed);
    });
    analytic_risk = evaluate_policy_risk(problem, policy);
    mode_detail = {{"policy_file", policy_path}};
  }

  const SimReport report = make_report(problem, counts, trials, seed);
  const double abs_error = std::fabs(report.empirical_risk - analytic_risk);

  json doc = {{"problem", problem_to_config(problem)},
              {"seed", seed},
              {"trials", trials},
              {"jobs", jobs},
              {"mode", mode},
              {"analytic_risk", analytic_risk},
              {"abs_error", abs_error},
              {"within_ci95", abs_error <= report.ci95_halfwidth},
              {"report", json::parse(sim_report_to_json(report))}};
  doc.update(mode_detail);
  write_output_file(options, "simulate.json", doc.dump(2) + "\n");

  std::printf(
      "simulate: mode=%s trials=%" PRIu64
      " empirical_risk=%.9g analytic_risk=%.9g abs_error=%.3g ci95=%.3g\n",
      mode.c_str(), trials, report.empirical_risk, analytic_risk, abs_error,
      report.ci95_halfwidth);
  return 0;
}

}  // namespace secretballot::cli
