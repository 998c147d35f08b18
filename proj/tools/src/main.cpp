#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "secretballot/sequential_dp.hpp"

// secret-ballot: optimize, verify and simulate count-rule voting teams.
//
// Exit codes: 0 success / checks passed; 1 a numeric check failed;
// 2 bad config or command line; 3 a resource guard refused the problem size.

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResourceGuard = 3;

void add_common_flags(CLI::App* cmd, secretballot::cli::GlobalOptions* options) {
  cmd->add_option("--config", options->config_path,
                  "JSON config file (see README for the schema)")
      ->required();
  cmd->add_option("--out", options->out_dir,
                  "directory for output files (default: current directory)");
  cmd->add_option("--tol", options->tol,
                  "override the tolerance used by checks");
  cmd->add_option("--seed", options->seed, "override the random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "secret-ballot: optimal vote thresholds for teams deciding between two "
      "hypotheses"};
  app.require_subcommand(1);

  secretballot::cli::GlobalOptions options;

  CLI::App* optimize = app.add_subcommand(
      "optimize", "solve the one-shot vote (common threshold + best-response "
                  "multistart)");
  add_common_flags(optimize, &options);

  CLI::App* verify = app.add_subcommand(
      "verify",
      "compare the sequential vote optimum against the one-shot optimum");
  add_common_flags(verify, &options);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo estimate of the team risk");
  add_common_flags(simulate, &options);
  simulate->add_option("--trials", options.trials,
                       "override the number of simulated trials");
  simulate->add_option("--jobs", options.jobs,
                       "worker threads (result is independent of this)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "run the sequential-vs-one-shot comparison over a problem grid");
  add_common_flags(sweep, &options);
  sweep->add_option("--jobs", options.jobs,
                    "worker threads (result is independent of this)");
  sweep->add_flag("--resume", options.resume,
                  "continue an interrupted sweep.csv instead of restarting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;  // --help exits 0, bad usage exits 2
  }

  try {
    if (app.got_subcommand(optimize)) {
      return secretballot::cli::run_optimize(options);
    }
    if (app.got_subcommand(verify)) {
      return secretballot::cli::run_verify(options);
    }
    if (app.got_subcommand(simulate)) {
      return secretballot::cli::run_simulate(options);
    }
    return secretballot::cli::run_sweep(options);
  } catch (const secretballot::TreeSizeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitResourceGuard;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
