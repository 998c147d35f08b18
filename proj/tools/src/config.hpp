#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "secretballot/team_problem.hpp"

// Config plumbing for the secret-ballot CLI. Every command reads one JSON
// config file; command-line flags override config values, which override
// built-in defaults. Anything wrong with the inputs surfaces as ConfigError
// (exit code 2), with the offending field named in the message.

namespace secretballot::cli {

/// A problem with the config file or the command line, not with the math.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flags shared by the subcommands; std::nullopt means "not given".
struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<int> jobs;
  bool resume = false;
};

inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::uint64_t kDefaultTrials = 1'000'000;

/// Parses the file at path; throws ConfigError on IO or JSON errors.
nlohmann::json load_config(const std::string& path);

/// Builds the model described by a config "model" object.
LikelihoodModel parse_model(const nlohmann::json& model);

/// Builds the problem described by config["problem"]; field names in the
/// config mirror the TeamProblem members.
TeamProblem parse_problem(const nlohmann::json& config);

/// Resolved config echo: the problem (and model) as a JSON object that can
/// be fed back to --config.
nlohmann::json problem_to_config(const TeamProblem& problem);

// flag > config top-level key > default
double resolved_tol(const GlobalOptions& options, const nlohmann::json& config);
std::uint64_t resolved_seed(const GlobalOptions& options,
                            const nlohmann::json& config);
std::uint64_t resolved_trials(const GlobalOptions& options,
                              const nlohmann::json& config);
int resolved_jobs(const GlobalOptions& options, const nlohmann::json& config);

/// Writes content to out_dir/name; throws ConfigError on failure. Returns
/// the full path written.
std::string write_output_file(const GlobalOptions& options,
                              const std::string& name,
                              const std::string& content);

/// Diagnostic logging, enabled by setting SECRET_BALLOT_LOG to anything but
/// "" or "0". Lines go to stderr so stdout stays machine-readable.
bool log_enabled();
void log_line(const std::string& message);

}  // namespace secretballot::cli
