#include "config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "secretballot/json_io.hpp"

namespace secretballot::cli {

using nlohmann::json;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file \"" + path + "\"");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("config file \"" + path + "\" is not valid JSON");
  }
  if (!doc.is_object()) {
    throw ConfigError("config file \"" + path + "\" must hold a JSON object");
  }
  return doc;
}

LikelihoodModel parse_model(const json& model) {
  if (!model.is_object()) {
    throw ConfigError("\"model\" must be a JSON object");
  }
  try {
    return model_from_json(model.dump());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

double require_config_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ConfigError(std::string("\"problem\" needs numeric field \"") + key +
                      "\"");
  }
  return it->get<double>();
}

int require_config_int(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw ConfigError(std::string("\"problem\" needs integer field \"") + key +
                      "\"");
  }
  return it->get<int>();
}

}  // namespace

TeamProblem parse_problem(const json& config) {
  const auto it = config.find("problem");
  if (it == config.end() || !it->is_object()) {
    throw ConfigError("config needs a \"problem\" object");
  }
  const json& p = *it;
  const auto model_it = p.find("model");
  if (model_it == p.end()) {
    throw ConfigError("\"problem\" needs a \"model\" object");
  }
  const LikelihoodModel model = parse_model(*model_it);
  try {
    return TeamProblem(require_config_number(p, "prior_h0"),
                       require_config_number(p, "cost_false_alarm"),
                       require_config_number(p, "cost_missed_detection"), model,
                       require_config_int(p, "team_size"),
                       require_config_int(p, "votes_needed"));
  } catch (const std::invalid_argument& e) {
    // Re-badge validation failures so they map to the config exit code.
    throw ConfigError(e.what());
  }
}

json problem_to_config(const TeamProblem& problem) {
  return json{{"prior_h0", problem.prior_h0},
              {"cost_false_alarm", problem.cost_false_alarm},
              {"cost_missed_detection", problem.cost_missed_detection},
              {"team_size", problem.team_size},
              {"votes_needed", problem.votes_needed},
              {"model", json::parse(model_to_json(problem.model))}};
}

namespace {

template <typename T>
T pick(const std::optional<T>& flag, const json& config, const char* key,
       T fallback) {
  if (flag.has_value()) return *flag;
  const auto it = config.find(key);
  if (it == config.end()) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    if (!it->is_number()) {
      throw ConfigError(std::string("config field \"") + key +
                        "\" must be a number");
    }
  } else {
    if (!it->is_number_integer() || it->get<double>() < 0) {
      throw ConfigError(std::string("config field \"") + key +
                        "\" must be a nonnegative integer");
    }
  }
  return it->get<T>();
}

}  // namespace

double resolved_tol(const GlobalOptions& options, const json& config) {
  const double tol = pick(options.tol, config, "tol", kDefaultTolerance);
  if (!(tol > 0.0)) {
    throw ConfigError("tolerance must be positive");
  }
  return tol;
}

std::uint64_t resolved_seed(const GlobalOptions& options, const json& config) {
  return pick(options.seed, config, "seed", kDefaultSeed);
}

std::uint64_t resolved_trials(const GlobalOptions& options,
                              const json& config) {
  const std::uint64_t trials =
      pick(options.trials, config, "trials", kDefaultTrials);
  if (trials == 0) {
    throw ConfigError("trials must be positive");
  }
  return trials;
}

int resolved_jobs(const GlobalOptions& options, const json& config) {
  const int jobs = pick(options.jobs, config, "jobs", 1);
  if (jobs < 1) {
    throw ConfigError("jobs must be at least 1");
  }
  return jobs;
}

std::string write_output_file(const GlobalOptions& options,
                              const std::string& name,
                              const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory \"" + options.out_dir +
                      "\": " + ec.message());
  }
  const fs::path path = fs::path(options.out_dir) / name;
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write output file \"" + path.string() + "\"");
  }
  out << content;
  if (!out.flush()) {
    throw ConfigError("failed writing output file \"" + path.string() + "\"");
  }
  log_line("wrote " + path.string());
  return path.string();
}

bool log_enabled() {
  const char* value = std::getenv("SECRET_BALLOT_LOG");
  return value != nullptr && value[0] != '\0' &&
         !(value[0] == '0' && value[1] == '\0');
}

void log_line(const std::string& message) {
  if (log_enabled()) {
    std::cerr << "[secret-ballot] " << message << "\n";
  }
}

}  // namespace secretballot::cli
