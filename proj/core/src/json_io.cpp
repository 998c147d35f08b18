#include "secretballot/json_io.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace secretballot {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json threshold_to_json(double t) {
  if (std::isnan(t)) return "dont-care";
  if (t == kInf) return "+inf";
  if (t == -kInf) return "-inf";
  return t;
}

double threshold_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "dont-care") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument(
      "threshold must be a number, \"+inf\", \"-inf\" or \"dont-care\"");
}

json parse_document(const std::string& text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw std::invalid_argument(std::string("malformed JSON in ") + what);
  }
  return doc;
}

const json& require_field(const json& doc, const char* key, const char* what) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw std::invalid_argument(std::string(what) + " is missing field \"" +
                                key + "\"");
  }
  return *it;
}

double require_number(const json& doc, const char* key, const char* what) {
  const json& field = require_field(doc, key, what);
  if (!field.is_number()) {
    throw std::invalid_argument(std::string(what) + " field \"" + key +
                                "\" must be a number");
  }
  return field.get<double>();
}

}  // namespace

std::string policy_to_json(const PolicyTree& policy) {
  json entries = json::array();
  for (std::uint32_t node = 1; node < policy.node_count(); ++node) {
    // Recover the history string from the node index (bits below the
    // leading 1, oldest vote first).
    std::string bits;
    std::uint32_t width = 0;
    for (std::uint32_t probe = node; probe > 1; probe >>= 1) ++width;
    for (std::uint32_t k = width; k-- > 0;) {
      bits.push_back((node >> k) & 1u ? '1' : '0');
    }
    const double t = policy.threshold_at(node);
    entries.push_back(json{{"history", bits},
                           {"threshold", threshold_to_json(t)},
                           {"decided", std::isnan(t)}});
  }
  const json doc = {{"team_size", policy.team_size()}, {"entries", entries}};
  return doc.dump(2);
}

PolicyTree policy_from_json(const std::string& text) {
  const json doc = parse_document(text, "policy");
  const json& size_field = require_field(doc, "team_size", "policy");
  if (!size_field.is_number_integer()) {
    throw std::invalid_argument("policy field \"team_size\" must be an integer");
  }
  PolicyTree policy(size_field.get<int>());
  const json& entries = require_field(doc, "entries", "policy");
  if (!entries.is_array()) {
    throw std::invalid_argument("policy field \"entries\" must be an array");
  }
  std::vector<bool> seen(policy.node_count(), false);
  for (const json& entry : entries) {
    const json& history_field = require_field(entry, "history", "policy entry");
    if (!history_field.is_string()) {
      throw std::invalid_argument("policy entry history must be a string");
    }
    const History history =
        History::from_string(history_field.get<std::string>());
    if (history.size() >= policy.team_size()) {
      throw std::invalid_argument("policy entry history \"" +
                                  history.to_string() +
                                  "\" is too long for team_size " +
                                  std::to_string(policy.team_size()));
    }
    if (seen[history.node_index()]) {
      throw std::invalid_argument("duplicate policy entry for history \"" +
                                  history.to_string() + "\"");
    }
    seen[history.node_index()] = true;
    const double t =
        threshold_from_json(require_field(entry, "threshold", "policy entry"));
    if (entry.contains("decided")) {
      const json& decided = entry["decided"];
      if (!decided.is_boolean() || decided.get<bool>() != std::isnan(t)) {
        throw std::invalid_argument(
            "policy entry decided flag contradicts its threshold (history \"" +
            history.to_string() + "\")");
      }
    }
    policy.set_threshold(history, t);
  }
  return policy;
}

std::string model_to_json(const LikelihoodModel& model) {
  json doc;
  if (model.family() == ModelFamily::gaussian_shift) {
    doc = {{"family", "gaussian-shift"},
           {"mean0", model.mean0()},
           {"mean1", model.mean1()},
           {"stddev", model.stddev()}};
  } else {
    doc = {{"family", "exponential-scale"},
           {"scale0", model.scale0()},
           {"scale1", model.scale1()}};
  }
  return doc.dump(2);
}

LikelihoodModel model_from_json(const std::string& text) {
  const json doc = parse_document(text, "model");
  const json& family = require_field(doc, "family", "model");
  if (!family.is_string()) {
    throw std::invalid_argument("model field \"family\" must be a string");
  }
  const std::string name = family.get<std::string>();
  if (name == "gaussian-shift") {
    return LikelihoodModel::gaussian_shift(
        require_number(doc, "mean0", "gaussian-shift model"),
        require_number(doc, "mean1", "gaussian-shift model"),
        require_number(doc, "stddev", "gaussian-shift model"));
  }
  if (name == "exponential-scale") {
    return LikelihoodModel::exponential_scale(
        require_number(doc, "scale0", "exponential-scale model"),
        require_number(doc, "scale1", "exponential-scale model"));
  }
  throw std::invalid_argument(
      "unknown model family \"" + name +
      "\" (expected \"gaussian-shift\" or \"exponential-scale\")");
}

std::string sim_report_to_json(const SimReport& report) {
  const json doc = {
      {"trials", report.trials},
      {"seed", report.seed},
      {"counts",
       {{"h0_trials", report.counts.h0_trials},
        {"h1_trials", report.counts.h1_trials},
        {"false_alarms", report.counts.false_alarms},
        {"missed_detections", report.counts.missed_detections}}},
      {"empirical_risk", report.empirical_risk},
      {"empirical_false_alarm", report.empirical_false_alarm},
      {"empirical_missed_detection", report.empirical_missed_detection},
      {"ci95_halfwidth", report.ci95_halfwidth}};
  return doc.dump(2);
}

std::string verify_report_to_json(const SecretBallotReport& report) {
  const json doc = {
      {"lambda_star", report.lambda_star},
      {"risk_parallel", report.risk_parallel},
      {"risk_sequential", report.risk_sequential},
      {"risk_gap", report.risk_gap},
      {"max_threshold_deviation", report.max_threshold_deviation},
      {"root_threshold_deviation", report.root_threshold_deviation},
      {"histories_checked", report.histories_checked},
      {"threshold_tolerance", report.threshold_tolerance},
      {"risk_tolerance", report.risk_tolerance},
      {"converged", report.converged},
      {"pass", report.pass}};
  return doc.dump(2);
}

}  // namespace secretballot
