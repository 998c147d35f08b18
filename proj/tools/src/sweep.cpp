#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "secretballot/sequential_dp.hpp"

// The sweep verb: run verify_secret_ballot over a grid of problems and
// append one CSV row per cell. Rows are written in a fixed canonical order
// regardless of --jobs (workers hand results to an in-order appender), so
// the output is byte-stable and an interrupted sweep can resume: the
// existing file is always a prefix of the full result.

namespace secretballot::cli {

using nlohmann::json;

namespace {

constexpr const char* kCsvHeader =
    "family,prior_h0,cost_ratio,team_size,votes_needed,lambda_star,"
    "risk_parallel,risk_sequential,risk_gap,max_threshold_deviation,"
    "root_threshold_deviation,histories_checked,pass\n";

struct SweepCell {
  std::string family;
  double prior_h0;
  double cost_ratio;
  int team_size;
  int votes_needed;
};

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<double> number_list(const json& cfg, const char* key,
                                std::vector<double> fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (!it->is_array() || it->empty()) {
    throw ConfigError(std::string("sweep.") + key +
                      " must be a non-empty array of numbers");
  }
  std::vector<double> values;
  for (const json& v : *it) {
    if (!v.is_number()) {
      throw ConfigError(std::string("sweep.") + key +
                        " must be a non-empty array of numbers");
    }
    values.push_back(v.get<double>());
  }
  return values;
}

std::vector<int> int_list(const json& cfg, const char* key,
                          std::vector<int> fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (!it->is_array() || it->empty()) {
    throw ConfigError(std::string("sweep.") + key +
                      " must be a non-empty array of integers");
  }
  std::vector<int> values;
  for (const json& v : *it) {
    if (!v.is_number_integer()) {
      throw ConfigError(std::string("sweep.") + key +
                        " must be a non-empty array of integers");
    }
    values.push_back(v.get<int>());
  }
  return values;
}

/// Builds the grid in canonical order: family, prior, cost ratio, team size,
/// fusion rule – each ascending, families gaussian-shift first.
std::vector<SweepCell> build_cells(const json& sweep_cfg) {
  std::vector<std::string> families = {"gaussian-shift", "exponential-scale"};
  if (const auto it = sweep_cfg.find("families"); it != sweep_cfg.end()) {
    if (!it->is_array() || it->empty()) {
      throw ConfigError("sweep.families must be a non-empty array of strings");
    }
    families.clear();
    for (const json& f : *it) {
      if (!f.is_string()) {
        throw ConfigError("sweep.families must hold strings");
      }
      families.push_back(f.get<std::string>());
    }
  }
  const std::vector<double> priors =
      number_list(sweep_cfg, "p0", {0.2, 0.5, 0.8});
  const std::vector<double> ratios =
      number_list(sweep_cfg, "cost_ratios", {1.0, 2.0, 5.0});
  const std::vector<int> team_sizes =
      int_list(sweep_cfg, "team_sizes", {2, 3, 4, 5, 6});

  // votes_needed: "all" (default) sweeps every rule 1..team_size.
  std::vector<int> fixed_votes;
  bool all_votes = true;
  if (const auto it = sweep_cfg.find("votes_needed"); it != sweep_cfg.end()) {
    if (it->is_string() && *it == "all") {
      all_votes = true;
    } else {
      fixed_votes = int_list(sweep_cfg, "votes_needed", {});
      all_votes = false;
    }
  }

  std::vector<SweepCell> cells;
  for (const std::string& family : families) {
    for (double p0 : priors) {
      for (double ratio : ratios) {
        for (int n : team_sizes) {
          if (all_votes) {
            for (int l = 1; l <= n; ++l) {
              cells.push_back({family, p0, ratio, n, l});
            }
          } else {
            for (int l : fixed_votes) {
              cells.push_back({family, p0, ratio, n, l});
            }
          }
        }
      }
    }
  }
  return cells;
}

LikelihoodModel cell_model(const json& sweep_cfg, const std::string& family) {
  if (family == "gaussian-shift") {
    if (const auto it = sweep_cfg.find("gaussian"); it != sweep_cfg.end()) {
      return parse_model(*it);
    }
    return LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0);
  }
  if (family == "exponential-scale") {
    if (const auto it = sweep_cfg.find("exponential"); it != sweep_cfg.end()) {
      return parse_model(*it);
    }
    return LikelihoodModel::exponential_scale(1.0, 2.0);
  }
  throw ConfigError("sweep.families entries must be \"gaussian-shift\" or "
                    "\"exponential-scale\", got \"" +
                    family + "\"");
}

struct SweepRow {
  std::string text;
  bool pass = false;
};

SweepRow run_cell(const json& sweep_cfg, const SweepCell& cell, double tol,
                  double risk_tol) {
  const TeamProblem problem(cell.prior_h0, 1.0, cell.cost_ratio,
                            cell_model(sweep_cfg, cell.family), cell.team_size,
                            cell.votes_needed);
  const SecretBallotReport report =
      verify_secret_ballot(problem, tol, risk_tol);
  SweepRow row;
  row.pass = report.pass;
  row.text = cell.family + "," + format_double(cell.prior_h0) + "," +
             format_double(cell.cost_ratio) + "," +
             std::to_string(cell.team_size) + "," +
             std::to_string(cell.votes_needed) + "," +
             format_double(report.lambda_star) + "," +
             format_double(report.risk_parallel) + "," +
             format_double(report.risk_sequential) + "," +
             format_double(report.risk_gap) + "," +
             format_double(report.max_threshold_deviation) + "," +
             format_double(report.root_threshold_deviation) + "," +
             std::to_string(report.histories_checked) + "," +
             (report.pass ? "true" : "false") + "\n";
  return row;
}

/// Counts the complete rows already present (resume support). Returns 0 for
/// a missing file; throws when the header does not match this build.
std::size_t completed_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) return 0;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  if (content.empty()) return 0;
  const std::string header(kCsvHeader);
  if (content.size() < header.size() ||
      content.compare(0, header.size(), header) != 0) {
    throw ConfigError("existing sweep.csv has a different header; move it "
                      "aside or drop --resume");
  }
  std::size_t rows = 0;
  for (std::size_t pos = header.size();
       (pos = content.find('\n', pos)) != std::string::npos; ++pos) {
    ++rows;  // only complete (newline-terminated) rows count
  }
  return rows;
}

}  // namespace

int run_sweep(const GlobalOptions& options) {
  const json config = load_config(options.config_path);
  const double tol = resolved_tol(options, config);
  const double risk_tol = config.value("risk_tol", 1e-9);
  if (!(risk_tol > 0.0)) throw ConfigError("risk_tol must be positive");
  const int jobs = resolved_jobs(options, config);
  const json sweep_cfg = config.value("sweep", json::object());

  const std::vector<SweepCell> cells = build_cells(sweep_cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory \"" + options.out_dir +
                      "\": " + ec.message());
  }
  const std::string path = (fs::path(options.out_dir) / "sweep.csv").string();

  std::size_t start = 0;
  if (options.resume) {
    start = completed_rows(path);
    if (start > cells.size()) {
      throw ConfigError("existing sweep.csv has more rows than this grid; "
                        "move it aside or fix the config");
    }
    log_line("resume: " + std::to_string(start) + " of " +
             std::to_string(cells.size()) + " rows already done");
  }

  std::ofstream out;
  if (start == 0) {
    out.open(path, std::ios::trunc);
    if (out) out << kCsvHeader;
  } else {
    // Truncate any partial trailing line, then append.
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();
    const std::size_t last_newline = content.find_last_of('\n');
    if (last_newline != std::string::npos) {
      content.resize(last_newline + 1);
    }
    in.close();
    std::ofstream rewrite(path, std::ios::trunc);
    rewrite << content;
    rewrite.close();
    out.open(path, std::ios::app);
  }
  if (!out) {
    throw ConfigError("cannot write sweep output \"" + path + "\"");
  }

  // Workers pull cell indices; the appender thread-safely writes results in
  // canonical order the moment the next-needed row is ready.
  std::mutex mutex;
  std::condition_variable ready;
  std::vector<std::unique_ptr<SweepRow>> results(cells.size());
  std::atomic<std::size_t> next_cell{start};
  std::exception_ptr failure;

  const auto worker = [&] {
    for (;;) {
      const std::size_t index = next_cell.fetch_add(1);
      if (index >= cells.size()) return;
      try {
        auto row = std::make_unique<SweepRow>(
            run_cell(sweep_cfg, cells[index], tol, risk_tol));
        std::lock_guard<std::mutex> lock(mutex);
        results[index] = std::move(row);
        ready.notify_all();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
        ready.notify_all();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(jobs),
                            cells.size() > start ? cells.size() - start : 1);
  pool.reserve(static_cast<std::size_t>(thread_count));
  for (int j = 0; j < thread_count; ++j) pool.emplace_back(worker);

  bool all_pass = true;
  {
    std::unique_lock<std::mutex> lock(mutex);
    for (std::size_t index = start; index < cells.size(); ++index) {
      ready.wait(lock, [&] {
        return results[index] != nullptr || failure != nullptr;
      });
      if (failure) break;
      out << results[index]->text;
      out.flush();
      all_pass = all_pass && results[index]->pass;
      results[index].reset();
    }
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  // Rows done before this run (on resume) also decide the exit code.
  if (start > 0) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.size() >= 6 && line.compare(line.size() - 5, 5, "false") == 0) {
        all_pass = false;
      }
    }
  }

  std::printf("sweep: %zu cells -> %s (%s)\n", cells.size(), path.c_str(),
              all_pass ? "all pass" : "FAILURES present");
  return all_pass ? 0 : 1;
}

}  // namespace secretballot::cli
