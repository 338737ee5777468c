#include "kaidoa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "kaidoa/kai_refine.hpp"

namespace kaidoa {

TrialOutcome run_trial_estimator(EstimatorKind kind, const SnapshotBatch& batch,
                                 const ArrayGeometry& geom, std::span<const int> rmse_indices,
                                 double increment) {
  const SourceScenario& scenario = batch.scenario;
  TrialOutcome outcome;
  try {
    DoaEstimate estimate;
    switch (kind) {
      case EstimatorKind::esprit:
        estimate = esprit(sample_covariance(batch), scenario.num_sources(), geom);
        break;
      case EstimatorKind::iesprit: {
        KaiResult result = iesprit(batch, geom, scenario.num_sources(), increment);
        estimate = result.final;
        break;
      }
      case EstimatorKind::two_step_kai: {
        const std::vector<double> known = scenario.known_doas();
        KaiResult result = two_step_kai(batch, geom, scenario.num_sources(), known, increment);
        estimate = result.final;
        break;
      }
    }
    outcome.errors_deg = match_errors(scenario.doas, estimate, rmse_indices);
    outcome.resolved = resolved(scenario.doas, estimate);
    outcome.mu_opt = estimate.mu_opt;
    outcome.flags = estimate.flags;
  } catch (const std::exception&) {
    outcome.failed = true;
    outcome.resolved = false;
  }
  return outcome;
}

namespace {

void run_trials(const ExperimentConfig& config, const SourceScenario& scenario,
                const ArrayGeometry& geom, std::span<const int> rmse_indices,
                std::vector<std::vector<TrialOutcome>>& outcomes) {
  const int trials = config.trials;
  const auto run_one = [&](int trial) {
    const SnapshotBatch batch =
        synthesize_snapshots(scenario, geom, config.base_seed + static_cast<std::uint64_t>(trial));
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      outcomes[e][trial] = run_trial_estimator(config.estimators[e], batch, geom, rmse_indices,
                                               config.increment);
    }
  };

  int workers = config.threads;
  if (workers == 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  workers = std::max(1, std::min(workers, trials));

  if (workers == 1) {
    for (int trial = 0; trial < trials; ++trial) {
      run_one(trial);
    }
    return;
  }

  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int trial = next.fetch_add(1); trial < trials; trial = next.fetch_add(1)) {
        run_one(trial);
      }
    });
  }
  for (std::thread& worker : pool) {
    worker.join();
  }
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const ArrayGeometry geom = config.geometry();
  const std::vector<int> known = config.known_indices();
  const std::vector<int> rmse_indices =
      config.rmse_scope == RmseScope::unknown_only ? known : std::vector<int>{};

  ResultTable table;
  std::size_t failures = 0;
  for (double snr_db : config.snr_grid()) {
    const double noise_variance = std::pow(10.0, -snr_db / 10.0);
    const SourceScenario scenario = config.scenario(noise_variance);
    const double crb = crb_sqrt_deg(scenario, geom, snr_db);

    std::vector<std::vector<TrialOutcome>> outcomes(
        config.estimators.size(), std::vector<TrialOutcome>(config.trials));
    run_trials(config, scenario, geom, rmse_indices, outcomes);

    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      const std::vector<TrialOutcome>& per_trial = outcomes[e];
      ResultRow row;
      row.snr_db = snr_db;
      row.estimator = config.estimators[e];
      row.rmse_deg = rmse_deg(per_trial);
      row.rmse_db = 20.0 * std::log10(row.rmse_deg);
      int resolved_count = 0;
      double mu_sum = 0.0;
      int mu_count = 0;
      for (const TrialOutcome& outcome : per_trial) {
        if (outcome.resolved) {
          ++resolved_count;
        }
        if (outcome.mu_opt.has_value()) {
          mu_sum += *outcome.mu_opt;
          ++mu_count;
        }
        if (outcome.failed) {
          ++failures;
        }
      }
      row.prob_resolution = static_cast<double>(resolved_count) / config.trials;
      row.mean_mu_opt =
          mu_count > 0 ? mu_sum / mu_count : std::numeric_limits<double>::quiet_NaN();
      row.crb_sqrt_deg = crb;
      table.rows.push_back(row);
    }
  }
  if (log != nullptr && failures > 0) {
    *log << "run_experiment: " << failures << " trial estimator failure(s) recorded as unresolved\n";
  }
  return table;
}

namespace {

std::string format_fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

}  // namespace

std::string csv_string(const ResultTable& table) {
  std::string out = "snr_db,estimator,rmse_deg,rmse_db,prob_resolution,mean_mu_opt,crb_sqrt_deg\n";
  for (const ResultRow& row : table.rows) {
    out += format_fixed(row.snr_db);
    out += ',';
    out += to_string(row.estimator);
    out += ',';
    out += format_fixed(row.rmse_deg);
    out += ',';
    out += format_fixed(row.rmse_db);
    out += ',';
    out += format_fixed(row.prob_resolution);
    out += ',';
    out += format_fixed(row.mean_mu_opt);
    out += ',';
    out += format_fixed(row.crb_sqrt_deg);
    out += '\n';
  }
  return out;
}

void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream stream(path, std::ios::binary);  // binary keeps LF endings
  if (!stream) {
    throw std::runtime_error("emit_csv: cannot open " + path.string());
  }
  stream << csv_string(table);
  if (!stream) {
    throw std::runtime_error("emit_csv: write failed for " + path.string());
  }
}

ResultTable parse_csv(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("parse_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(stream, line) ||
      line != "snr_db,estimator,rmse_deg,rmse_db,prob_resolution,mean_mu_opt,crb_sqrt_deg") {
    throw std::runtime_error("parse_csv: unexpected header in " + path.string());
  }
  ResultTable table;
  while (std::getline(stream, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream fields(line);
    std::string field;
    std::vector<std::string> tokens;
    while (std::getline(fields, field, ',')) {
      tokens.push_back(field);
    }
    if (tokens.size() != 7) {
      throw std::runtime_error("parse_csv: malformed row in " + path.string());
    }
    ResultRow row;
    row.snr_db = std::stod(tokens[0]);
    row.estimator = estimator_from_string(tokens[1]);
    row.rmse_deg = std::stod(tokens[2]);
    row.rmse_db = std::stod(tokens[3]);
    row.prob_resolution = std::stod(tokens[4]);
    row.mean_mu_opt = std::stod(tokens[5]);
    row.crb_sqrt_deg = std::stod(tokens[6]);
    table.rows.push_back(row);
  }
  return table;
}

namespace {

bool close(double a, double b, double tol) {
  if (std::isnan(a) && std::isnan(b)) {
    return true;
  }
  return std::abs(a - b) <= tol;
}

}  // namespace

bool tables_equal(const ResultTable& a, const ResultTable& b, double tol) {
  if (a.rows.size() != b.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ResultRow& x = a.rows[i];
    const ResultRow& y = b.rows[i];
    if (x.estimator != y.estimator || !close(x.snr_db, y.snr_db, tol) ||
        !close(x.rmse_deg, y.rmse_deg, tol) || !close(x.rmse_db, y.rmse_db, tol) ||
        !close(x.prob_resolution, y.prob_resolution, tol) ||
        !close(x.mean_mu_opt, y.mean_mu_opt, tol) || !close(x.crb_sqrt_deg, y.crb_sqrt_deg, tol)) {
      return false;
    }
  }
  return true;
}

}  // namespace kaidoa
