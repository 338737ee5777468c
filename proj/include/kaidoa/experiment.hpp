#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "kaidoa/config.hpp"
#include "kaidoa/metrics.hpp"

namespace kaidoa {

struct ResultRow {
  double snr_db = 0.0;
  EstimatorKind estimator = EstimatorKind::esprit;
  double rmse_deg = 0.0;
  double rmse_db = 0.0;
  double prob_resolution = 0.0;
  double mean_mu_opt = 0.0;  ///< NaN for estimators without a sweep
  double crb_sqrt_deg = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

/// Runs one estimator on a batch and evaluates it against the scenario truth.
/// Exceptions are captured into a failed, unresolved outcome.
TrialOutcome run_trial_estimator(EstimatorKind kind, const SnapshotBatch& batch,
                                 const ArrayGeometry& geom, std::span<const int> rmse_indices,
                                 double increment);

/// Full Monte Carlo sweep over the SNR grid. Every estimator at a given
/// (snr, trial) consumes the identical snapshot batch, seeded base_seed+trial;
/// trials run on a worker pool and aggregate in trial order, so serial and
/// parallel execution emit identical tables. Failure counts go to `log` when
/// given.
ResultTable run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// CSV with the fixed header
/// snr_db,estimator,rmse_deg,rmse_db,prob_resolution,mean_mu_opt,crb_sqrt_deg
/// and 6-decimal fixed formatting, LF line endings.
void emit_csv(const ResultTable& table, const std::filesystem::path& path);
std::string csv_string(const ResultTable& table);
ResultTable parse_csv(const std::filesystem::path& path);

bool tables_equal(const ResultTable& a, const ResultTable& b, double tol = 0.0);

}  // namespace kaidoa
