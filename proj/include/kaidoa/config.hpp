#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaidoa/array_model.hpp"

namespace kaidoa {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EstimatorKind { esprit, iesprit, two_step_kai };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

enum class RmseScope { unknown_only, all_sources };

/// Everything a sweep needs: geometry, scenario (degrees), SNR grid, trial
/// count, seeding, estimator set and output naming.
struct ExperimentConfig {
  int num_sensors = 40;
  double spacing_wavelengths = 0.5;

  std::vector<double> doas_deg = {13.0, 15.0, 17.0, 19.0};
  std::vector<double> known_doas_deg = {17.0, 19.0};
  int num_snapshots = 10;
  double snr_db = 10.0;  ///< single-point SNR for synthesize/estimate

  double snr_start_db = -10.0;
  double snr_stop_db = 20.0;
  double snr_step_db = 2.5;
  int trials = 100;
  std::uint64_t base_seed = 1;
  double increment = 0.05;
  std::vector<EstimatorKind> estimators = {EstimatorKind::esprit, EstimatorKind::iesprit,
                                           EstimatorKind::two_step_kai};
  int threads = 0;  ///< 0 = hardware concurrency
  RmseScope rmse_scope = RmseScope::unknown_only;

  std::string output_directory = ".";
  std::string output_prefix = "sweep";

  ArrayGeometry geometry() const;
  /// Scenario with unit source powers and the given noise variance.
  SourceScenario scenario(double noise_variance) const;
  /// Indices of known_doas_deg inside doas_deg.
  std::vector<int> known_indices() const;
  std::vector<double> snr_grid() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Parses the flat key-value config format ([section], key = value with
/// numbers, quoted strings and arrays). Throws ConfigError on unreadable or
/// malformed input.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");

}  // namespace kaidoa
