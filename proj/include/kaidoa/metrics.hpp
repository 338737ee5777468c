#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kaidoa/esprit.hpp"

namespace kaidoa {

/// Per-trial evaluation of one estimator.
struct TrialOutcome {
  std::vector<double> errors_deg;  ///< matched errors for the evaluated sources
  bool resolved = false;
  std::optional<double> mu_opt;
  DoaFlags flags;
  bool failed = false;  ///< estimator threw; counted as unresolved
};

/// Sorts truth and estimate, pairs them by position and returns truth minus
/// estimate (degrees) at the positions not listed in known_indices.
std::vector<double> match_errors(std::span<const double> truth_rad, const DoaEstimate& estimate,
                                 std::span<const int> known_indices);

/// sqrt of the mean squared error over all finite errors of all outcomes.
double rmse_deg(std::span<const TrialOutcome> outcomes);

/// True when every positionally matched error magnitude is below half the
/// minimum adjacent true separation.
bool resolved(std::span<const double> truth_rad, const DoaEstimate& estimate);

/// Deterministic CRB matrix for the DOAs (radians^2):
///   (sigma^2 / 2N) { Re[ (D^H Pi_A_perp D) .* P^T ] }^-1
/// with D the steering-vector derivatives and P the source covariance.
/// Throws when the Fisher information is singular (coinciding sources).
RMatrix crb_matrix(const ArrayGeometry& geom, std::span<const double> doas_rad,
                   const CMatrix& source_covariance, double noise_variance, int num_snapshots);

/// sqrt of the CRB diagonal averaged over the unknown sources, in degrees.
/// Noise variance is 10^(-snr_db/10) against the scenario's source powers.
double crb_sqrt_deg(const SourceScenario& scenario, const ArrayGeometry& geom, double snr_db);

}  // namespace kaidoa
