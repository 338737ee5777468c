#include "kaidoa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kaidoa/kai_refine.hpp"

namespace kaidoa {

std::vector<double> match_errors(std::span<const double> truth_rad, const DoaEstimate& estimate,
                                 std::span<const int> known_indices) {
  if (truth_rad.size() != estimate.angles.size()) {
    throw std::invalid_argument("match_errors: truth and estimate counts differ");
  }
  std::vector<double> truth(truth_rad.begin(), truth_rad.end());
  std::vector<double> angles = estimate.angles;
  std::sort(truth.begin(), truth.end());
  std::sort(angles.begin(), angles.end());

  std::vector<double> errors;
  errors.reserve(truth.size() - known_indices.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool known = std::find(known_indices.begin(), known_indices.end(),
                                 static_cast<int>(i)) != known_indices.end();
    if (!known) {
      errors.push_back(rad2deg(truth[i] - angles[i]));
    }
  }
  return errors;
}

double rmse_deg(std::span<const TrialOutcome> outcomes) {
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (const TrialOutcome& outcome : outcomes) {
    for (double error : outcome.errors_deg) {
      if (std::isfinite(error)) {
        sum_sq += error * error;
        ++count;
      }
    }
  }
  if (count == 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::sqrt(sum_sq / static_cast<double>(count));
}

bool resolved(std::span<const double> truth_rad, const DoaEstimate& estimate) {
  if (truth_rad.size() < 2) {
    throw std::invalid_argument("resolved: at least two sources required");
  }
  if (truth_rad.size() != estimate.angles.size()) {
    throw std::invalid_argument("resolved: truth and estimate counts differ");
  }
  std::vector<double> truth(truth_rad.begin(), truth_rad.end());
  std::vector<double> angles = estimate.angles;
  std::sort(truth.begin(), truth.end());
  std::sort(angles.begin(), angles.end());

  double min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < truth.size(); ++i) {
    min_separation = std::min(min_separation, truth[i] - truth[i - 1]);
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!(std::abs(truth[i] - angles[i]) < min_separation / 2.0)) {
      return false;
    }
  }
  return true;
}

RMatrix crb_matrix(const ArrayGeometry& geom, std::span<const double> doas_rad,
                   const CMatrix& source_covariance, double noise_variance, int num_snapshots) {
  const int p = static_cast<int>(doas_rad.size());
  if (p == 0 || source_covariance.rows() != p || source_covariance.cols() != p) {
    throw std::invalid_argument("crb_matrix: source covariance must be P x P");
  }
  if (num_snapshots < 1 || !(noise_variance >= 0.0)) {
    throw std::invalid_argument("crb_matrix: invalid noise variance or snapshot count");
  }

  const CMatrix manifold = array_manifold(geom, doas_rad);
  CMatrix derivatives(geom.num_sensors, p);
  for (int n = 0; n < p; ++n) {
    const double rate = 2.0 * pi * geom.spacing_ratio() * std::cos(doas_rad[n]);
    for (int m = 0; m < geom.num_sensors; ++m) {
      derivatives(m, n) = Complex(0.0, rate * m) * manifold(m, n);
    }
  }

  const ProjectionPair pair = projections(manifold);
  const CMatrix cross = derivatives.adjoint() * pair.noise * derivatives;
  const RMatrix fisher_core = cross.cwiseProduct(source_covariance.transpose()).real();

  Eigen::FullPivLU<RMatrix> lu(fisher_core);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw std::runtime_error("crb_matrix: singular Fisher information (coinciding sources)");
  }
  return (noise_variance / (2.0 * num_snapshots)) * lu.inverse();
}

double crb_sqrt_deg(const SourceScenario& scenario, const ArrayGeometry& geom, double snr_db) {
  const double noise_variance = std::pow(10.0, -snr_db / 10.0);
  CMatrix source_covariance = CMatrix::Zero(scenario.num_sources(), scenario.num_sources());
  for (int i = 0; i < scenario.num_sources(); ++i) {
    source_covariance(i, i) = scenario.source_powers[i];
  }
  const RMatrix crb =
      crb_matrix(geom, scenario.doas, source_covariance, noise_variance, scenario.num_snapshots);

  double variance_sum = 0.0;
  int count = 0;
  for (int i = 0; i < scenario.num_sources(); ++i) {
    const bool known = std::find(scenario.known_indices.begin(), scenario.known_indices.end(),
                                 i) != scenario.known_indices.end();
    if (!known) {
      variance_sum += crb(i, i);
      ++count;
    }
  }
  return rad2deg(std::sqrt(variance_sum / count));
}

}  // namespace kaidoa
