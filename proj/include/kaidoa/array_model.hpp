#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kaidoa/types.hpp"

namespace kaidoa {

/// Uniform linear array: num_sensors elements on a line, adjacent spacing
/// `spacing` (same unit as `wavelength`, canonically wavelength/2).
struct ArrayGeometry {
  int num_sensors;
  double spacing;
  double wavelength;

  ArrayGeometry(int num_sensors, double spacing, double wavelength);

  double spacing_ratio() const { return spacing / wavelength; }
};

/// Far-field source configuration: strictly increasing DOAs in (-pi/2, pi/2),
/// per-source powers, white-noise variance, snapshot count and the indices of
/// the a-priori known DOAs.
struct SourceScenario {
  std::vector<double> doas;  ///< radians, strictly increasing
  std::vector<double> source_powers;
  double noise_variance;
  int num_snapshots;
  std::vector<int> known_indices;  ///< sorted unique indices into doas, fewer than num_sources

  SourceScenario(std::vector<double> doas, std::vector<double> source_powers,
                 double noise_variance, int num_snapshots,
                 std::vector<int> known_indices = {});

  int num_sources() const { return static_cast<int>(doas.size()); }
  int num_known() const { return static_cast<int>(known_indices.size()); }
  std::vector<double> known_doas() const;
};

/// One synthesized observation block: M x N sensor outputs plus the seed and
/// scenario that generated them.
struct SnapshotBatch {
  CMatrix data;
  std::uint64_t seed;
  ArrayGeometry geometry;
  SourceScenario scenario;
};

enum class CovarianceKind { sample, modified };

/// Hermitian covariance matrix tagged with its origin. The constructor
/// symmetrizes, which is a bitwise no-op on an already Hermitian input.
struct CovarianceEstimate {
  CMatrix matrix;
  CovarianceKind kind;
  double mu;  ///< scaling factor, meaningful for modified covariances

  CovarianceEstimate(CMatrix matrix, CovarianceKind kind, double mu = 0.0);
};

/// Array response to a unit plane wave from angle theta (radians). Element m
/// is exp(j 2 pi m (d/lambda) sin theta). Throws std::domain_error outside
/// (-pi/2, pi/2).
CVector steering_vector(const ArrayGeometry& geom, double theta);

/// One steering-vector column per angle. Duplicate angles set rank_warning on
/// `flags` when provided; the matrix is built regardless.
CMatrix array_manifold(const ArrayGeometry& geom, std::span<const double> thetas,
                       DoaFlags* flags = nullptr);

/// Unit-variance circular complex Gaussian draws (real and imaginary parts
/// are independent N(0, 1/2)). Box-Muller over the raw engine output, so the
/// stream depends only on the engine state, not on the standard library's
/// distribution internals.
CMatrix complex_gaussian(int rows, int cols, std::mt19937_64& rng);

/// x(i) = A s(i) + n(i) with i.i.d. circular Gaussian sources and noise.
/// Pure function of (scenario, geom, seed).
SnapshotBatch synthesize_snapshots(const SourceScenario& scenario, const ArrayGeometry& geom,
                                   std::uint64_t seed);

/// (1/N) sum_i x(i) x(i)^H, tagged CovarianceKind::sample.
CovarianceEstimate sample_covariance(const SnapshotBatch& batch);

/// Exact model covariance A Rss A^H + sigma^2 I, for oracles and references.
CovarianceEstimate true_covariance(const SourceScenario& scenario, const ArrayGeometry& geom);

}  // namespace kaidoa
