#pragma once

#include <span>
#include <vector>

#include "kaidoa/esprit.hpp"

namespace kaidoa {

/// Signal-subspace projector and its complement, built from a manifold
/// estimate. signal + noise = I, both idempotent and Hermitian.
struct ProjectionPair {
  CMatrix signal;  ///< Qa
  CMatrix noise;   ///< I - Qa
};

/// One point of the reliability-factor sweep. Degenerate records keep an
/// objective of +infinity so the argmin skips them.
struct MuSweepRecord {
  double mu = 0.0;
  double objective = 0.0;
  DoaEstimate doa_candidate;  ///< known DOAs verbatim plus estimates, sorted
  bool degenerate = false;
};

struct KaiResult {
  DoaEstimate final;  ///< candidate at the objective-minimizing mu, mu_opt set
  std::vector<MuSweepRecord> sweep;
  DoaEstimate first_step;
};

/// LS source amplitudes: S = pinv(A) X, i.e. s(i) = (A^H A)^-1 A^H x(i) for a
/// full-rank manifold. Rank deficiency switches to a tolerance pseudo-inverse
/// and sets rank_warning.
CMatrix ls_amplitudes(const CMatrix& manifold, const CMatrix& data, DoaFlags* flags = nullptr);

/// n(i) = x(i) - A s(i); columns are orthogonal to the manifold range.
CMatrix noise_residual(const CMatrix& data, const CMatrix& manifold, const CMatrix& amplitudes);

/// Qa = A (A^H A)^-1 A^H (pseudo-inverse when rank deficient) and I - Qa.
ProjectionPair projections(const CMatrix& manifold);

/// Signal-noise cross term V = Qa R Qa_perp, identical to the direct
/// A (1/N) sum s(i) n(i)^H form.
CMatrix perturbation_term(const ProjectionPair& pair, const CMatrix& covariance);

/// R - mu (V + V^H), tagged CovarianceKind::modified. mu = 0 returns the
/// input matrix bitwise.
CovarianceEstimate modified_covariance(const CovarianceEstimate& cov, const CMatrix& perturbation,
                                       double mu);

/// Stochastic ML objective
///   U = ln det(Qa R Qa + trace(Qa_perp R)/(M-P) Qa_perp)
/// evaluated through Hermitian eigenvalues with a relative floor of 1e-12.
/// Returns +infinity when every eigenvalue sits below the floor.
double sml_objective(const ProjectionPair& pair, const CMatrix& sample_covariance, int num_sensors,
                     int num_sources);

/// Two-step knowledge-aided estimator. First step: sample covariance and
/// standard ESPRIT. Second step: perturbation term from the first-step
/// manifold, then for each mu in {0, increment, ...} <= 1 a modified
/// covariance, a fresh ESPRIT pass, known-DOA substitution in the manifold,
/// and the SML objective; the output merges the known DOAs with the estimates
/// at the objective-minimizing mu. Ties pick the smallest mu; an all-degenerate
/// sweep falls back to mu = 0 with sweep_fallback set.
KaiResult two_step_kai(const SnapshotBatch& batch, const ArrayGeometry& geom, int num_sources,
                       std::span<const double> known_doas, double increment);

/// Same pipeline with no prior knowledge: the second-step manifold is built
/// solely from the second-step estimates.
KaiResult iesprit(const SnapshotBatch& batch, const ArrayGeometry& geom, int num_sources,
                  double increment);

}  // namespace kaidoa
