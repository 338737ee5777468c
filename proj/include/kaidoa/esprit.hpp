#pragma once

#include <optional>
#include <vector>

#include "kaidoa/array_model.hpp"
#include "kaidoa/types.hpp"

namespace kaidoa {

/// Orthonormal signal/noise split of a covariance matrix, eigenvalues sorted
/// descending.
struct SubspaceDecomposition {
  CMatrix signal_basis;        ///< M x P
  CMatrix noise_basis;         ///< M x (M-P)
  RVector signal_eigenvalues;  ///< P largest, descending
  RVector noise_eigenvalues;   ///< M-P smallest, descending
};

/// 0/1 row-selection matrices for the two maximally overlapping subarrays
/// (first picks sensors 0..M-2, second picks 1..M-1).
struct SelectionPair {
  RMatrix first;
  RMatrix second;

  static SelectionPair max_overlap(int num_sensors);
};

enum class Attribution { known, estimated };

/// Estimator output: sorted angles with per-angle attribution, the selected
/// reliability factor when a sweep produced the estimate, and diagnostics.
struct DoaEstimate {
  std::vector<double> angles;  ///< radians, ascending
  std::vector<Attribution> attribution;
  std::optional<double> mu_opt;
  DoaFlags flags;
};

/// Hermitian EVD of a covariance estimate split at num_sources.
SubspaceDecomposition decompose(const CovarianceEstimate& cov, int num_sources);

/// LS solution of J1 Us Psi ~= J2 Us via a rank-revealing pseudo-inverse
/// (relative tolerance 1e-12). Sets singular_ls when J1 Us is numerically
/// rank deficient.
CMatrix shift_invariance_solve(const CMatrix& signal_basis, const SelectionPair& selection,
                               DoaFlags* flags = nullptr);

/// Maps the eigenvalue phases of the shift-invariance operator through arcsin
/// to sorted angles. Arguments outside [-1,1] are clamped and flagged.
DoaEstimate angles_from_operator(const CMatrix& psi, const ArrayGeometry& geom);

/// Standard ESPRIT chain: decompose -> shift-invariance LS -> angles.
DoaEstimate esprit(const CovarianceEstimate& cov, int num_sources, const ArrayGeometry& geom);

}  // namespace kaidoa
