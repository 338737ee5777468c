#include "kaidoa/esprit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kaidoa {

namespace {

constexpr double kPinvRelTol = 1e-12;

}  // namespace

SubspaceDecomposition decompose(const CovarianceEstimate& cov, int num_sources) {
  const int m = static_cast<int>(cov.matrix.rows());
  if (num_sources < 1 || num_sources >= m) {
    throw std::invalid_argument("decompose: need 1 <= num_sources < matrix size");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(cov.matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("decompose: eigendecomposition failed");
  }

  // Eigen returns ascending order; reverse for the descending convention.
  SubspaceDecomposition out;
  out.signal_basis.resize(m, num_sources);
  out.noise_basis.resize(m, m - num_sources);
  out.signal_eigenvalues.resize(num_sources);
  out.noise_eigenvalues.resize(m - num_sources);
  for (int k = 0; k < m; ++k) {
    const int src = m - 1 - k;  // descending position k
    if (k < num_sources) {
      out.signal_basis.col(k) = solver.eigenvectors().col(src);
      out.signal_eigenvalues(k) = solver.eigenvalues()(src);
    } else {
      out.noise_basis.col(k - num_sources) = solver.eigenvectors().col(src);
      out.noise_eigenvalues(k - num_sources) = solver.eigenvalues()(src);
    }
  }
  return out;
}

SelectionPair SelectionPair::max_overlap(int num_sensors) {
  if (num_sensors < 2) {
    throw std::invalid_argument("SelectionPair: at least 2 sensors required");
  }
  const int s = num_sensors - 1;
  SelectionPair pair;
  pair.first = RMatrix::Zero(s, num_sensors);
  pair.second = RMatrix::Zero(s, num_sensors);
  for (int row = 0; row < s; ++row) {
    pair.first(row, row) = 1.0;
    pair.second(row, row + 1) = 1.0;
  }
  return pair;
}

CMatrix shift_invariance_solve(const CMatrix& signal_basis, const SelectionPair& selection,
                               DoaFlags* flags) {
  const CMatrix upper = selection.first * signal_basis;
  const CMatrix lower = selection.second * signal_basis;
  if (upper.rows() < upper.cols()) {
    throw std::invalid_argument("shift_invariance_solve: underdetermined system");
  }

  Eigen::JacobiSVD<CMatrix> svd(upper, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kPinvRelTol);
  const auto& sigma = svd.singularValues();
  if (sigma(0) <= 0.0 || sigma(sigma.size() - 1) < kPinvRelTol * sigma(0)) {
    if (flags != nullptr) {
      flags->set(DoaFlag::singular_ls);
    }
  }
  return svd.solve(lower);
}

DoaEstimate angles_from_operator(const CMatrix& psi, const ArrayGeometry& geom) {
  if (psi.rows() == 0 || psi.rows() != psi.cols()) {
    throw std::invalid_argument("angles_from_operator: square operator required");
  }
  Eigen::ComplexEigenSolver<CMatrix> solver(psi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("angles_from_operator: eigendecomposition failed");
  }

  DoaEstimate est;
  const double phase_to_sine = 1.0 / (2.0 * pi * geom.spacing_ratio());
  est.angles.reserve(psi.rows());
  for (Eigen::Index k = 0; k < psi.rows(); ++k) {
    const double spatial_frequency = std::arg(solver.eigenvalues()(k));
    double sine = spatial_frequency * phase_to_sine;
    if (sine > 1.0) {
      sine = 1.0;
      est.flags.set(DoaFlag::clamped_arcsin);
    } else if (sine < -1.0) {
      sine = -1.0;
      est.flags.set(DoaFlag::clamped_arcsin);
    }
    est.angles.push_back(std::asin(sine));
  }
  std::sort(est.angles.begin(), est.angles.end());
  est.attribution.assign(est.angles.size(), Attribution::estimated);
  return est;
}

DoaEstimate esprit(const CovarianceEstimate& cov, int num_sources, const ArrayGeometry& geom) {
  SubspaceDecomposition subspace = decompose(cov, num_sources);
  SelectionPair selection = SelectionPair::max_overlap(geom.num_sensors);
  DoaFlags flags;
  CMatrix psi = shift_invariance_solve(subspace.signal_basis, selection, &flags);
  DoaEstimate est = angles_from_operator(psi, geom);
  est.flags |= flags;
  return est;
}

}  // namespace kaidoa
