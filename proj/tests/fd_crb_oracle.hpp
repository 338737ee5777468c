#pragma once

// Finite-difference Fisher-information oracle for the deterministic CRB.
//
// The conditional observation model is x(i) ~ CN(A(theta) s(i), sigma^2 I)
// with deterministic amplitudes. For a complex Gaussian mean model the Fisher
// information over the real parameter vector alpha = [theta, Re s, Im s] is
//   FIM = (2/sigma^2) Re(J^H J),   J = d mu / d alpha,
// where mu stacks all N snapshot means. The theta-block of FIM^{-1} is the
// CRB, which the closed form in crb_matrix must reproduce once the amplitude
// sample covariance is plugged in as the source covariance.

#include <Eigen/Dense>
#include <vector>

#include "kaidoa/array_model.hpp"

namespace kaidoa::testing {

inline CVector stacked_mean(const ArrayGeometry& geom, const std::vector<double>& thetas,
                            const CMatrix& amplitudes) {
  const CMatrix manifold = array_manifold(geom, thetas);
  const CMatrix mean = manifold * amplitudes;
  CVector stacked(mean.size());
  for (Eigen::Index col = 0; col < mean.cols(); ++col) {
    stacked.segment(col * mean.rows(), mean.rows()) = mean.col(col);
  }
  return stacked;
}

/// CRB matrix for the DOAs (radians^2) obtained purely by finite differences
/// of the stacked mean, full Fisher matrix inversion and a read-off of the
/// theta block. `amplitudes` is the fixed P x N amplitude matrix.
inline RMatrix fd_crb_matrix(const ArrayGeometry& geom, const std::vector<double>& thetas,
                             const CMatrix& amplitudes, double noise_variance,
                             double step = 1e-6) {
  const int num_sources = static_cast<int>(thetas.size());
  const int num_snapshots = static_cast<int>(amplitudes.cols());
  const int num_params = num_sources + 2 * num_sources * num_snapshots;
  const Eigen::Index mean_size =
      static_cast<Eigen::Index>(geom.num_sensors) * num_snapshots;

  CMatrix jacobian(mean_size, num_params);
  const auto mean_at = [&](const std::vector<double>& t, const CMatrix& s) {
    return stacked_mean(geom, t, s);
  };

  int param = 0;
  for (int n = 0; n < num_sources; ++n, ++param) {
    std::vector<double> plus = thetas;
    std::vector<double> minus = thetas;
    plus[n] += step;
    minus[n] -= step;
    jacobian.col(param) = (mean_at(plus, amplitudes) - mean_at(minus, amplitudes)) / (2.0 * step);
  }
  for (int i = 0; i < num_snapshots; ++i) {
    for (int p = 0; p < num_sources; ++p) {
      for (int part = 0; part < 2; ++part, ++param) {
        CMatrix plus = amplitudes;
        CMatrix minus = amplitudes;
        const Complex delta = part == 0 ? Complex(step, 0.0) : Complex(0.0, step);
        plus(p, i) += delta;
        minus(p, i) -= delta;
        jacobian.col(param) = (mean_at(thetas, plus) - mean_at(thetas, minus)) / (2.0 * step);
      }
    }
  }

  const RMatrix fisher = (2.0 / noise_variance) * (jacobian.adjoint() * jacobian).real();
  const RMatrix inverse = fisher.inverse();
  return inverse.topLeftCorner(num_sources, num_sources);
}

}  // namespace kaidoa::testing
