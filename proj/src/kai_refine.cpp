#include "kaidoa/kai_refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace kaidoa {

namespace {

constexpr double kPinvRelTol = 1e-12;
constexpr double kEigFloorRel = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Greedy association of each known DOA (ascending) with its nearest still
// unmatched estimate. Ties keep the smallest estimate index.
struct Association {
  std::vector<int> matched;  // per known DOA: slot in the estimate list
  std::vector<int> unknown;  // remaining slots, ascending
};

Association associate_known(const std::vector<double>& known,
                            const std::vector<double>& estimates) {
  const int p = static_cast<int>(estimates.size());
  Association assoc;
  std::vector<bool> taken(p, false);
  for (double angle : known) {
    int best = -1;
    double best_distance = kInf;
    for (int i = 0; i < p; ++i) {
      if (taken[i]) {
        continue;
      }
      const double distance = std::abs(estimates[i] - angle);
      if (distance < best_distance) {
        best_distance = distance;
        best = i;
      }
    }
    taken[best] = true;
    assoc.matched.push_back(best);
  }
  for (int i = 0; i < p; ++i) {
    if (!taken[i]) {
      assoc.unknown.push_back(i);
    }
  }
  return assoc;
}

// Known DOAs verbatim plus the unmatched estimates, sorted with attribution
// kept aligned (stable sort leaves knowns first on exact ties).
DoaEstimate merge_known(const std::vector<double>& known, const DoaEstimate& second_step,
                        const Association& assoc) {
  std::vector<std::pair<double, Attribution>> items;
  items.reserve(second_step.angles.size());
  for (double angle : known) {
    items.emplace_back(angle, Attribution::known);
  }
  for (int slot : assoc.unknown) {
    items.emplace_back(second_step.angles[slot], Attribution::estimated);
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  DoaEstimate merged;
  merged.flags = second_step.flags;
  for (const auto& [angle, attribution] : items) {
    merged.angles.push_back(angle);
    merged.attribution.push_back(attribution);
  }
  return merged;
}

bool has_exact_duplicate(const std::vector<double>& sorted_angles) {
  for (std::size_t i = 1; i < sorted_angles.size(); ++i) {
    if (sorted_angles[i] == sorted_angles[i - 1]) {
      return true;
    }
  }
  return false;
}

}  // namespace

CMatrix ls_amplitudes(const CMatrix& manifold, const CMatrix& data, DoaFlags* flags) {
  if (manifold.rows() != data.rows()) {
    throw std::invalid_argument("ls_amplitudes: row mismatch between manifold and data");
  }
  Eigen::JacobiSVD<CMatrix> svd(manifold, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kPinvRelTol);
  if (svd.rank() < manifold.cols() && flags != nullptr) {
    flags->set(DoaFlag::rank_warning);
  }
  return svd.solve(data);
}

CMatrix noise_residual(const CMatrix& data, const CMatrix& manifold, const CMatrix& amplitudes) {
  if (manifold.cols() != amplitudes.rows() || manifold.rows() != data.rows() ||
      amplitudes.cols() != data.cols()) {
    throw std::invalid_argument("noise_residual: shape mismatch");
  }
  return data - manifold * amplitudes;
}

ProjectionPair projections(const CMatrix& manifold) {
  if (manifold.rows() == 0 || manifold.cols() == 0) {
    throw std::invalid_argument("projections: empty manifold");
  }
  Eigen::JacobiSVD<CMatrix> svd(manifold, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double tol = kPinvRelTol * sigma(0);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > tol) {
    ++rank;
  }

  const Eigen::Index m = manifold.rows();
  ProjectionPair pair;
  if (rank == 0) {
    pair.signal = CMatrix::Zero(m, m);
  } else {
    const CMatrix basis = svd.matrixU().leftCols(rank);
    CMatrix qa = basis * basis.adjoint();
    pair.signal = 0.5 * (qa + qa.adjoint());
  }
  pair.noise = CMatrix::Identity(m, m) - pair.signal;
  return pair;
}

CMatrix perturbation_term(const ProjectionPair& pair, const CMatrix& covariance) {
  if (pair.signal.rows() != covariance.rows() || covariance.rows() != covariance.cols()) {
    throw std::invalid_argument("perturbation_term: shape mismatch");
  }
  return pair.signal * covariance * pair.noise;
}

CovarianceEstimate modified_covariance(const CovarianceEstimate& cov, const CMatrix& perturbation,
                                       double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("modified_covariance: mu must lie in [0, 1]");
  }
  if (mu == 0.0) {
    return CovarianceEstimate(cov.matrix, CovarianceKind::modified, 0.0);
  }
  if (perturbation.rows() != cov.matrix.rows() || perturbation.cols() != cov.matrix.cols()) {
    throw std::invalid_argument("modified_covariance: shape mismatch");
  }
  CMatrix modified = cov.matrix - mu * (perturbation + perturbation.adjoint()).eval();
  return CovarianceEstimate(std::move(modified), CovarianceKind::modified, mu);
}

double sml_objective(const ProjectionPair& pair, const CMatrix& sample_covariance, int num_sensors,
                     int num_sources) {
  if (num_sensors <= num_sources) {
    throw std::invalid_argument("sml_objective: need num_sensors > num_sources");
  }
  if (pair.signal.rows() != num_sensors || sample_covariance.rows() != num_sensors ||
      sample_covariance.cols() != num_sensors) {
    throw std::invalid_argument("sml_objective: shape mismatch");
  }

  const double noise_level =
      (pair.noise * sample_covariance).trace().real() / (num_sensors - num_sources);
  CMatrix argument = pair.signal * sample_covariance * pair.signal + noise_level * pair.noise;
  argument = 0.5 * (argument + argument.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(argument, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sml_objective: eigendecomposition failed");
  }
  const RVector& eigenvalues = solver.eigenvalues();
  const double largest = eigenvalues(eigenvalues.size() - 1);
  if (!(largest > 0.0)) {
    return kInf;  // all eigenvalues below any positive floor
  }
  const double floor = kEigFloorRel * largest;
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    log_det += std::log(std::max(eigenvalues(k), floor));
  }
  return log_det;
}

namespace {

MuSweepRecord evaluate_sweep_point(const CovarianceEstimate& sample, const CMatrix& perturbation,
                                   double mu, const std::vector<double>& known, int num_sources,
                                   const ArrayGeometry& geom, const DoaEstimate& first_step) {
  MuSweepRecord record;
  record.mu = mu;
  record.objective = kInf;
  record.degenerate = true;
  record.doa_candidate = merge_known(known, first_step, associate_known(known, first_step.angles));

  try {
    const CovarianceEstimate modified = modified_covariance(sample, perturbation, mu);
    const DoaEstimate second = esprit(modified, num_sources, geom);
    const Association assoc = associate_known(known, second.angles);
    record.doa_candidate = merge_known(known, second, assoc);

    // Manifold with known steering vectors substituted into the matched slots.
    std::vector<double> manifold_angles = second.angles;
    for (std::size_t i = 0; i < known.size(); ++i) {
      manifold_angles[assoc.matched[i]] = known[i];
    }
    DoaFlags manifold_flags;
    const CMatrix manifold = array_manifold(geom, manifold_angles, &manifold_flags);
    const ProjectionPair pair = projections(manifold);
    const double objective =
        sml_objective(pair, sample.matrix, geom.num_sensors, num_sources);
    record.doa_candidate.flags |= manifold_flags;

    record.degenerate = second.flags.test(DoaFlag::singular_ls) ||
                        (second.flags.test(DoaFlag::clamped_arcsin) &&
                         has_exact_duplicate(second.angles)) ||
                        std::isinf(objective);
    record.objective = record.degenerate ? kInf : objective;
  } catch (const std::exception&) {
    // Keep the degenerate record; clamped estimates at +-pi/2 land here when
    // their steering vectors cannot be formed.
  }
  return record;
}

}  // namespace

KaiResult two_step_kai(const SnapshotBatch& batch, const ArrayGeometry& geom, int num_sources,
                       std::span<const double> known_doas, double increment) {
  if (static_cast<int>(known_doas.size()) >= num_sources) {
    throw std::invalid_argument("two_step_kai: fewer known DOAs than sources required");
  }
  if (!(increment > 0.0 && increment <= 1.0)) {
    throw std::invalid_argument("two_step_kai: increment must lie in (0, 1]");
  }

  std::vector<double> known(known_doas.begin(), known_doas.end());
  std::sort(known.begin(), known.end());

  const CovarianceEstimate sample = sample_covariance(batch);

  KaiResult result;
  result.first_step = esprit(sample, num_sources, geom);

  const CMatrix first_manifold = array_manifold(geom, result.first_step.angles);
  const ProjectionPair first_pair = projections(first_manifold);
  const CMatrix perturbation = perturbation_term(first_pair, sample.matrix);

  const int steps = static_cast<int>(std::floor(1.0 / increment + 1e-9));
  result.sweep.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double mu = std::min(k * increment, 1.0);
    result.sweep.push_back(evaluate_sweep_point(sample, perturbation, mu, known, num_sources, geom,
                                                result.first_step));
  }

  int best = -1;
  for (std::size_t i = 0; i < result.sweep.size(); ++i) {
    if (result.sweep[i].degenerate) {
      continue;
    }
    if (best < 0 || result.sweep[i].objective < result.sweep[best].objective) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    result.final = result.sweep.front().doa_candidate;
    result.final.flags.set(DoaFlag::sweep_fallback);
    result.final.mu_opt = result.sweep.front().mu;
  } else {
    result.final = result.sweep[best].doa_candidate;
    result.final.mu_opt = result.sweep[best].mu;
  }
  return result;
}

KaiResult iesprit(const SnapshotBatch& batch, const ArrayGeometry& geom, int num_sources,
                  double increment) {
  return two_step_kai(batch, geom, num_sources, {}, increment);
}

}  // namespace kaidoa
