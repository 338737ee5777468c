#include "kaidoa/array_model.hpp"

#include <cmath>
#include <stdexcept>

namespace kaidoa {

ArrayGeometry::ArrayGeometry(int num_sensors_, double spacing_, double wavelength_)
    : num_sensors(num_sensors_), spacing(spacing_), wavelength(wavelength_) {
  if (num_sensors < 2) {
    throw std::invalid_argument("ArrayGeometry: at least 2 sensors required");
  }
  if (!(wavelength > 0.0)) {
    throw std::invalid_argument("ArrayGeometry: wavelength must be positive");
  }
  if (!(spacing > 0.0) || spacing > wavelength / 2.0) {
    throw std::invalid_argument("ArrayGeometry: spacing must lie in (0, wavelength/2]");
  }
}

SourceScenario::SourceScenario(std::vector<double> doas_, std::vector<double> source_powers_,
                               double noise_variance_, int num_snapshots_,
                               std::vector<int> known_indices_)
    : doas(std::move(doas_)),
      source_powers(std::move(source_powers_)),
      noise_variance(noise_variance_),
      num_snapshots(num_snapshots_),
      known_indices(std::move(known_indices_)) {
  const int p = num_sources();
  if (p < 1) {
    throw std::invalid_argument("SourceScenario: at least one source required");
  }
  for (int i = 0; i < p; ++i) {
    if (!(std::abs(doas[i]) < pi / 2.0)) {
      throw std::invalid_argument("SourceScenario: DOAs must lie in (-pi/2, pi/2)");
    }
    if (i > 0 && !(doas[i] > doas[i - 1])) {
      throw std::invalid_argument("SourceScenario: DOAs must be strictly increasing");
    }
  }
  if (static_cast<int>(source_powers.size()) != p) {
    throw std::invalid_argument("SourceScenario: one power per source required");
  }
  for (double power : source_powers) {
    if (!(power >= 0.0)) {
      throw std::invalid_argument("SourceScenario: source powers must be non-negative");
    }
  }
  if (!(noise_variance >= 0.0)) {
    throw std::invalid_argument("SourceScenario: noise variance must be non-negative");
  }
  if (num_snapshots < 1) {
    throw std::invalid_argument("SourceScenario: at least one snapshot required");
  }
  if (static_cast<int>(known_indices.size()) >= p) {
    throw std::invalid_argument("SourceScenario: at least one DOA must be unknown");
  }
  for (std::size_t i = 0; i < known_indices.size(); ++i) {
    if (known_indices[i] < 0 || known_indices[i] >= p) {
      throw std::invalid_argument("SourceScenario: known index out of range");
    }
    if (i > 0 && known_indices[i] <= known_indices[i - 1]) {
      throw std::invalid_argument("SourceScenario: known indices must be sorted and unique");
    }
  }
}

std::vector<double> SourceScenario::known_doas() const {
  std::vector<double> out;
  out.reserve(known_indices.size());
  for (int idx : known_indices) {
    out.push_back(doas[idx]);
  }
  return out;
}

CovarianceEstimate::CovarianceEstimate(CMatrix matrix_, CovarianceKind kind_, double mu_)
    : matrix(std::move(matrix_)), kind(kind_), mu(mu_) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("CovarianceEstimate: square non-empty matrix required");
  }
  CMatrix sym = 0.5 * (matrix + matrix.adjoint());
  matrix = std::move(sym);
}

CVector steering_vector(const ArrayGeometry& geom, double theta) {
  if (!(std::abs(theta) < pi / 2.0)) {
    throw std::domain_error("steering_vector: angle outside (-pi/2, pi/2)");
  }
  const double phase_step = 2.0 * pi * geom.spacing_ratio() * std::sin(theta);
  CVector a(geom.num_sensors);
  for (int m = 0; m < geom.num_sensors; ++m) {
    a(m) = std::polar(1.0, phase_step * m);
  }
  return a;
}

CMatrix array_manifold(const ArrayGeometry& geom, std::span<const double> thetas,
                       DoaFlags* flags) {
  if (thetas.empty()) {
    throw std::invalid_argument("array_manifold: empty angle list");
  }
  CMatrix manifold(geom.num_sensors, static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t n = 0; n < thetas.size(); ++n) {
    manifold.col(static_cast<Eigen::Index>(n)) = steering_vector(geom, thetas[n]);
  }
  if (flags != nullptr) {
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      for (std::size_t j = i + 1; j < thetas.size(); ++j) {
        if (thetas[i] == thetas[j]) {
          flags->set(DoaFlag::rank_warning);
        }
      }
    }
  }
  return manifold;
}

namespace {

// uniform in [0, 1) from the top 53 bits of one engine draw
double canonical_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

CMatrix complex_gaussian(int rows, int cols, std::mt19937_64& rng) {
  CMatrix out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double u1 = 1.0 - canonical_unit(rng);  // (0, 1], keeps log finite
      const double u2 = canonical_unit(rng);
      const double radius = std::sqrt(-std::log(u1));
      out(i, j) = std::polar(radius, 2.0 * pi * u2);
    }
  }
  return out;
}

SnapshotBatch synthesize_snapshots(const SourceScenario& scenario, const ArrayGeometry& geom,
                                   std::uint64_t seed) {
  const int p = scenario.num_sources();
  const int n = scenario.num_snapshots;

  CMatrix manifold = array_manifold(geom, scenario.doas);

  std::mt19937_64 rng(seed);
  CMatrix sources = complex_gaussian(p, n, rng);
  for (int row = 0; row < p; ++row) {
    sources.row(row) *= std::sqrt(scenario.source_powers[row]);
  }
  CMatrix noise = std::sqrt(scenario.noise_variance) * complex_gaussian(geom.num_sensors, n, rng);

  SnapshotBatch batch{manifold * sources + noise, seed, geom, scenario};
  return batch;
}

CovarianceEstimate sample_covariance(const SnapshotBatch& batch) {
  const auto n = batch.data.cols();
  if (n < 1) {
    throw std::invalid_argument("sample_covariance: empty batch");
  }
  CMatrix r = (batch.data * batch.data.adjoint()) / static_cast<double>(n);
  return CovarianceEstimate(std::move(r), CovarianceKind::sample);
}

CovarianceEstimate true_covariance(const SourceScenario& scenario, const ArrayGeometry& geom) {
  CMatrix manifold = array_manifold(geom, scenario.doas);
  CVector powers = Eigen::Map<const RVector>(scenario.source_powers.data(),
                                             scenario.num_sources())
                       .cast<Complex>();
  CMatrix r = manifold * powers.asDiagonal() * manifold.adjoint();
  r += scenario.noise_variance * CMatrix::Identity(geom.num_sensors, geom.num_sensors);
  return CovarianceEstimate(std::move(r), CovarianceKind::sample);
}

}  // namespace kaidoa
