#pragma once

#include <Eigen/Dense>
#include <complex>

namespace kaidoa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double pi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / pi; }

/// Diagnostic conditions raised along the estimation chain. None of them
/// aborts a run; Monte Carlo trials carry them through to the aggregation.
enum class DoaFlag : unsigned {
  clamped_arcsin = 1u << 0,  ///< eigenvalue phase mapped outside [-1,1], clamped
  singular_ls = 1u << 1,     ///< rank-deficient LS system, tolerance pseudo-inverse
  rank_warning = 1u << 2,    ///< rank-deficient manifold
  sweep_fallback = 1u << 3,  ///< every sweep record degenerate, fell back to mu = 0
};

class DoaFlags {
 public:
  constexpr DoaFlags() = default;

  constexpr void set(DoaFlag f) { bits_ |= static_cast<unsigned>(f); }
  constexpr bool test(DoaFlag f) const { return (bits_ & static_cast<unsigned>(f)) != 0; }
  constexpr bool any() const { return bits_ != 0; }

  constexpr DoaFlags& operator|=(DoaFlags other) {
    bits_ |= other.bits_;
    return *this;
  }

  friend constexpr bool operator==(DoaFlags, DoaFlags) = default;

 private:
  unsigned bits_ = 0;
};

}  // namespace kaidoa
