#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fracnd/model.hpp"

/// Stability regions described by pairs of 2x2 Hermitian matrices.
///
/// Each coordinate of a model owns a region in the complex plane, encoded by
/// a pair (P, Q). A point s belongs to the region when both quadratic forms
///   F_X(s) = [conj(s) 1] X [s; 1]
/// are non-negative. The regions collect instability candidates: a model is
/// certified only when its characteristic function has no zeros there.
/// Continuous coordinates of order nu use the closed sector
/// |arg(s)| <= pi*nu/2; discrete coordinates use the closed exterior of the
/// unit circle, |s| >= 1.

namespace fracnd {

enum class RegionKind { Sector, DiskExterior };

/// Descriptor matrices for one coordinate's region.
struct DescriptorPair {
  RegionKind kind = RegionKind::Sector;
  /// Fractional order behind a sector descriptor; unused for disk exteriors.
  double nu = 1.0;
  Eigen::Matrix2cd p;
  Eigen::Matrix2cd q;
};

/// Region of a whole model: one descriptor pair per coordinate.
struct RegionDescriptor {
  std::vector<DescriptorPair> pairs;
};

/// Default base tolerance of in_region. The per-coordinate threshold grows
/// with the squared magnitude of the tested value.
inline constexpr double kMembershipTol = 1e-10;

/// Sector descriptor for a continuous coordinate of order nu.
///
/// With s = sin(pi*nu/2) and c = cos(pi*nu/2):
///   P = [[0, s - jc], [s + jc, 0]],  Q = [[0, s + jc], [s - jc, 0]].
inline DescriptorPair continuous_pq(double nu) {
  if (!(nu > 0.0) || !(nu <= 1.0) || !std::isfinite(nu))
    throw std::invalid_argument("nu: must satisfy 0 < nu <= 1");
  const double s = std::sin(M_PI * nu / 2.0);
  const double c = std::cos(M_PI * nu / 2.0);
  DescriptorPair out;
  out.kind = RegionKind::Sector;
  out.nu = nu;
  out.p << Complex(0, 0), Complex(s, -c), Complex(s, c), Complex(0, 0);
  out.q << Complex(0, 0), Complex(s, c), Complex(s, -c), Complex(0, 0);
  return out;
}

/// Unit-circle-exterior descriptor for a discrete coordinate:
///   P = diag(1, -1),  Q = 0.
inline DescriptorPair discrete_pq() {
  DescriptorPair out;
  out.kind = RegionKind::DiskExterior;
  out.nu = 1.0;
  out.p << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  out.q.setZero();
  return out;
}

/// Region of a model: sectors for the r continuous coordinates, disk
/// exteriors for the rest.
inline RegionDescriptor region_for_model(const HybridRoesserModel& m) {
  RegionDescriptor d;
  d.pairs.reserve(m.dims.size());
  for (int i = 0; i < m.k(); ++i)
    d.pairs.push_back(i < m.r ? continuous_pq(m.nu) : discrete_pq());
  return d;
}

/// Quadratic form F_X(s) = [conj(s) 1] X [s; 1] of a Hermitian 2x2 matrix.
///
/// X must be Hermitian; the result is then real up to rounding. A residual
/// imaginary part is checked against 1e-12 (relative to the magnitudes
/// involved) before being discarded.
inline double f_quadratic(const Eigen::Matrix2cd& x, Complex s) {
  const double xmax = x.cwiseAbs().maxCoeff();
  const double htol = 1e-12 * (1.0 + xmax);
  if (std::abs(x(0, 1) - std::conj(x(1, 0))) > htol ||
      std::abs(x(0, 0).imag()) > htol || std::abs(x(1, 1).imag()) > htol)
    throw std::invalid_argument("descriptor matrix must be Hermitian");
  const Complex val = std::conj(s) * (x(0, 0) * s + x(0, 1)) +
                      (x(1, 0) * s + x(1, 1));
  const double scale = (1.0 + std::norm(s)) * (1.0 + xmax);
  if (std::abs(val.imag()) > 1e-12 * scale)
    throw std::invalid_argument(
        "quadratic form evaluated to a non-real value; descriptor is not "
        "Hermitian enough");
  return val.real();
}

/// Membership test with a closed-set convention: a point is inside when
/// both forms are >= -tol_i per coordinate, tol_i = tol * (1 + |rho_i|^2).
inline bool in_region(const RegionDescriptor& d, const ComplexPoint& rho,
                      double tol = kMembershipTol) {
  if (d.pairs.size() != rho.size())
    throw std::invalid_argument("rho: needs one value per coordinate");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol: must be >= 0");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double ti = tol * (1.0 + std::norm(rho[i]));
    if (f_quadratic(d.pairs[i].p, rho[i]) < -ti) return false;
    if (f_quadratic(d.pairs[i].q, rho[i]) < -ti) return false;
  }
  return true;
}

}  // namespace fracnd
