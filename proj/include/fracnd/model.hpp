#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

/// Hybrid continuous/discrete multidimensional state-space models.
///
/// A model carries k independent coordinates. The first r coordinates evolve
/// continuously with a fractional derivative of order nu; the remaining k - r
/// coordinates advance by unit shifts. The state is split into blocks of
/// sizes dims[0..k-1] and the square system matrix A acts on the stacked
/// state of size n = sum(dims).

namespace fracnd {

using Complex = std::complex<double>;

/// One point of the k-dimensional frequency domain, one complex value per
/// coordinate of the model.
using ComplexPoint = std::vector<Complex>;

/// Thrown by transfer_eval when H(rho) - A is numerically singular at the
/// requested point.
class SingularAtPoint : public std::runtime_error {
 public:
  explicit SingularAtPoint(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an operation needs input/output matrices (B, C, D) that the
/// model does not carry.
class MissingMatrices : public std::invalid_argument {
 public:
  explicit MissingMatrices(const std::string& what) : std::invalid_argument(what) {}
};

struct HybridRoesserModel {
  /// Fractional order of the continuous coordinates, 0 < nu <= 1.
  double nu = 1.0;
  /// State block sizes, one entry per coordinate, each >= 1.
  std::vector<int> dims;
  /// Number of leading continuous coordinates, 0 <= r <= dims.size().
  int r = 0;
  /// System matrix, n x n with n = sum(dims). The coordinate partition is
  /// implied by dims; no separate block storage is kept.
  Eigen::MatrixXd a;
  /// Optional input/output maps for transfer-function evaluation.
  std::optional<Eigen::MatrixXd> b;
  std::optional<Eigen::MatrixXd> c;
  std::optional<Eigen::MatrixXd> d;

  /// Total state dimension.
  int n() const { return std::accumulate(dims.begin(), dims.end(), 0); }

  /// Number of coordinates.
  int k() const { return static_cast<int>(dims.size()); }

  /// Offset of block i inside the stacked state.
  int block_offset(int i) const {
    if (i < 0 || i > k()) throw std::out_of_range("block index out of range");
    return std::accumulate(dims.begin(), dims.begin() + i, 0);
  }

  /// View of the (i, j) block of A under the coordinate partition.
  Eigen::Block<const Eigen::MatrixXd> block(int i, int j) const {
    if (i < 0 || i >= k() || j < 0 || j >= k())
      throw std::out_of_range("block index out of range");
    return a.block(block_offset(i), block_offset(j), dims[i], dims[j]);
  }
};

/// Largest absolute row sum of a real matrix (the induced infinity norm).
/// Used as the scale reference for margins and falsification thresholds.
inline double max_row_sum(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Checks structural consistency. Throws std::invalid_argument naming the
/// offending field; returns normally when the model is well formed.
inline void validate_model(const HybridRoesserModel& m) {
  if (!(m.nu > 0.0) || !(m.nu <= 1.0) || !std::isfinite(m.nu))
    throw std::invalid_argument("nu: must satisfy 0 < nu <= 1");
  if (m.dims.empty()) throw std::invalid_argument("dims: must be non-empty");
  for (std::size_t i = 0; i < m.dims.size(); ++i) {
    if (m.dims[i] < 1) {
      std::ostringstream os;
      os << "dims[" << i << "]: must be >= 1";
      throw std::invalid_argument(os.str());
    }
  }
  if (m.r < 0 || m.r > m.k())
    throw std::invalid_argument("r: must satisfy 0 <= r <= dims.size()");
  const int n = m.n();
  if (m.a.rows() != n || m.a.cols() != n) {
    std::ostringstream os;
    os << "A: must be " << n << "x" << n << ", got " << m.a.rows() << "x"
       << m.a.cols();
    throw std::invalid_argument(os.str());
  }
  if (!m.a.allFinite()) throw std::invalid_argument("A: entries must be finite");
  if (m.b && (m.b->rows() != n || !m.b->allFinite()))
    throw std::invalid_argument("B: must have n rows and finite entries");
  if (m.c && (m.c->cols() != n || !m.c->allFinite()))
    throw std::invalid_argument("C: must have n columns and finite entries");
  if (m.d) {
    if (!m.b || !m.c)
      throw std::invalid_argument("D: requires B and C to be present");
    if (m.d->rows() != m.c->rows() || m.d->cols() != m.b->cols() ||
        !m.d->allFinite())
      throw std::invalid_argument(
          "D: must be (C rows) x (B cols) with finite entries");
  }
}

/// Non-fatal observations about a validated model. These flag inputs that
/// are accepted but likely to behave degenerately.
inline std::vector<std::string> model_warnings(const HybridRoesserModel& m) {
  std::vector<std::string> out;
  if (m.nu == 1.0 && m.r > 0)
    out.push_back(
        "nu = 1: continuous coordinates reduce to integer order; the sector "
        "degenerates to a half-plane");
  if (m.r == m.k()) {
    const double det = m.a.determinant();
    const double scale = std::pow(std::max(1.0, max_row_sum(m.a)), m.n());
    if (std::abs(det) <= 1e-12 * scale)
      out.push_back(
          "det(A) = 0 with all coordinates continuous: the characteristic "
          "function vanishes at the origin, which lies in the closed region");
  }
  return out;
}

/// Block-diagonal frequency matrix H(rho) = diag(rho_1 I, ..., rho_k I).
inline Eigen::MatrixXcd h_of_rho(const HybridRoesserModel& m,
                                 const ComplexPoint& rho) {
  if (static_cast<int>(rho.size()) != m.k())
    throw std::invalid_argument("rho: needs one value per coordinate");
  const int n = m.n();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  int off = 0;
  for (int i = 0; i < m.k(); ++i) {
    for (int t = 0; t < m.dims[i]; ++t) h(off + t, off + t) = rho[i];
    off += m.dims[i];
  }
  return h;
}

/// Characteristic function Delta(rho) = det(H(rho) - A).
inline Complex delta(const HybridRoesserModel& m, const ComplexPoint& rho) {
  Eigen::MatrixXcd pencil = h_of_rho(m, rho);
  pencil -= m.a.cast<Complex>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(pencil);
  return lu.determinant();
}

/// Transfer function T(rho) = C (H(rho) - A)^{-1} B + D.
///
/// Requires B, C and D. Throws SingularAtPoint when the pencil's reciprocal
/// condition estimate falls below 1e-12.
inline Eigen::MatrixXcd transfer_eval(const HybridRoesserModel& m,
                                      const ComplexPoint& rho) {
  if (!m.b || !m.c || !m.d)
    throw MissingMatrices("transfer evaluation requires B, C and D");
  Eigen::MatrixXcd pencil = h_of_rho(m, rho);
  pencil -= m.a.cast<Complex>();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(pencil);
  const double diag_max = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
  const double diag_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  const double rcond = diag_max > 0.0 ? diag_min / diag_max : 0.0;
  if (rcond < 1e-12) {
    std::ostringstream os;
    os << "pencil H(rho) - A is singular at the requested point (rcond "
       << rcond << ")";
    throw SingularAtPoint(os.str());
  }
  return m.c->cast<Complex>() * lu.solve(m.b->cast<Complex>()) +
         m.d->cast<Complex>();
}

}  // namespace fracnd
