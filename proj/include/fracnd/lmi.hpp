#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracnd/model.hpp"
#include "fracnd/region.hpp"
#include "fracnd/sdpcore.hpp"

/// Linear-matrix-inequality certificates of region stability.
///
/// A certificate consists of positive definite scaling blocks U_i (one per
/// coordinate), V_i (one per continuous coordinate), and one multiplier
/// matrix. Three certificate shapes are supported, differing in how the
/// multiplier couples the system matrix into the inequality:
///
///   theorem2:   Z = G + [I -A]^* J [I -A],      J Hermitian
///   corollary1: Z = G + [I; -A] J [I; -A]^*,    J Hermitian
///   corollary2: Z = G + Sym([I; -A] R [I I]),   R general complex
///
/// with G the region-weighted block matrix built from U, V and the region
/// descriptors. A certificate is accepted when Z is negative definite and
/// all scaling blocks are positive definite, each with a margin.

namespace fracnd {

enum class CertificateForm { Theorem2, Corollary1, Corollary2 };

inline const char* to_string(CertificateForm f) {
  switch (f) {
    case CertificateForm::Theorem2:
      return "theorem2";
    case CertificateForm::Corollary1:
      return "corollary1";
    case CertificateForm::Corollary2:
      return "corollary2";
  }
  return "unknown";
}

inline CertificateForm certificate_form_from_string(const std::string& s) {
  if (s == "theorem2") return CertificateForm::Theorem2;
  if (s == "corollary1") return CertificateForm::Corollary1;
  if (s == "corollary2") return CertificateForm::Corollary2;
  throw std::invalid_argument(
      "form: expected one of theorem2, corollary1, corollary2");
}

struct StabilityCertificate {
  CertificateForm form = CertificateForm::Theorem2;
  /// One Hermitian positive definite block per coordinate.
  std::vector<Eigen::MatrixXcd> u;
  /// One Hermitian positive definite block per continuous coordinate.
  std::vector<Eigen::MatrixXcd> v;
  /// Multiplier for theorem2 / corollary1.
  std::optional<Eigen::MatrixXcd> j;
  /// Multiplier for corollary2.
  std::optional<Eigen::MatrixXcd> r;
};

/// Acceptance thresholds. Defaults scale with the model:
/// eps = base * (1 + max_row_sum(A)).
struct VerifyTolerances {
  /// Z must satisfy lambda_max(Z) < -eps_z.
  double eps_z = 1e-6;
  /// Every U_i (and V_i) must satisfy lambda_min > eps_p.
  double eps_p = 1e-6;

  static VerifyTolerances from_model(const HybridRoesserModel& m,
                                     double base = 1e-6) {
    const double eps = base * (1.0 + max_row_sum(m.a));
    return {eps, eps};
  }
};

struct VerificationReport {
  bool accepted = false;
  double lambda_max_z = 0.0;
  double min_eig_u = 0.0;
  /// Empty when the model has no continuous coordinates.
  std::optional<double> min_eig_v;
  VerifyTolerances tols;
};

namespace detail {

inline void require_hermitian(const Eigen::MatrixXcd& h, const std::string& who) {
  if (h.rows() != h.cols())
    throw std::invalid_argument(who + ": must be square");
  const double tol = 1e-12 * (1.0 + h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument(who + ": must be Hermitian");
}

}  // namespace detail

/// Real embedding [[Re, -Im], [Im, Re]] of a complex matrix. For Hermitian
/// input the image is symmetric and carries each eigenvalue twice.
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  Eigen::MatrixXd out(2 * n, 2 * m);
  out.topLeftCorner(n, m) = z.real();
  out.topRightCorner(n, m) = -z.imag();
  out.bottomLeftCorner(n, m) = z.imag();
  out.bottomRightCorner(n, m) = z.real();
  return out;
}

/// Region-weighted scaling matrix. For each coordinate i with descriptor
/// (P_i, Q_i) and blocks U_i (plus V_i on sector coordinates), the four
/// n x n quadrants of G accumulate U_i p_ab + V_i q_ab block-diagonally:
///
///   G = [ sum_i U_i p11 + V_i q11,  sum_i U_i p12 + V_i q12 ]
///       [ (1,2 quadrant)^*,         sum_i U_i p22 + V_i q22 ]
///
/// v must carry exactly one block per sector coordinate, in order.
inline Eigen::MatrixXcd assemble_g(const RegionDescriptor& d,
                                   const std::vector<Eigen::MatrixXcd>& u,
                                   const std::vector<Eigen::MatrixXcd>& v) {
  if (u.size() != d.pairs.size())
    throw std::invalid_argument("u: needs one block per coordinate");
  std::size_t sectors = 0;
  for (const auto& p : d.pairs)
    if (p.kind == RegionKind::Sector) ++sectors;
  if (v.size() != sectors)
    throw std::invalid_argument("v: needs one block per sector coordinate");

  int n = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::ostringstream who;
    who << "u[" << i << "]";
    detail::require_hermitian(u[i], who.str());
    n += static_cast<int>(u[i].rows());
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::ostringstream who;
    who << "v[" << i << "]";
    detail::require_hermitian(v[i], who.str());
  }

  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  int off = 0;
  std::size_t vi = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& pq = d.pairs[i];
    const int di = static_cast<int>(u[i].rows());
    const bool sector = pq.kind == RegionKind::Sector;
    if (sector && v[vi].rows() != di)
      throw std::invalid_argument("v: block size must match the matching u");
    const Eigen::MatrixXcd vz = Eigen::MatrixXcd::Zero(di, di);
    const Eigen::MatrixXcd& vb = sector ? v[vi] : vz;
    g.block(off, off, di, di) = u[i] * pq.p(0, 0) + vb * pq.q(0, 0);
    g.block(off, n + off, di, di) = u[i] * pq.p(0, 1) + vb * pq.q(0, 1);
    g.block(n + off, off, di, di) =
        g.block(off, n + off, di, di).adjoint();
    g.block(n + off, n + off, di, di) = u[i] * pq.p(1, 1) + vb * pq.q(1, 1);
    if (sector) ++vi;
    off += di;
  }
  return g;
}

namespace detail {

inline void check_square(const Eigen::MatrixXcd& m, int n,
                         const std::string& who) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << who << ": must be " << n << "x" << n;
    throw std::invalid_argument(os.str());
  }
}

/// [I, -A] as a complex n x 2n matrix.
inline Eigen::MatrixXcd row_pencil(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd m(n, 2 * n);
  m.leftCols(n) = Eigen::MatrixXcd::Identity(n, n);
  m.rightCols(n) = -a.cast<Complex>();
  return m;
}

/// [I; -A] as a complex 2n x n matrix.
inline Eigen::MatrixXcd col_pencil(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd m(2 * n, n);
  m.topRows(n) = Eigen::MatrixXcd::Identity(n, n);
  m.bottomRows(n) = -a.cast<Complex>();
  return m;
}

/// [I, I] as a complex n x 2n matrix.
inline Eigen::MatrixXcd twin_identity(Eigen::Index n) {
  Eigen::MatrixXcd m(n, 2 * n);
  m.leftCols(n) = Eigen::MatrixXcd::Identity(n, n);
  m.rightCols(n) = Eigen::MatrixXcd::Identity(n, n);
  return m;
}

}  // namespace detail

/// Z = G + [I -A]^* J [I -A]; J Hermitian n x n.
inline Eigen::MatrixXcd z_theorem2(const HybridRoesserModel& m,
                                   const Eigen::MatrixXcd& g,
                                   const Eigen::MatrixXcd& j) {
  const int n = m.n();
  detail::check_square(j, n, "J");
  detail::require_hermitian(j, "J");
  if (g.rows() != 2 * n || g.cols() != 2 * n)
    throw std::invalid_argument("G: size must be twice the state dimension");
  const Eigen::MatrixXcd mp = detail::row_pencil(m.a);
  return g + mp.adjoint() * j * mp;
}

/// Z = G + [I; -A] J [I; -A]^*; J Hermitian n x n.
inline Eigen::MatrixXcd z_corollary1(const HybridRoesserModel& m,
                                     const Eigen::MatrixXcd& g,
                                     const Eigen::MatrixXcd& j) {
  const int n = m.n();
  detail::check_square(j, n, "J");
  detail::require_hermitian(j, "J");
  if (g.rows() != 2 * n || g.cols() != 2 * n)
    throw std::invalid_argument("G: size must be twice the state dimension");
  const Eigen::MatrixXcd np = detail::col_pencil(m.a);
  return g + np * j * np.adjoint();
}

/// Z = G + W + W^* with W = [I; -A] R [I I]; R a general complex n x n.
inline Eigen::MatrixXcd z_corollary2(const HybridRoesserModel& m,
                                     const Eigen::MatrixXcd& g,
                                     const Eigen::MatrixXcd& r) {
  const int n = m.n();
  detail::check_square(r, n, "R");
  if (g.rows() != 2 * n || g.cols() != 2 * n)
    throw std::invalid_argument("G: size must be twice the state dimension");
  const Eigen::MatrixXcd w =
      detail::col_pencil(m.a) * r * detail::twin_identity(n);
  return g + w + w.adjoint();
}

/// True when the corollary2 shape cannot be made strictly negative for this
/// model: with at least one discrete coordinate next to another coordinate,
/// difference vectors x = (e, -e) supported on a discrete block satisfy
/// [I I] x = 0 and x^* G x = 0, so x^* Z x = 0 for every choice of R. Only
/// models whose coordinates are all continuous escape this kernel.
inline bool corollary2_structurally_limited(const HybridRoesserModel& m) {
  return m.r < m.k();
}

/// Checks a certificate against a model. Throws std::invalid_argument on
/// structural mismatch (sizes, missing multiplier, non-Hermitian blocks);
/// returns a report with measured eigenvalue extremes otherwise.
///
/// All eigenvalue measurements run through the real embedding and the
/// symmetric eigensolver, the same path the synthesis re-check uses.
inline VerificationReport verify_certificate(const HybridRoesserModel& m,
                                             const StabilityCertificate& cert,
                                             const VerifyTolerances& tols) {
  validate_model(m);
  if (static_cast<int>(cert.u.size()) != m.k())
    throw std::invalid_argument("certificate: needs one U block per coordinate");
  if (static_cast<int>(cert.v.size()) != m.r)
    throw std::invalid_argument(
        "certificate: needs one V block per continuous coordinate");
  for (int i = 0; i < m.k(); ++i)
    if (cert.u[i].rows() != m.dims[i] || cert.u[i].cols() != m.dims[i])
      throw std::invalid_argument("certificate: U block size mismatch");
  for (int i = 0; i < m.r; ++i)
    if (cert.v[i].rows() != m.dims[i] || cert.v[i].cols() != m.dims[i])
      throw std::invalid_argument("certificate: V block size mismatch");

  const RegionDescriptor region = region_for_model(m);
  const Eigen::MatrixXcd g = assemble_g(region, cert.u, cert.v);

  Eigen::MatrixXcd z;
  switch (cert.form) {
    case CertificateForm::Theorem2:
      if (!cert.j)
        throw std::invalid_argument("certificate: theorem2 requires J");
      z = z_theorem2(m, g, *cert.j);
      break;
    case CertificateForm::Corollary1:
      if (!cert.j)
        throw std::invalid_argument("certificate: corollary1 requires J");
      z = z_corollary1(m, g, *cert.j);
      break;
    case CertificateForm::Corollary2:
      if (!cert.r)
        throw std::invalid_argument("certificate: corollary2 requires R");
      z = z_corollary2(m, g, *cert.r);
      break;
  }

  VerificationReport rep;
  rep.tols = tols;
  rep.lambda_max_z = eig_bounds(realify(z)).max_eig;
  double umin = std::numeric_limits<double>::infinity();
  for (const auto& ui : cert.u)
    umin = std::min(umin, eig_bounds(realify(ui)).min_eig);
  rep.min_eig_u = umin;
  if (m.r > 0) {
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& vi : cert.v)
      vmin = std::min(vmin, eig_bounds(realify(vi)).min_eig);
    rep.min_eig_v = vmin;
  }
  rep.accepted = rep.lambda_max_z < -tols.eps_z && rep.min_eig_u > tols.eps_p &&
                 (!rep.min_eig_v || *rep.min_eig_v > tols.eps_p);
  return rep;
}

namespace detail {

/// Real coordinate bases for the structured matrix variables.
///
/// Hermitian d x d: d diagonal units first, then for each pair i < j in
/// row-major order a real-part unit (E_ij + E_ji) and an imaginary-part
/// unit (i E_ij - i E_ji). General d x d: for each entry in row-major
/// order a real unit E_ij and an imaginary unit i E_ij.
inline std::vector<Eigen::MatrixXcd> hermitian_basis(int d) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(d, d);
    b(i, i) = 1.0;
    out.push_back(std::move(b));
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(d, d);
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      out.push_back(std::move(re));
      Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(d, d);
      im(i, j) = Complex(0, 1);
      im(j, i) = Complex(0, -1);
      out.push_back(std::move(im));
    }
  return out;
}

inline std::vector<Eigen::MatrixXcd> general_basis(int d) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(2 * static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(d, d);
      re(i, j) = 1.0;
      out.push_back(std::move(re));
      Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(d, d);
      im(i, j) = Complex(0, 1);
      out.push_back(std::move(im));
    }
  return out;
}

inline Eigen::MatrixXcd matrix_from_coords(
    const std::vector<Eigen::MatrixXcd>& basis, const Eigen::VectorXd& x,
    int offset) {
  Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t t = 0; t < basis.size(); ++t)
    m += x(offset + static_cast<int>(t)) * basis[t];
  return m;
}

}  // namespace detail

/// Translates certificate synthesis for a model into an affine feasibility
/// problem over real variables:
///   - Z(x) negative definite with margin tols.eps_z,
///   - every U_i (and V_i) positive definite with margin tols.eps_p,
/// all posed on the real embedding. Variable block metadata records where
/// each structured matrix lives inside x.
inline LmiFeasibilityProblem build_feasibility_problem(
    const HybridRoesserModel& m, CertificateForm form,
    const VerifyTolerances& tols) {
  validate_model(m);
  const int n = m.n();
  const RegionDescriptor region = region_for_model(m);

  LmiFeasibilityProblem prob;
  int offset = 0;

  struct StructuredVar {
    std::string label;
    std::vector<Eigen::MatrixXcd> basis;
    int offset;
  };
  std::vector<StructuredVar> uvars, vvars;

  for (int i = 0; i < m.k(); ++i) {
    StructuredVar sv;
    sv.label = "U" + std::to_string(i);
    sv.basis = detail::hermitian_basis(m.dims[i]);
    sv.offset = offset;
    offset += static_cast<int>(sv.basis.size());
    prob.blocks.push_back(
        {sv.label, sv.offset, static_cast<int>(sv.basis.size()), m.dims[i],
         true});
    uvars.push_back(std::move(sv));
  }
  for (int i = 0; i < m.r; ++i) {
    StructuredVar sv;
    sv.label = "V" + std::to_string(i);
    sv.basis = detail::hermitian_basis(m.dims[i]);
    sv.offset = offset;
    offset += static_cast<int>(sv.basis.size());
    prob.blocks.push_back(
        {sv.label, sv.offset, static_cast<int>(sv.basis.size()), m.dims[i],
         true});
    vvars.push_back(std::move(sv));
  }

  StructuredVar mult;
  const bool general = form == CertificateForm::Corollary2;
  mult.label = general ? "R" : "J";
  mult.basis = general ? detail::general_basis(n) : detail::hermitian_basis(n);
  mult.offset = offset;
  offset += static_cast<int>(mult.basis.size());
  prob.blocks.push_back({mult.label, mult.offset,
                         static_cast<int>(mult.basis.size()), n, !general});
  prob.num_vars = offset;

  // The negativity constraint on Z(x). Z is linear in every variable and
  // vanishes at x = 0, so only per-variable coefficient matrices appear.
  SdpConstraint zcon;
  zcon.sense = SdpConstraint::Sense::NegativeDefinite;
  zcon.margin = tols.eps_z;
  zcon.constant = Eigen::MatrixXd::Zero(4 * n, 4 * n);

  std::vector<Eigen::MatrixXcd> zeros_u, zeros_v;
  for (int i = 0; i < m.k(); ++i)
    zeros_u.push_back(Eigen::MatrixXcd::Zero(m.dims[i], m.dims[i]));
  for (int i = 0; i < m.r; ++i)
    zeros_v.push_back(Eigen::MatrixXcd::Zero(m.dims[i], m.dims[i]));

  for (int i = 0; i < m.k(); ++i) {
    for (std::size_t t = 0; t < uvars[i].basis.size(); ++t) {
      auto u = zeros_u;
      u[i] = uvars[i].basis[t];
      const Eigen::MatrixXcd gc = assemble_g(region, u, zeros_v);
      zcon.terms.push_back(
          {uvars[i].offset + static_cast<int>(t), realify(gc)});
    }
  }
  for (int i = 0; i < m.r; ++i) {
    for (std::size_t t = 0; t < vvars[i].basis.size(); ++t) {
      auto v = zeros_v;
      v[i] = vvars[i].basis[t];
      const Eigen::MatrixXcd gc = assemble_g(region, zeros_u, v);
      zcon.terms.push_back(
          {vvars[i].offset + static_cast<int>(t), realify(gc)});
    }
  }
  {
    const Eigen::MatrixXcd mp = detail::row_pencil(m.a);
    const Eigen::MatrixXcd np = detail::col_pencil(m.a);
    const Eigen::MatrixXcd tw = detail::twin_identity(n);
    for (std::size_t t = 0; t < mult.basis.size(); ++t) {
      Eigen::MatrixXcd zc;
      switch (form) {
        case CertificateForm::Theorem2:
          zc = mp.adjoint() * mult.basis[t] * mp;
          break;
        case CertificateForm::Corollary1:
          zc = np * mult.basis[t] * np.adjoint();
          break;
        case CertificateForm::Corollary2: {
          const Eigen::MatrixXcd w = np * mult.basis[t] * tw;
          zc = w + w.adjoint();
          break;
        }
      }
      zcon.terms.push_back({mult.offset + static_cast<int>(t), realify(zc)});
    }
  }
  prob.constraints.push_back(std::move(zcon));

  auto positivity = [&](const StructuredVar& sv, int d) {
    SdpConstraint c;
    c.sense = SdpConstraint::Sense::PositiveDefinite;
    c.margin = tols.eps_p;
    c.constant = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    for (std::size_t t = 0; t < sv.basis.size(); ++t)
      c.terms.push_back(
          {sv.offset + static_cast<int>(t), realify(sv.basis[t])});
    return c;
  };
  for (int i = 0; i < m.k(); ++i)
    prob.constraints.push_back(positivity(uvars[i], m.dims[i]));
  for (int i = 0; i < m.r; ++i)
    prob.constraints.push_back(positivity(vvars[i], m.dims[i]));

  return prob;
}

/// Rebuilds the structured certificate matrices from a solver point, using
/// the block metadata recorded by build_feasibility_problem.
inline StabilityCertificate extract_certificate(
    const HybridRoesserModel& m, CertificateForm form,
    const LmiFeasibilityProblem& prob, const Eigen::VectorXd& x) {
  if (x.size() != prob.num_vars)
    throw std::invalid_argument("x: length must match the problem variables");
  StabilityCertificate cert;
  cert.form = form;
  for (const auto& b : prob.blocks) {
    const auto basis = b.hermitian ? detail::hermitian_basis(b.block_dim)
                                   : detail::general_basis(b.block_dim);
    if (static_cast<int>(basis.size()) != b.count)
      throw std::invalid_argument("block metadata does not match its basis");
    const Eigen::MatrixXcd mat = detail::matrix_from_coords(basis, x, b.offset);
    if (b.label.rfind("U", 0) == 0)
      cert.u.push_back(mat);
    else if (b.label.rfind("V", 0) == 0)
      cert.v.push_back(mat);
    else if (b.label == "J")
      cert.j = mat;
    else if (b.label == "R")
      cert.r = mat;
    else
      throw std::invalid_argument("unknown variable block label: " + b.label);
  }
  if (static_cast<int>(cert.u.size()) != m.k() ||
      static_cast<int>(cert.v.size()) != m.r)
    throw std::invalid_argument("block metadata does not cover the model");
  return cert;
}

struct SynthesisOptions {
  VerifyTolerances tols;
  SolveOptions solve;
};

struct SynthesisOutcome {
  SolveResult solve;
  /// Present only when the solver succeeded.
  std::optional<StabilityCertificate> certificate;
  /// Independent re-check of the extracted certificate at the same margins.
  std::optional<VerificationReport> verification;
};

/// Searches for a certificate of the requested shape. On solver success the
/// extracted certificate is re-verified through verify_certificate before
/// being returned; an extracted certificate that fails its own verification
/// is discarded and reported as a numerical breakdown.
inline SynthesisOutcome synthesize_certificate(const HybridRoesserModel& m,
                                               CertificateForm form,
                                               const SynthesisOptions& opts) {
  const LmiFeasibilityProblem prob =
      build_feasibility_problem(m, form, opts.tols);
  SynthesisOutcome out;
  out.solve = solve_feasibility(prob, opts.solve);
  if (out.solve.status != SolveResult::Status::Feasible) return out;

  StabilityCertificate cert = extract_certificate(m, form, prob, out.solve.x);
  VerificationReport rep = verify_certificate(m, cert, opts.tols);
  if (!rep.accepted) {
    out.solve.status = SolveResult::Status::NumericalBreakdown;
    out.solve.detail =
        "solver accepted a point whose extracted certificate failed "
        "verification";
    return out;
  }
  out.certificate = std::move(cert);
  out.verification = rep;
  return out;
}

}  // namespace fracnd
