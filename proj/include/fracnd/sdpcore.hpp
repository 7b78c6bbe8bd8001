#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

/// Small dense semidefinite feasibility solver.
///
/// Problems are affine matrix inequalities over real variables x:
///   F_c(x) = C_c0 + sum_j x_j C_cj
/// with per-constraint sense (negative or positive definite) and margin.
/// A point is accepted when every constraint holds with its margin:
///   negative: lambda_max(F_c(x)) <= -margin_c
///   positive: lambda_min(F_c(x)) >= +margin_c
///
/// The search runs a method of centers: margins are folded into the
/// constraints, the worst eigenvalue level t is tracked, and damped Newton
/// steps minimize the analytic-center barrier of the level set
/// {x : F_c(x) < t_k I for all c} while t_k is ratcheted down toward the
/// optimum. Everything is deterministic: the start point is x = 0 and no
/// randomization is used. Declared feasibility is always re-checked with a
/// plain eigenvalue routine, independent of the barrier machinery.

namespace fracnd {

/// Eigenvalue range of a real symmetric matrix.
struct EigBounds {
  double min_eig = 0.0;
  double max_eig = 0.0;
};

/// Thrown when a matrix handed to the solver fails a structural check
/// (asymmetry, size mismatch, exceeding the dimension cap).
class SdpStructureError : public std::invalid_argument {
 public:
  explicit SdpStructureError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Symmetric eigenvalue bounds with an explicit symmetry check.
inline EigBounds eig_bounds(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols())
    throw SdpStructureError("eig_bounds: matrix must be square");
  const double scale = 1.0 + s.cwiseAbs().maxCoeff();
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw SdpStructureError("eig_bounds: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_bounds: eigenvalue iteration failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// One x_j-dependent term of an affine matrix function.
struct LinearMatrixTerm {
  int var = 0;
  Eigen::MatrixXd coeff;
};

struct SdpConstraint {
  enum class Sense { NegativeDefinite, PositiveDefinite };
  Eigen::MatrixXd constant;
  std::vector<LinearMatrixTerm> terms;
  Sense sense = Sense::NegativeDefinite;
  /// Required definiteness depth; the constraint holds only when the
  /// relevant extreme eigenvalue clears it.
  double margin = 0.0;
};

/// Caller-side bookkeeping: how slices of x map back onto structured
/// matrix variables. The solver itself never interprets this.
struct VariableBlock {
  std::string label;
  int offset = 0;
  int count = 0;
  int block_dim = 0;
  bool hermitian = true;
};

struct LmiFeasibilityProblem {
  int num_vars = 0;
  std::vector<SdpConstraint> constraints;
  std::vector<VariableBlock> blocks;
};

struct SolveOptions {
  /// Total Newton-step budget across all centering rounds.
  int max_iterations = 5000;
  /// Largest accepted constraint dimension.
  int dimension_cap = 128;
  /// Required slack below zero (folded scale) before declaring success.
  /// Zero selects an automatic target of ten times the largest margin.
  double target_slack = 0.0;
};

struct SolveResult {
  enum class Status { Feasible, Infeasible, IterationLimit, NumericalBreakdown };
  Status status = Status::NumericalBreakdown;
  /// Best point found (always num_vars long, zero on breakdown).
  Eigen::VectorXd x;
  /// Worst margin-folded eigenvalue level at x, re-measured independently;
  /// negative means every constraint holds with its margin.
  double best_slack = std::numeric_limits<double>::infinity();
  int newton_steps = 0;
  int outer_rounds = 0;
  std::string detail;
};

inline const char* to_string(SolveResult::Status s) {
  switch (s) {
    case SolveResult::Status::Feasible:
      return "feasible";
    case SolveResult::Status::Infeasible:
      return "infeasible";
    case SolveResult::Status::IterationLimit:
      return "iteration-limit";
    case SolveResult::Status::NumericalBreakdown:
      return "numerical-breakdown";
  }
  return "unknown";
}

inline void validate_problem(const LmiFeasibilityProblem& p,
                             const SolveOptions& opts = {}) {
  if (p.num_vars < 0) throw SdpStructureError("num_vars must be >= 0");
  for (std::size_t c = 0; c < p.constraints.size(); ++c) {
    const auto& con = p.constraints[c];
    std::ostringstream tag;
    tag << "constraint " << c << ": ";
    const int d = static_cast<int>(con.constant.rows());
    if (con.constant.cols() != d)
      throw SdpStructureError(tag.str() + "constant term must be square");
    if (d > opts.dimension_cap)
      throw SdpStructureError(tag.str() + "dimension exceeds cap");
    if (!con.constant.allFinite())
      throw SdpStructureError(tag.str() + "constant term must be finite");
    const double s0 = 1.0 + con.constant.cwiseAbs().maxCoeff();
    if ((con.constant - con.constant.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * s0)
      throw SdpStructureError(tag.str() + "constant term must be symmetric");
    if (!(con.margin >= 0.0) || !std::isfinite(con.margin))
      throw SdpStructureError(tag.str() + "margin must be finite and >= 0");
    for (const auto& t : con.terms) {
      if (t.var < 0 || t.var >= p.num_vars)
        throw SdpStructureError(tag.str() + "term references unknown variable");
      if (t.coeff.rows() != d || t.coeff.cols() != d)
        throw SdpStructureError(tag.str() + "term dimension mismatch");
      if (!t.coeff.allFinite())
        throw SdpStructureError(tag.str() + "term must be finite");
      const double st = 1.0 + t.coeff.cwiseAbs().maxCoeff();
      if ((t.coeff - t.coeff.transpose()).cwiseAbs().maxCoeff() > 1e-10 * st)
        throw SdpStructureError(tag.str() + "term must be symmetric");
    }
  }
}

namespace detail {

/// Margin-folded view: M_c(x) = sgn * F_c(x) + margin * I with sgn = +1 for
/// negative-definite constraints and -1 for positive-definite ones, so that
/// feasibility becomes max_c lambda_max(M_c(x)) < 0 uniformly.
struct FoldedConstraint {
  Eigen::MatrixXd constant;
  std::vector<LinearMatrixTerm> terms;
};

inline std::vector<FoldedConstraint> fold(const LmiFeasibilityProblem& p) {
  std::vector<FoldedConstraint> out;
  out.reserve(p.constraints.size());
  for (const auto& con : p.constraints) {
    const double sgn =
        con.sense == SdpConstraint::Sense::NegativeDefinite ? 1.0 : -1.0;
    FoldedConstraint f;
    f.constant = sgn * con.constant;
    f.constant.diagonal().array() += con.margin;
    // Symmetrize once so downstream Cholesky factors see exact symmetry.
    f.constant = 0.5 * (f.constant + f.constant.transpose()).eval();
    f.terms.reserve(con.terms.size());
    for (const auto& t : con.terms) {
      Eigen::MatrixXd c = sgn * t.coeff;
      c = 0.5 * (c + c.transpose()).eval();
      f.terms.push_back({t.var, std::move(c)});
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline Eigen::MatrixXd folded_value(const FoldedConstraint& f,
                                    const Eigen::VectorXd& x) {
  Eigen::MatrixXd m = f.constant;
  for (const auto& t : f.terms) m += x(t.var) * t.coeff;
  return m;
}

inline double worst_level(const std::vector<FoldedConstraint>& cons,
                          const Eigen::VectorXd& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : cons) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(folded_value(f, x),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      return std::numeric_limits<double>::quiet_NaN();
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  return worst;
}

/// Barrier phi(x) = -sum_c logdet(t_k I - M_c(x)); +inf outside the level
/// set. Uses Cholesky both as the definiteness test and the logdet source.
inline double barrier(const std::vector<FoldedConstraint>& cons,
                      const Eigen::VectorXd& x, double tk) {
  double phi = 0.0;
  for (const auto& f : cons) {
    Eigen::MatrixXd s = -folded_value(f, x);
    s.diagonal().array() += tk;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
      return std::numeric_limits<double>::infinity();
    phi -= 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }
  return phi;
}

}  // namespace detail

/// Decides feasibility of an affine matrix-inequality system.
///
/// Outcomes:
///  - Feasible: a point was found and independently re-checked; every
///    constraint holds with its margin. best_slack < 0.
///  - Infeasible: the level search stalled (five rounds without measurable
///    progress) or exhausted its budget while the best achievable level
///    stayed >= 0. This is evidence-based: for the problem sizes accepted
///    here the method of centers converges to the optimal level, so a
///    stalled non-negative level means no margined solution exists.
///  - IterationLimit: budget ran out while the level was still improving
///    and had not yet crossed zero; rerun with a larger budget to decide.
///  - NumericalBreakdown: non-finite values or a failed factorization.
inline SolveResult solve_feasibility(const LmiFeasibilityProblem& p,
                                     const SolveOptions& opts = {}) {
  validate_problem(p, opts);

  SolveResult res;
  res.x = Eigen::VectorXd::Zero(p.num_vars);
  if (p.constraints.empty()) {
    res.status = SolveResult::Status::Feasible;
    res.best_slack = -std::numeric_limits<double>::infinity();
    res.detail = "no constraints";
    return res;
  }

  const auto cons = detail::fold(p);
  double max_margin = 0.0;
  for (const auto& con : p.constraints)
    max_margin = std::max(max_margin, con.margin);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.num_vars);
  double t = detail::worst_level(cons, x);
  if (!std::isfinite(t)) {
    res.detail = "initial eigenvalue evaluation failed";
    return res;
  }
  const double target = opts.target_slack > 0.0
                            ? -opts.target_slack
                            : -(10.0 * max_margin + 1e-12 * (1.0 + std::abs(t)));

  double best = t;
  Eigen::VectorXd x_best = x;
  double tk = t + std::max(1.0, 0.1 * std::abs(t));
  int steps = 0;
  int stall = 0;
  bool improving = true;
  constexpr int kMaxInner = 40;

  const int m_total = p.num_vars;
  while (steps < opts.max_iterations && best > target) {
    ++res.outer_rounds;
    // Center within {x : M_c(x) < tk I} by damped Newton on the barrier.
    for (int inner = 0; inner < kMaxInner && steps < opts.max_iterations;
         ++inner) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(m_total);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m_total, m_total);
      bool factor_ok = true;
      for (const auto& f : cons) {
        Eigen::MatrixXd s = -detail::folded_value(f, x);
        s.diagonal().array() += tk;
        Eigen::LLT<Eigen::MatrixXd> llt(s);
        if (llt.info() != Eigen::Success) {
          factor_ok = false;
          break;
        }
        const auto& l = llt.matrixL();
        std::vector<std::pair<int, Eigen::MatrixXd>> whitened;
        whitened.reserve(f.terms.size());
        for (const auto& term : f.terms) {
          // G_j = L^-1 C_j L^-T; then grad_j += tr(G_j) and
          // H_jl += <G_j, G_l>_F, the Gram form of the barrier Hessian.
          Eigen::MatrixXd g = l.solve(term.coeff);
          g = l.solve(g.transpose()).transpose();
          grad(term.var) += g.trace();
          whitened.emplace_back(term.var, std::move(g));
        }
        for (std::size_t a = 0; a < whitened.size(); ++a)
          for (std::size_t b = a; b < whitened.size(); ++b) {
            const double v = whitened[a]
                                 .second.cwiseProduct(whitened[b].second)
                                 .sum();
            hess(whitened[a].first, whitened[b].first) += v;
            if (whitened[a].first != whitened[b].first)
              hess(whitened[b].first, whitened[a].first) += v;
          }
      }
      if (!factor_ok) break;
      if (!grad.allFinite() || !hess.allFinite()) {
        res.detail = "non-finite barrier derivatives";
        res.x = x_best;
        res.best_slack = detail::worst_level(cons, x_best);
        return res;
      }

      const double reg = 1e-10 * (1.0 + hess.trace() / std::max(1, m_total));
      hess.diagonal().array() += reg;
      Eigen::VectorXd dir = hess.ldlt().solve(-grad);
      if (!dir.allFinite()) {
        res.detail = "Newton direction solve failed";
        res.x = x_best;
        res.best_slack = detail::worst_level(cons, x_best);
        return res;
      }
      const double decrement = -grad.dot(dir);
      const double phi0 = detail::barrier(cons, x, tk);
      if (decrement < 1e-12 * (1.0 + std::abs(phi0))) break;

      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd xn = x + alpha * dir;
        const double phin = detail::barrier(cons, xn, tk);
        if (std::isfinite(phin) &&
            phin <= phi0 - 1e-4 * alpha * decrement) {
          x = xn;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++steps;
      if (!moved) break;
    }

    const double t_new = detail::worst_level(cons, x);
    if (!std::isfinite(t_new)) {
      res.detail = "eigenvalue evaluation failed during descent";
      res.x = x_best;
      res.best_slack = detail::worst_level(cons, x_best);
      return res;
    }
    if (t_new < best - 1e-12 * (1.0 + std::abs(best))) {
      best = t_new;
      x_best = x;
      stall = 0;
      improving = true;
    } else {
      ++stall;
      improving = false;
      if (stall >= 5) break;
    }
    tk = t_new + 0.25 * (tk - t_new);
  }

  res.newton_steps = steps;
  res.x = x_best;

  // Independent re-check, outside the barrier machinery.
  double verified = -std::numeric_limits<double>::infinity();
  for (const auto& f : cons) {
    const Eigen::MatrixXd m = detail::folded_value(f, x_best);
    verified = std::max(verified, eig_bounds(0.5 * (m + m.transpose())).max_eig);
  }
  res.best_slack = verified;

  if (verified < 0.0) {
    res.status = SolveResult::Status::Feasible;
    res.detail = "margined solution re-verified";
  } else if (steps >= opts.max_iterations && improving) {
    res.status = SolveResult::Status::IterationLimit;
    res.detail = "budget exhausted while still improving";
  } else {
    res.status = SolveResult::Status::Infeasible;
    res.detail = "level search stalled at a non-negative slack";
  }
  return res;
}

}  // namespace fracnd
