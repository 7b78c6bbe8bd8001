#include "fracnd/sdpcore.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace fracnd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd mat1(double v) {
  Eigen::MatrixXd m(1, 1);
  m << v;
  return m;
}

/// One-variable constraint  sense(x * I_d + c0)  with margin.
SdpConstraint scalar_constraint(double c0, SdpConstraint::Sense sense,
                                double margin) {
  SdpConstraint con;
  con.constant = mat1(c0);
  con.terms.push_back({0, mat1(1.0)});
  con.sense = sense;
  con.margin = margin;
  return con;
}

}  // namespace

TEST_CASE("eig_bounds") {
  SECTION("diagonal") {
    Eigen::MatrixXd d(2, 2);
    d << 1.0, 0.0, 0.0, -3.0;
    const auto b = eig_bounds(d);
    CHECK_THAT(b.min_eig, WithinRel(-3.0, 1e-14));
    CHECK_THAT(b.max_eig, WithinRel(1.0, 1e-14));
  }
  SECTION("exchange matrix") {
    Eigen::MatrixXd x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    const auto b = eig_bounds(x);
    CHECK_THAT(b.min_eig, WithinAbs(-1.0, 1e-14));
    CHECK_THAT(b.max_eig, WithinAbs(1.0, 1e-14));
  }
  SECTION("rejects bad input") {
    CHECK_THROWS_AS(eig_bounds(Eigen::MatrixXd::Zero(2, 3)), SdpStructureError);
    Eigen::MatrixXd ns(2, 2);
    ns << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(eig_bounds(ns), SdpStructureError);
  }
}

TEST_CASE("validate_problem") {
  LmiFeasibilityProblem p;
  p.num_vars = 1;
  SECTION("accepts a well-formed problem") {
    p.constraints.push_back(
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 0.1));
    CHECK_NOTHROW(validate_problem(p));
  }
  SECTION("unknown variable") {
    auto con =
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 0.0);
    con.terms[0].var = 3;
    p.constraints.push_back(con);
    CHECK_THROWS_WITH(validate_problem(p), ContainsSubstring("variable"));
  }
  SECTION("dimension cap") {
    SdpConstraint con;
    con.constant = Eigen::MatrixXd::Zero(129, 129);
    p.constraints.push_back(con);
    CHECK_THROWS_WITH(validate_problem(p), ContainsSubstring("cap"));
  }
  SECTION("asymmetric coefficient") {
    auto con =
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 0.0);
    Eigen::MatrixXd ns(2, 2);
    ns << 0.0, 1.0, 0.0, 0.0;
    con.constant = Eigen::MatrixXd::Zero(2, 2);
    con.terms[0].coeff = ns;
    p.constraints.push_back(con);
    CHECK_THROWS_WITH(validate_problem(p), ContainsSubstring("symmetric"));
  }
  SECTION("negative margin") {
    p.constraints.push_back(
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, -0.5));
    CHECK_THROWS_WITH(validate_problem(p), ContainsSubstring("margin"));
  }
  SECTION("term size mismatch") {
    auto con =
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 0.0);
    con.terms[0].coeff = Eigen::MatrixXd::Identity(2, 2);
    p.constraints.push_back(con);
    CHECK_THROWS_WITH(validate_problem(p), ContainsSubstring("dimension"));
  }
}

TEST_CASE("solve_feasibility on scalar problems") {
  SECTION("single negativity constraint is feasible") {
    LmiFeasibilityProblem p;
    p.num_vars = 1;
    p.constraints.push_back(
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 0.1));
    const auto res = solve_feasibility(p);
    REQUIRE(res.status == SolveResult::Status::Feasible);
    CHECK(res.x(0) < -0.1);
    CHECK(res.best_slack < 0.0);
  }

  SECTION("contradictory bounds are infeasible with quantified slack") {
    // x >= +1 and x <= -1 cannot hold together; the folded optimum is
    // slack = 1 at x = 0.
    LmiFeasibilityProblem p;
    p.num_vars = 1;
    p.constraints.push_back(
        scalar_constraint(0.0, SdpConstraint::Sense::PositiveDefinite, 1.0));
    p.constraints.push_back(
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 1.0));
    const auto res = solve_feasibility(p);
    REQUIRE(res.status == SolveResult::Status::Infeasible);
    CHECK(res.best_slack >= 1.0 - 1e-9);
  }

  SECTION("two-sided interval reports the exact folded optimum") {
    // Need x <= -m and x >= m - 2: feasible iff m <= 1, with optimal folded
    // slack m - 1 at x = -1.
    for (const double m : {0.1, 0.5}) {
      LmiFeasibilityProblem p;
      p.num_vars = 1;
      p.constraints.push_back(
          scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, m));
      p.constraints.push_back(
          scalar_constraint(2.0, SdpConstraint::Sense::PositiveDefinite, m));
      const auto res = solve_feasibility(p);
      REQUIRE(res.status == SolveResult::Status::Feasible);
      CHECK(res.best_slack < 0.0);
      CHECK(res.best_slack >= m - 1.0 - 1e-9);
    }
    {
      LmiFeasibilityProblem p;
      p.num_vars = 1;
      p.constraints.push_back(
          scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 1.5));
      p.constraints.push_back(
          scalar_constraint(2.0, SdpConstraint::Sense::PositiveDefinite, 1.5));
      const auto res = solve_feasibility(p);
      CHECK(res.status == SolveResult::Status::Infeasible);
      CHECK(res.best_slack >= 0.5 - 1e-9);
    }
  }

  SECTION("raising margins never improves the reachable slack") {
    auto slack_at = [](double margin) {
      LmiFeasibilityProblem p;
      p.num_vars = 1;
      p.constraints.push_back(scalar_constraint(
          0.0, SdpConstraint::Sense::NegativeDefinite, margin));
      p.constraints.push_back(scalar_constraint(
          2.0, SdpConstraint::Sense::PositiveDefinite, margin));
      return solve_feasibility(p).best_slack;
    };
    const double s1 = slack_at(0.05);
    const double s2 = slack_at(0.3);
    const double s3 = slack_at(0.9);
    CHECK(s1 <= s2 + 1e-9);
    CHECK(s2 <= s3 + 1e-9);
  }
}

TEST_CASE("solve_feasibility on coupled matrix problems") {
  // Variables (x1, x2) in [[x1, x2], [x2, x1]] <= -0.1 I, with x1 bounded
  // below through a positivity constraint. Exercises the off-diagonal
  // entries of the barrier Hessian.
  LmiFeasibilityProblem p;
  p.num_vars = 2;
  SdpConstraint neg;
  neg.sense = SdpConstraint::Sense::NegativeDefinite;
  neg.margin = 0.1;
  neg.constant = Eigen::MatrixXd::Zero(2, 2);
  neg.terms.push_back({0, Eigen::MatrixXd::Identity(2, 2)});
  Eigen::MatrixXd exch(2, 2);
  exch << 0.0, 1.0, 1.0, 0.0;
  neg.terms.push_back({1, exch});
  p.constraints.push_back(neg);
  SdpConstraint bound;
  bound.sense = SdpConstraint::Sense::PositiveDefinite;
  bound.margin = 0.0;
  bound.constant = mat1(2.0);
  bound.terms.push_back({0, mat1(1.0)});
  p.constraints.push_back(bound);

  const auto res = solve_feasibility(p);
  REQUIRE(res.status == SolveResult::Status::Feasible);

  // Re-check the returned point from scratch.
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 2);
  f += res.x(0) * Eigen::MatrixXd::Identity(2, 2);
  f += res.x(1) * exch;
  CHECK(eig_bounds(f).max_eig <= -0.1 + 1e-12);
  CHECK(2.0 + res.x(0) >= -1e-12);
}

TEST_CASE("solve_feasibility bookkeeping") {
  SECTION("no constraints means trivially feasible") {
    LmiFeasibilityProblem p;
    p.num_vars = 3;
    const auto res = solve_feasibility(p);
    CHECK(res.status == SolveResult::Status::Feasible);
    CHECK(res.x.size() == 3);
    CHECK(res.x.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("deterministic across repeated runs") {
    LmiFeasibilityProblem p;
    p.num_vars = 2;
    SdpConstraint neg;
    neg.sense = SdpConstraint::Sense::NegativeDefinite;
    neg.margin = 0.05;
    neg.constant = Eigen::MatrixXd::Zero(2, 2);
    neg.terms.push_back({0, Eigen::MatrixXd::Identity(2, 2)});
    Eigen::MatrixXd exch(2, 2);
    exch << 0.0, 1.0, 1.0, 0.0;
    neg.terms.push_back({1, exch});
    p.constraints.push_back(neg);
    p.constraints.push_back(
        scalar_constraint(3.0, SdpConstraint::Sense::PositiveDefinite, 0.0));

    const auto a = solve_feasibility(p);
    const auto b = solve_feasibility(p);
    CHECK(a.status == b.status);
    CHECK(a.newton_steps == b.newton_steps);
    CHECK(a.outer_rounds == b.outer_rounds);
    REQUIRE(a.x.size() == b.x.size());
    for (int t = 0; t < a.x.size(); ++t) CHECK(a.x(t) == b.x(t));
    CHECK(a.best_slack == b.best_slack);
  }

  SECTION("tiny budget on a distant target reports the iteration limit") {
    LmiFeasibilityProblem p;
    p.num_vars = 1;
    p.constraints.push_back(
        scalar_constraint(1e6, SdpConstraint::Sense::NegativeDefinite, 0.0));
    SolveOptions opts;
    opts.max_iterations = 3;
    const auto res = solve_feasibility(p, opts);
    CHECK(res.status == SolveResult::Status::IterationLimit);
    CHECK(res.best_slack > 0.0);
    CHECK(res.newton_steps == 3);
    // The same problem resolves with the default budget.
    const auto full = solve_feasibility(p);
    CHECK(full.status == SolveResult::Status::Feasible);
  }

  SECTION("explicit target slack is honored") {
    LmiFeasibilityProblem p;
    p.num_vars = 1;
    p.constraints.push_back(
        scalar_constraint(0.0, SdpConstraint::Sense::NegativeDefinite, 0.1));
    p.constraints.push_back(
        scalar_constraint(2.0, SdpConstraint::Sense::PositiveDefinite, 0.1));
    SolveOptions opts;
    opts.target_slack = 0.5;
    const auto res = solve_feasibility(p, opts);
    REQUIRE(res.status == SolveResult::Status::Feasible);
    CHECK(res.best_slack <= -0.45);
  }
}
