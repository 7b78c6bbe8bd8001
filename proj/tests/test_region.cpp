#include "fracnd/region.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace fracnd;
using namespace fracnd::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("descriptor construction") {
  SECTION("sector matrices carry sin/cos of the half-angle") {
    const auto d = continuous_pq(0.5);
    const double s = std::sin(M_PI * 0.25);
    const double c = std::cos(M_PI * 0.25);
    CHECK(d.kind == RegionKind::Sector);
    CHECK(d.nu == 0.5);
    CHECK(d.p(0, 0) == Complex(0, 0));
    CHECK_THAT(std::abs(d.p(0, 1) - Complex(s, -c)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(d.p(1, 0) - Complex(s, c)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(d.q(0, 1) - Complex(s, c)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(d.q(1, 0) - Complex(s, -c)), WithinAbs(0.0, 1e-15));
    CHECK((d.p - d.p.adjoint().eval()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.q - d.q.adjoint().eval()).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("sector rejects bad orders") {
    CHECK_THROWS_AS(continuous_pq(0.0), std::invalid_argument);
    CHECK_THROWS_AS(continuous_pq(1.1), std::invalid_argument);
    CHECK_THROWS_AS(continuous_pq(-1.0), std::invalid_argument);
  }
  SECTION("disk exterior is diag(1,-1) and zero") {
    const auto d = discrete_pq();
    CHECK(d.kind == RegionKind::DiskExterior);
    CHECK(d.p(0, 0) == Complex(1, 0));
    CHECK(d.p(1, 1) == Complex(-1, 0));
    CHECK(d.p(0, 1) == Complex(0, 0));
    CHECK(d.q.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("model regions follow the coordinate split") {
    const auto d = region_for_model(example1());
    REQUIRE(d.pairs.size() == 2);
    CHECK(d.pairs[0].kind == RegionKind::Sector);
    CHECK(d.pairs[0].nu == 0.5);
    CHECK(d.pairs[1].kind == RegionKind::DiskExterior);

    const auto dc = region_for_model(continuous_pair());
    REQUIRE(dc.pairs.size() == 2);
    CHECK(dc.pairs[0].kind == RegionKind::Sector);
    CHECK(dc.pairs[1].kind == RegionKind::Sector);
  }
}

TEST_CASE("quadratic form") {
  SECTION("rejects non-Hermitian input") {
    Eigen::Matrix2cd x;
    x << Complex(0, 1), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    CHECK_THROWS_AS(f_quadratic(x, Complex(1, 0)), std::invalid_argument);
    x << Complex(0, 0), Complex(1, 2), Complex(1, 2), Complex(0, 0);
    CHECK_THROWS_AS(f_quadratic(x, Complex(1, 0)), std::invalid_argument);
  }
  SECTION("identity gives |s|^2 + 1") {
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    CHECK_THAT(f_quadratic(id, Complex(3, 4)), WithinRel(26.0, 1e-14));
  }
  SECTION("disk-exterior form is |s|^2 - 1") {
    const auto d = discrete_pq();
    CHECK_THAT(f_quadratic(d.p, Complex(0, 2)), WithinRel(3.0, 1e-14));
    CHECK_THAT(f_quadratic(d.p, Complex(1, 0)), WithinAbs(0.0, 1e-14));
    CHECK_THAT(f_quadratic(d.p, Complex(0.5, 0)), WithinRel(-0.75, 1e-14));
    CHECK(f_quadratic(d.q, Complex(5, -7)) == 0.0);
  }
}

TEST_CASE("sector forms match their closed-form values") {
  // For s = m e^{j phi}: F_P = 2 m sin(pi nu/2 - phi), F_Q = 2 m sin(pi nu/2 + phi).
  const std::vector<double> orders = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> umod(0.0, 10.0);
  std::uniform_real_distribution<double> uphi(-M_PI, M_PI);
  for (const double nu : orders) {
    const auto d = continuous_pq(nu);
    const double half = M_PI * nu / 2.0;
    for (int t = 0; t < 1700; ++t) {
      const double m = umod(rng);
      const double phi = uphi(rng);
      const Complex s = std::polar(m, phi);
      const double scale = 1.0 + m;
      CHECK_THAT(f_quadratic(d.p, s),
                 WithinAbs(2.0 * m * std::sin(half - phi), 1e-12 * scale));
      CHECK_THAT(f_quadratic(d.q, s),
                 WithinAbs(2.0 * m * std::sin(half + phi), 1e-12 * scale));
    }
  }
}

TEST_CASE("membership") {
  const auto sector = continuous_pq(0.5);
  RegionDescriptor one_sector{{sector}};
  RegionDescriptor one_disk{{discrete_pq()}};

  SECTION("sector membership by angle") {
    // nu = 0.5 means the closed sector |arg(s)| <= pi/4.
    CHECK(in_region(one_sector, {std::polar(1.0, 0.0)}));
    CHECK(in_region(one_sector, {std::polar(2.0, M_PI / 4.0)}));
    CHECK(in_region(one_sector, {std::polar(2.0, -M_PI / 4.0)}));
    CHECK_FALSE(in_region(one_sector, {std::polar(2.0, M_PI / 4.0 + 1e-3)}));
    CHECK_FALSE(in_region(one_sector, {std::polar(1.0, M_PI)}));
    CHECK_FALSE(in_region(one_sector, {Complex(-1.0, 0.0)}));
  }
  SECTION("origin is in every closed sector") {
    for (const double nu : {0.1, 0.5, 1.0})
      CHECK(in_region(RegionDescriptor{{continuous_pq(nu)}}, {Complex(0, 0)}));
  }
  SECTION("disk exterior membership by modulus") {
    CHECK(in_region(one_disk, {Complex(1.0, 0.0)}));
    CHECK(in_region(one_disk, {Complex(0.0, -1.0)}));
    CHECK(in_region(one_disk, {Complex(3.0, 4.0)}));
    CHECK_FALSE(in_region(one_disk, {Complex(0.5, 0.5)}));
    CHECK_FALSE(in_region(one_disk, {Complex(0.0, 0.0)}));
  }
  SECTION("all coordinates must pass") {
    const auto d = region_for_model(example1());
    CHECK(in_region(d, {Complex(1.0, 0.0), Complex(2.0, 0.0)}));
    CHECK_FALSE(in_region(d, {Complex(-1.0, 0.0), Complex(2.0, 0.0)}));
    CHECK_FALSE(in_region(d, {Complex(1.0, 0.0), Complex(0.0, 0.0)}));
  }
  SECTION("closed-set tolerance scales with the squared magnitude") {
    // A point just outside the unit circle boundary at large radius should
    // still pass, because the threshold grows like |rho|^2.
    const double big = 1e6;
    const Complex just_inside(big * (1.0 - 1e-14), 0.0);
    CHECK(in_region(one_disk, {just_inside}));
    // With tol = 0 the closed interpretation still accepts the boundary.
    CHECK(in_region(one_disk, {Complex(1.0, 0.0)}, 0.0));
    CHECK_THROWS_AS(in_region(one_disk, {Complex(1.0, 0.0)}, -1.0),
                    std::invalid_argument);
  }
  SECTION("arity mismatch throws") {
    CHECK_THROWS_AS(in_region(one_disk, {Complex(1, 0), Complex(1, 0)}),
                    std::invalid_argument);
  }
}
