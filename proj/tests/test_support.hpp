#pragma once

/// Shared fixtures and oracles for the test suites.  Everything here is
/// deliberately independent of the library internals it is used to check:
/// the determinant oracle is cofactor expansion, the eigenvalue checks go
/// through Eigen directly, and the fixture matrices are written out
/// longhand.

#include <sys/wait.h>

#include <array>
#include <complex>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracnd/model.hpp"

namespace fracnd::test {

/// Cofactor-expansion determinant, O(n!).  Only sane for n <= 8, which is
/// all the suites need; the point is that it shares no code with the
/// LU-based evaluation under test.
inline Complex cofactor_det(const Eigen::MatrixXcd& m) {
  const auto n = m.rows();
  if (n != m.cols()) throw std::invalid_argument("cofactor_det: square only");
  if (n == 0) return Complex(1.0, 0.0);
  if (n == 1) return m(0, 0);
  Complex acc(0.0, 0.0);
  double sign = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXcd minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    }
    acc += sign * m(0, j) * cofactor_det(minor);
    sign = -sign;
  }
  return acc;
}

/// Mixed 2+2 benchmark system, nu = 1/2.
inline HybridRoesserModel example1() {
  HybridRoesserModel m;
  m.nu = 0.5;
  m.dims = {2, 2};
  m.r = 1;
  m.a.resize(4, 4);
  m.a << -0.8, 0.0, 0.5, 0.3,
          0.0, -1.2, 0.7, 0.2,
          0.4, 0.3, -0.3, 0.0,
          0.8, 0.9, 0.0, -0.6;
  return m;
}

/// Mixed 2+2 benchmark system, nu = 9/10.
inline HybridRoesserModel example2() {
  HybridRoesserModel m;
  m.nu = 0.9;
  m.dims = {2, 2};
  m.r = 1;
  m.a.resize(4, 4);
  m.a << -0.8, 0.5, 0.5, 0.6,
          0.3, -1.2, 0.7, 0.8,
          0.9, 0.1, -0.7, 0.0,
          0.2, 0.1, 0.0, -0.2;
  return m;
}

/// Scalar discrete system x(j+1) = a x(j); stable iff |a| < 1.
inline HybridRoesserModel scalar_discrete(double a, double nu = 0.5) {
  HybridRoesserModel m;
  m.nu = nu;
  m.dims = {1};
  m.r = 0;
  m.a.resize(1, 1);
  m.a << a;
  return m;
}

/// Scalar continuous system D^nu x = a x.
inline HybridRoesserModel scalar_continuous(double a, double nu) {
  HybridRoesserModel m;
  m.nu = nu;
  m.dims = {1};
  m.r = 1;
  m.a.resize(1, 1);
  m.a << a;
  return m;
}

/// Purely continuous 1+1 system with a stable A (diagonally dominant,
/// negative diagonal).
inline HybridRoesserModel continuous_pair() {
  HybridRoesserModel m;
  m.nu = 0.7;
  m.dims = {1, 1};
  m.r = 2;
  m.a.resize(2, 2);
  m.a << -1.0, 0.3,
          0.2, -0.8;
  return m;
}

/// Deterministic random Hermitian matrix with entries O(1).
inline Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXcd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(u(rng), u(rng));
  return 0.5 * (m + m.adjoint().eval());
}

/// Deterministic random Hermitian positive definite matrix.
inline Eigen::MatrixXcd random_hpd(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXcd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(u(rng), u(rng));
  return m * m.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(d, d);
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

/// Run a command line, capture stdout and the exit code.  stderr is
/// dropped so human summaries never pollute JSON parsing.
inline CliResult run_cli(const std::string& command) {
  CliResult result;
  const std::string full = command + " 2>/dev/null";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed: " + command);
  std::array<char, 4096> buffer{};
  size_t got = 0;
  while ((got = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    result.out.append(buffer.data(), got);
  const int status = ::pclose(pipe);
  if (status < 0) throw std::runtime_error("pclose failed: " + command);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace fracnd::test
