#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fracnd/model.hpp"
#include "fracnd/region.hpp"

/// Independent evidence generators: a time-domain simulator for the 1+1
/// coordinate case and a characteristic-function scan over the region.
/// Both are deliberately decoupled from the certificate machinery so that
/// their verdicts can contradict it.

namespace fracnd {

/// Grunwald-Letnikov weights w_0..w_{count-1} for order nu:
///   w_0 = 1,  w_i = w_{i-1} * (1 - (nu + 1) / i).
/// These are the coefficients of (1 - z)^nu; they sum to zero in the limit
/// and decay like i^{-(nu+1)}.
inline std::vector<double> gl_weights(double nu, int count) {
  if (!(nu > 0.0) || !(nu <= 1.0) || !std::isfinite(nu))
    throw std::invalid_argument("nu: must satisfy 0 < nu <= 1");
  if (count < 1) throw std::invalid_argument("count: must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(count));
  w[0] = 1.0;
  for (int i = 1; i < count; ++i)
    w[i] = w[i - 1] * (1.0 - (nu + 1.0) / i);
  return w;
}

/// Time/shift grid and boundary data for the simulator. Time samples are
/// t_m = m h for m = 0..steps_t-1; the shift coordinate runs j = 0..steps_j-1.
struct SimulationGrid {
  double h = 0.05;
  int steps_t = 400;
  int steps_j = 20;
  /// x1 at t = 0, one row per j (steps_j x n1).
  Eigen::MatrixXd x1_boundary;
  /// x2 at j = 0, one row per m (steps_t x n2).
  Eigen::MatrixXd x2_boundary;
};

/// Dense simulated state, indexed by (m, j).
class Trajectory {
 public:
  Trajectory(int steps_t, int steps_j, int n1, int n2)
      : steps_t_(steps_t),
        steps_j_(steps_j),
        n1_(n1),
        n2_(n2),
        data_(static_cast<std::size_t>(steps_t) * steps_j * (n1 + n2), 0.0) {}

  int steps_t() const { return steps_t_; }
  int steps_j() const { return steps_j_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }

  Eigen::Map<Eigen::VectorXd> state(int m, int j) {
    return {data_.data() + index(m, j), n1_ + n2_};
  }
  Eigen::Map<const Eigen::VectorXd> state(int m, int j) const {
    return {data_.data() + index(m, j), n1_ + n2_};
  }
  Eigen::Map<Eigen::VectorXd> x1(int m, int j) {
    return {data_.data() + index(m, j), n1_};
  }
  Eigen::Map<const Eigen::VectorXd> x1(int m, int j) const {
    return {data_.data() + index(m, j), n1_};
  }
  Eigen::Map<Eigen::VectorXd> x2(int m, int j) {
    return {data_.data() + index(m, j) + n1_, n2_};
  }
  Eigen::Map<const Eigen::VectorXd> x2(int m, int j) const {
    return {data_.data() + index(m, j) + n1_, n2_};
  }

  /// Largest state magnitude over time rows m_begin..m_end-1, all j.
  double peak(int m_begin, int m_end) const {
    if (m_begin < 0 || m_end > steps_t_ || m_begin >= m_end)
      throw std::out_of_range("peak: row range out of bounds");
    double p = 0.0;
    for (int m = m_begin; m < m_end; ++m)
      for (int j = 0; j < steps_j_; ++j)
        p = std::max(p, state(m, j).cwiseAbs().maxCoeff());
    return p;
  }

 private:
  std::size_t index(int m, int j) const {
    if (m < 0 || m >= steps_t_ || j < 0 || j >= steps_j_)
      throw std::out_of_range("trajectory index out of bounds");
    return (static_cast<std::size_t>(m) * steps_j_ + j) *
           static_cast<std::size_t>(n1_ + n2_);
  }

  int steps_t_, steps_j_, n1_, n2_;
  std::vector<double> data_;
};

/// Simulates a model with exactly one continuous and one discrete
/// coordinate (r = 1, k = 2).
///
/// The fractional derivative is discretized by Grunwald-Letnikov weights
/// applied to the shifted history x1(t_i, j) - x1(0, j), which realizes the
/// initial-value convention of the Caputo derivative. Each time step solves
/// the implicit system
///   (h^{-nu} I - A11) x1(t_m, j) = A12 x2(t_m, j) + h^{-nu} x1(0, j)
///                                  - h^{-nu} sum_{i=1..m} w_i (x1(t_{m-i}, j) - x1(0, j))
/// while the discrete coordinate advances by
///   x2(t, j+1) = A21 x1(t, j) + A22 x2(t, j)
/// with x2(t_m, 0) prescribed by the grid for every m.
inline Trajectory simulate_1p1(const HybridRoesserModel& m,
                               const SimulationGrid& g) {
  validate_model(m);
  if (m.r != 1 || m.k() != 2)
    throw std::invalid_argument(
        "model: the simulator supports exactly one continuous and one "
        "discrete coordinate");
  if (!(g.h > 0.0) || !std::isfinite(g.h))
    throw std::invalid_argument("h: must be positive and finite");
  if (g.steps_t < 1 || g.steps_j < 1)
    throw std::invalid_argument("steps: must be >= 1");
  const int n1 = m.dims[0];
  const int n2 = m.dims[1];
  if (g.x1_boundary.rows() != g.steps_j || g.x1_boundary.cols() != n1)
    throw std::invalid_argument("x1_boundary: must be steps_j x n1");
  if (g.x2_boundary.rows() != g.steps_t || g.x2_boundary.cols() != n2)
    throw std::invalid_argument("x2_boundary: must be steps_t x n2");
  if (!g.x1_boundary.allFinite() || !g.x2_boundary.allFinite())
    throw std::invalid_argument("boundary data must be finite");

  const Eigen::MatrixXd a11 = m.block(0, 0);
  const Eigen::MatrixXd a12 = m.block(0, 1);
  const Eigen::MatrixXd a21 = m.block(1, 0);
  const Eigen::MatrixXd a22 = m.block(1, 1);

  const double hn = std::pow(g.h, -m.nu);
  Eigen::MatrixXd step = -a11;
  step.diagonal().array() += hn;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(step);
  const double dmax = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
  const double dmin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (dmax <= 0.0 || dmin / dmax < 1e-12)
    throw SingularAtPoint(
        "implicit step matrix h^{-nu} I - A11 is numerically singular "
        "(first time step); choose a different step size");

  const std::vector<double> w = gl_weights(m.nu, g.steps_t);
  Trajectory traj(g.steps_t, g.steps_j, n1, n2);

  for (int j = 0; j < g.steps_j; ++j)
    traj.x1(0, j) = g.x1_boundary.row(j).transpose();
  traj.x2(0, 0) = g.x2_boundary.row(0).transpose();
  for (int j = 0; j + 1 < g.steps_j; ++j)
    traj.x2(0, j + 1) = a21 * traj.x1(0, j) + a22 * traj.x2(0, j);

  Eigen::VectorXd history(n1);
  for (int mrow = 1; mrow < g.steps_t; ++mrow) {
    for (int j = 0; j < g.steps_j; ++j) {
      if (j == 0)
        traj.x2(mrow, 0) = g.x2_boundary.row(mrow).transpose();
      else
        traj.x2(mrow, j) = a21 * traj.x1(mrow, j - 1) + a22 * traj.x2(mrow, j - 1);

      history.setZero();
      const Eigen::VectorXd x10 = traj.x1(0, j);
      for (int i = 1; i <= mrow; ++i)
        history += w[static_cast<std::size_t>(i)] *
                   (traj.x1(mrow - i, j) - x10).eval();
      const Eigen::VectorXd rhs =
          a12 * traj.x2(mrow, j) + hn * x10 - hn * history;
      traj.x1(mrow, j) = lu.solve(rhs);
    }
  }
  return traj;
}

struct DecayReport {
  bool decayed = false;
  /// Largest state magnitude over the leading tail_fraction of time rows.
  double head_peak = 0.0;
  /// Largest state magnitude over the trailing tail_fraction of time rows.
  double tail_peak = 0.0;
};

/// Compares the trailing window of a trajectory against its leading window:
/// decayed iff tail_peak <= ratio * head_peak. Both peaks are reported so a
/// failed check still shows how far the state actually fell.
inline DecayReport decay_check(const Trajectory& traj, double tail_fraction,
                               double ratio) {
  if (!(tail_fraction > 0.0) || !(tail_fraction <= 0.5))
    throw std::invalid_argument("tail_fraction: must lie in (0, 0.5]");
  if (!(ratio >= 0.0) || !std::isfinite(ratio))
    throw std::invalid_argument("ratio: must be finite and >= 0");
  const int window =
      static_cast<int>(std::floor(tail_fraction * traj.steps_t()));
  if (window < 1 || 2 * window > traj.steps_t())
    throw std::invalid_argument(
        "trajectory too short for the requested tail fraction");
  DecayReport rep;
  rep.head_peak = traj.peak(0, window);
  rep.tail_peak = traj.peak(traj.steps_t() - window, traj.steps_t());
  rep.decayed = rep.tail_peak <= ratio * rep.head_peak;
  return rep;
}

/// Writes a trajectory as CSV: one row per (m, j) with the time value,
/// shift index and all state components.
inline void write_csv(const Trajectory& traj, double h, std::ostream& os) {
  os << "t,j";
  for (int c = 0; c < traj.n1(); ++c) os << ",x1_" << c;
  for (int c = 0; c < traj.n2(); ++c) os << ",x2_" << c;
  os << "\n";
  const auto old_precision = os.precision(17);
  for (int m = 0; m < traj.steps_t(); ++m)
    for (int j = 0; j < traj.steps_j(); ++j) {
      os << m * h << "," << j;
      const auto s = traj.state(m, j);
      for (int c = 0; c < s.size(); ++c) os << "," << s(c);
      os << "\n";
    }
  os.precision(old_precision);
}

/// Controls for region sampling. radius_cap bounds the sampled moduli and
/// must be chosen by the caller; default_radius_cap gives the model-scaled
/// choice 2 * (1 + max_row_sum(A)), comfortably past every attainable zero.
struct ScanConfig {
  int samples_per_dim = 100;
  double radius_cap = 0.0;
  /// Share of each coordinate's samples placed exactly on the region
  /// boundary, where zeros of marginally stable models live.
  double boundary_fraction = 0.5;
  std::uint64_t seed = 12345;
  /// Hard cap on the size of the combined point set; larger Cartesian
  /// products are subsampled at random.
  std::size_t max_total = 2000000;
};

inline double default_radius_cap(const HybridRoesserModel& m) {
  return 2.0 * (1.0 + max_row_sum(m.a));
}

/// Scale-aware cutoff under which a scanned |Delta| counts as a zero hit:
/// 1e-9 * (1 + max_row_sum(A)^n).
inline double falsification_threshold(const HybridRoesserModel& m) {
  return 1e-9 * (1.0 + std::pow(max_row_sum(m.a), m.n()));
}

namespace detail {

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(hi);
    return out;
  }
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    out.push_back(std::exp(llo + (lhi - llo) * i / (count - 1)));
  return out;
}

}  // namespace detail

/// Deterministic point cloud covering a region. Each coordinate draws
/// samples_per_dim values: a boundary share placed exactly on the region
/// edge (sector rays at +-pi*nu/2 with log-spaced moduli; unit-circle
/// angles 2 pi q / n_b starting at angle zero, so +1 is always hit) and an
/// interior share with log-spaced moduli and seeded random angles. The
/// coordinates are then combined as a full Cartesian product, subsampled
/// when it would exceed max_total.
inline std::vector<ComplexPoint> sample_region(const RegionDescriptor& d,
                                               const ScanConfig& cfg) {
  if (cfg.samples_per_dim < 2)
    throw std::invalid_argument("samples_per_dim: must be >= 2");
  if (!(cfg.radius_cap > 1.0))
    throw std::invalid_argument(
        "radius_cap: must exceed 1 (the unit circle must be coverable)");
  if (!(cfg.boundary_fraction >= 0.0) || !(cfg.boundary_fraction <= 1.0))
    throw std::invalid_argument("boundary_fraction: must lie in [0, 1]");
  if (cfg.max_total < 1)
    throw std::invalid_argument("max_total: must be >= 1");

  std::mt19937_64 rng(cfg.seed);
  // Uniform [0, 1) built directly from generator bits; unlike
  // std::uniform_real_distribution this yields the same sequence on every
  // standard library, keeping sampled point sets reproducible everywhere.
  const auto unit = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };

  std::vector<std::vector<Complex>> per_dim;
  per_dim.reserve(d.pairs.size());
  for (const auto& pq : d.pairs) {
    std::vector<Complex> vals;
    vals.reserve(static_cast<std::size_t>(cfg.samples_per_dim));
    const int nb = static_cast<int>(
        std::lround(cfg.boundary_fraction * cfg.samples_per_dim));
    const int ni = cfg.samples_per_dim - nb;
    if (pq.kind == RegionKind::Sector) {
      const double theta = M_PI * pq.nu / 2.0;
      if (nb > 0) {
        const auto moduli =
            detail::log_spaced(cfg.radius_cap * 1e-4, cfg.radius_cap,
                               (nb + 1) / 2);
        for (int q = 0; q < nb; ++q) {
          const double ang = (q % 2 == 0) ? theta : -theta;
          const double mod = moduli[static_cast<std::size_t>(q / 2)];
          vals.push_back(std::polar(mod, ang));
        }
      }
      if (ni > 0) {
        const auto moduli =
            detail::log_spaced(cfg.radius_cap * 1e-4, cfg.radius_cap, ni);
        for (int t = 0; t < ni; ++t) {
          const double ang = (2.0 * unit() - 1.0) * theta;
          vals.push_back(std::polar(moduli[static_cast<std::size_t>(t)], ang));
        }
      }
    } else {
      if (nb > 0)
        for (int q = 0; q < nb; ++q)
          vals.push_back(std::polar(1.0, 2.0 * M_PI * q / nb));
      if (ni > 0) {
        const auto moduli = detail::log_spaced(1.0, cfg.radius_cap, ni);
        for (int t = 0; t < ni; ++t) {
          const double ang = (2.0 * unit() - 1.0) * M_PI;
          vals.push_back(std::polar(moduli[static_cast<std::size_t>(t)], ang));
        }
      }
    }
    per_dim.push_back(std::move(vals));
  }

  const std::size_t k = per_dim.size();
  double total_d = 1.0;
  for (const auto& v : per_dim) total_d *= static_cast<double>(v.size());

  std::vector<ComplexPoint> points;
  if (total_d <= static_cast<double>(cfg.max_total)) {
    const std::size_t total = static_cast<std::size_t>(total_d);
    points.reserve(total);
    std::vector<std::size_t> idx(k, 0);
    for (std::size_t t = 0; t < total; ++t) {
      ComplexPoint p(k);
      for (std::size_t i = 0; i < k; ++i) p[i] = per_dim[i][idx[i]];
      points.push_back(std::move(p));
      for (std::size_t i = k; i-- > 0;) {
        if (++idx[i] < per_dim[i].size()) break;
        idx[i] = 0;
      }
    }
  } else {
    points.reserve(cfg.max_total);
    for (std::size_t t = 0; t < cfg.max_total; ++t) {
      ComplexPoint p(k);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pick = static_cast<std::size_t>(
            unit() * static_cast<double>(per_dim[i].size()));
        p[i] = per_dim[i][std::min(pick, per_dim[i].size() - 1)];
      }
      points.push_back(std::move(p));
    }
  }
  return points;
}

struct ScanResult {
  double min_abs_delta = 0.0;
  ComplexPoint argmin;
  std::size_t evaluated = 0;
};

/// Evaluates |Delta| over a point set and reports the smallest value with
/// its location. Deterministic for any jobs count: ties and chunk merges
/// resolve by smallest point index.
inline ScanResult det_scan(const HybridRoesserModel& m,
                           const std::vector<ComplexPoint>& points,
                           int jobs = 1) {
  validate_model(m);
  if (points.empty())
    throw std::invalid_argument("points: must be non-empty");
  jobs = std::clamp(jobs, 1, 256);
  jobs = std::min<int>(jobs, static_cast<int>(points.size()));

  struct Best {
    double val = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
  };
  auto scan_chunk = [&m, &points](std::size_t lo, std::size_t hi) {
    Best b;
    for (std::size_t t = lo; t < hi; ++t) {
      const double v = std::abs(delta(m, points[t]));
      if (v < b.val || (v == b.val && t < b.idx)) {
        b.val = v;
        b.idx = t;
      }
    }
    return b;
  };

  Best best;
  if (jobs == 1) {
    best = scan_chunk(0, points.size());
  } else {
    std::vector<Best> partial(static_cast<std::size_t>(jobs));
    std::vector<std::thread> workers;
    const std::size_t chunk = (points.size() + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * chunk;
      const std::size_t hi = std::min(points.size(), lo + chunk);
      workers.emplace_back(
          [&partial, &scan_chunk, w, lo, hi] { partial[w] = scan_chunk(lo, hi); });
    }
    for (auto& t : workers) t.join();
    for (const auto& b : partial)
      if (b.val < best.val || (b.val == best.val && b.idx < best.idx)) best = b;
  }

  ScanResult res;
  res.min_abs_delta = best.val;
  res.argmin = points[best.idx];
  res.evaluated = points.size();
  return res;
}

}  // namespace fracnd
