// Test-side reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Cyclic Jacobi eigendecomposition for symmetric matrices: rotations until
/// the off-diagonal Frobenius norm falls below 1e-12 ||S||_F or 100 sweeps.
/// Returns (eigenvalues descending, orthogonal Q).
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigh(Eigen::MatrixXd s) {
  const Eigen::Index n = s.rows();
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  const double target = 1e-12 * s.norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += 2.0 * s(i, j) * s(i, j);
    if (std::sqrt(off) <= target) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index r = p + 1; r < n; ++r) {
        if (s(p, r) == 0.0) continue;
        const double theta = (s(r, r) - s(p, p)) / (2.0 * s(p, r));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double app = s(p, p) - t * s(p, r);
        const double arr = s(r, r) + t * s(p, r);
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == r) continue;
          const double akp = c * s(k, p) - sn * s(k, r);
          const double akr = sn * s(k, p) + c * s(k, r);
          s(k, p) = s(p, k) = akp;
          s(k, r) = s(r, k) = akr;
        }
        s(p, p) = app;
        s(r, r) = arr;
        s(p, r) = s(r, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double qkp = c * q(k, p) - sn * q(k, r);
          const double qkr = sn * q(k, p) + c * q(k, r);
          q(k, p) = qkp;
          q(k, r) = qkr;
        }
      }
    }
  }
  Eigen::VectorXd evals = s.diagonal();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return evals[a] > evals[b]; });
  Eigen::VectorXd sorted(n);
  Eigen::MatrixXd qs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sorted[i] = evals[order[static_cast<size_t>(i)]];
    qs.col(i) = q.col(order[static_cast<size_t>(i)]);
  }
  return {sorted, qs};
}

/// PSD projection through the test-side Jacobi eigendecomposition.
inline Eigen::MatrixXd project_psd_jacobi(const Eigen::MatrixXd& s) {
  auto [evals, q] = jacobi_eigh(0.5 * (s + s.transpose()));
  return q * evals.cwiseMax(0.0).asDiagonal() * q.transpose();
}

/// Brute-force minimizer of a univariate function on a grid.
inline double grid_min_1d(const std::function<double(double)>& f, double lo, double hi,
                          int steps) {
  double best_x = lo, best = f(lo);
  for (int i = 1; i <= steps; ++i) {
    const double x = lo + (hi - lo) * i / steps;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

/// Brute-force minimizer over a 2-D grid; returns the arg-min pair.
inline std::pair<double, double> grid_min_2d(
    const std::function<double(double, double)>& f, double lo, double hi, int steps) {
  double bx = lo, by = lo, best = f(lo, lo);
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      const double x = lo + (hi - lo) * i / steps;
      const double y = lo + (hi - lo) * j / steps;
      const double v = f(x, y);
      if (v < best) {
        best = v;
        bx = x;
        by = y;
      }
    }
  return {bx, by};
}

/// Scalar soft threshold, the closed-form 1-D Lasso solution map.
inline double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
