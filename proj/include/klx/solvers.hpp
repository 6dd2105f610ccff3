#pragma once

#include <Eigen/Core>

#include "klx/dc.hpp"
#include "klx/problem.hpp"
#include "klx/trace.hpp"

namespace klx::solvers {

struct SolveOpts {
  double step = 0.0;          ///< 0 = 0.99/L (backtracking when L unknown)
  bool backtracking = false;  ///< force backtracking line search
  int max_iter = 10000;
  double tol = 1e-10;
};

/// x_{k+1} = prox_{gamma g}(x_k - gamma grad h(x_k)); stops when the
/// stationarity residual drops below tol. Backtracking halves the step
/// until f(x+) <= f(x) - 1e-4 ||x+ - x||^2 / gamma.
IterateTrace prox_gradient(const ProblemInstance& inst, Eigen::VectorXd x0,
                           const SolveOpts& opts);

struct RefSolution {
  Eigen::VectorXd x;
  double value = 0.0;
  bool tol_reached = false;
};

/// High-accuracy solve: prox gradient with tol 1e-13 and up to 1e6
/// iterations, then one extra refinement step keeping the better value.
RefSolution reference_solve(const ProblemInstance& inst, const Eigen::VectorXd& x0);

/// Iterative hard thresholding for 0.5||A vec(X) - b||^2 with rank(X) <= k:
/// gradient step followed by truncation to the top k singular values,
/// step 0.99/L.
IterateTrace iht_rank(const Eigen::MatrixXd& amap, const Eigen::VectorXd& b, int k,
                      Eigen::MatrixXd x0, const SolveOpts& opts);

/// Rank-k truncation via SVD (descending singular values).
Eigen::MatrixXd truncate_rank(const Eigen::MatrixXd& x, int k);

/// DCA on P1(x) - P2(Ax): y_k is the min-norm subgradient of P2 at A x_k,
/// x_{k+1} minimizes the partial majorant by an inner prox-gradient solve to
/// 1e-10. Trace values are the joint majorant values F(x_k, y_k); the trace
/// residual is the iterate change ||x_{k+1}-x_k|| / step.
IterateTrace dca(const dc::DcModel& model, Eigen::VectorXd x0, const SolveOpts& opts);

}  // namespace klx::solvers
