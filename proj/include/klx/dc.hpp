#pragma once

#include <Eigen/Core>

#include "klx/kl.hpp"
#include "klx/problem.hpp"

namespace klx::dc {

enum class P2Kind { L2, L1 };

/// Difference-of-convex structure f(x) = P1(x) - P2(A x), with P1 a
/// prox-capable composite and P2 restricted to nu*||.||_2 or nu*||.||_1
/// (exact conjugates: indicators of the dual-norm ball of radius nu).
struct DcModel {
  ProblemInstance p1;
  P2Kind p2_kind = P2Kind::L2;
  double nu = 1.0;
  Eigen::MatrixXd amap;
};

double p2_value(const DcModel& m, const Eigen::VectorXd& u);

/// Fenchel conjugate of P2: 0 inside the dual ball, +inf outside.
double p2_conjugate(const DcModel& m, const Eigen::VectorXd& y);

/// Minimum-norm element of the subdifferential of P2 at A x; this is also
/// the y-argmin of the majorant at x.
Eigen::VectorXd argmin_y(const DcModel& m, const Eigen::VectorXd& x);

double f_value(const DcModel& m, const Eigen::VectorXd& x);

/// Majorant F(x, y) = P1(x) - <A x, y> + P2*(y).
double lifted_value(const DcModel& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

Eigen::VectorXd project_dual_ball(const DcModel& m, Eigen::VectorXd y);

/// Minimum-norm subgradient distance of the majorant at (x, y).
double joint_residual(const DcModel& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Minimum-norm stationarity surrogate for f at x, selecting the min-norm
/// element of the subdifferential of P2 at kinks.
double f_residual(const DcModel& m, const Eigen::VectorXd& x);

/// Instance views used by the sampler: f as a function of x, and the
/// majorant as a function of the stacked variable (x; y) whose domain
/// projection pushes y back into the dual ball.
ProblemInstance f_instance(const DcModel& m);
ProblemInstance joint_instance(const DcModel& m);

struct TransferReport {
  kl::KLEstimate alpha_f;
  kl::KLEstimate alpha_joint;
  bool consistent = false;  ///< alpha_f <= alpha_joint + 0.05
};

/// Estimates the exponent of f around x_bar and of the majorant around
/// (x_bar, argmin_y(x_bar)). The inf-projection direction predicts
/// alpha(f) <= alpha(F) up to estimator tolerance.
TransferReport dc_transfer_experiment(const DcModel& m, const Eigen::VectorXd& x_bar,
                                      kl::SampleOpts opts);

/// P1 = 0.5||Ax-b||^2 + mu||x||_1, P2 = nu||.||_2, A-map identity.
DcModel make_l12(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double mu, double nu);

}  // namespace klx::dc
