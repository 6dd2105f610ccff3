#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace klx::lagrangian {

/// Deterministic multiplier of the equality-constrained stationarity system:
/// the unique minimizer of lambda -> ||grad_h + J lambda|| when J (columns =
/// constraint gradients) is injective. Throws when the Gram matrix has an
/// eigenvalue at or below 1e-10. Optionally reports the attained norm.
Eigen::VectorXd multiplier(const Eigen::VectorXd& grad_h, const Eigen::MatrixXd& jac,
                           double* attained_norm = nullptr);

/// tau(m, n, k) = mn + m(m-k) + n(m-k) - 1, the ambient polynomial dimension
/// of the penalized rank lift. Requires 1 <= k <= min(m,n)-1.
long long tau(int m, int n, int k);

/// Certified exponent 1 - 1/(4*9^tau) as an exact rational (decimal strings;
/// 9^tau overflows doubles long before tau gets interesting) plus a float.
struct RationalExponent {
  std::string numerator;    ///< 4*9^tau - 1
  std::string denominator;  ///< 4*9^tau
  double value = 1.0;       ///< rounds to 1.0 for tau >= 17
  long long tau_value = 0;
};

RationalExponent rank_exponent(int m, int n, int k);

/// Orthonormal basis of the null space of X^T taken from the trailing left
/// singular directions (deterministic SVD ordering and sign convention);
/// rank(X) must be <= k at the relative 1e-10 threshold. X = 0 maps to the
/// first m-k columns of the identity.
Eigen::MatrixXd complete_u(const Eigen::MatrixXd& x, int k);

struct RankLift {
  Eigen::MatrixXd x;
  Eigen::MatrixXd u;  ///< m x (m-k)
  int k = 0;
};

/// Feasibility of the hard lift: ||U^T X|| <= tol and ||U^T U - I|| <= tol.
bool rank_lift_feasible(const RankLift& lift, double tol = 1e-9);

/// Penalized lift value: 0.5||A vec(X) - b||^2 + 0.5||U^T U - I||_F^2 when
/// U^T X = 0 (to 1e-9) and 0.5 I <= U^T U <= 2 I; +inf otherwise.
double lifted_rank_value(const RankLift& lift, const Eigen::MatrixXd& amap,
                         const Eigen::VectorXd& b);

}  // namespace klx::lagrangian
