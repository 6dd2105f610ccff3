#include "klx/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "klx/linalg.hpp"
#include "klx/problem.hpp"

namespace klx::lagrangian {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::VectorXd multiplier(const VectorXd& grad_h, const MatrixXd& jac,
                           double* attained_norm) {
  if (jac.rows() != grad_h.size())
    throw std::invalid_argument("multiplier: dimension mismatch");
  const MatrixXd gram = jac.transpose() * jac;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  if (es.eigenvalues().minCoeff() <= 1e-10)
    throw std::invalid_argument(
        "multiplier: constraint gradients are not injective (degenerate constraint)");
  const VectorXd lam = es.eigenvectors() *
                       (es.eigenvectors().transpose() * (-jac.transpose() * grad_h))
                           .cwiseQuotient(es.eigenvalues());
  if (attained_norm) *attained_norm = (grad_h + jac * lam).norm();
  return lam;
}

long long tau(int m, int n, int k) {
  if (k < 1 || k > std::min(m, n) - 1)
    throw std::invalid_argument("tau: k must lie between 1 and min(m,n)-1");
  const long long mm = m, nn = n, kk = k;
  return mm * nn + mm * (mm - kk) + nn * (mm - kk) - 1;
}

namespace {

// Unsigned big integer, base 1e9 limbs, little-endian. Only what the exact
// exponent needs: multiply by a small scalar, subtract one, print.
struct BigUint {
  std::vector<std::uint32_t> limbs{1u};
  static constexpr std::uint64_t kBase = 1000000000ull;

  void mul_small(std::uint32_t f) {
    std::uint64_t carry = 0;
    for (auto& l : limbs) {
      const std::uint64_t cur = static_cast<std::uint64_t>(l) * f + carry;
      l = static_cast<std::uint32_t>(cur % kBase);
      carry = cur / kBase;
    }
    while (carry) {
      limbs.push_back(static_cast<std::uint32_t>(carry % kBase));
      carry /= kBase;
    }
  }

  void sub_one() {
    for (auto& l : limbs) {
      if (l > 0) {
        --l;
        break;
      }
      l = static_cast<std::uint32_t>(kBase - 1);
    }
    while (limbs.size() > 1 && limbs.back() == 0) limbs.pop_back();
  }

  std::string str() const {
    std::string out = std::to_string(limbs.back());
    for (auto it = limbs.rbegin() + 1; it != limbs.rend(); ++it) {
      std::string part = std::to_string(*it);
      out += std::string(9 - part.size(), '0') + part;
    }
    return out;
  }
};

}  // namespace

RationalExponent rank_exponent(int m, int n, int k) {
  RationalExponent out;
  out.tau_value = tau(m, n, k);
  BigUint den;
  for (long long i = 0; i < out.tau_value; ++i) den.mul_small(9);
  den.mul_small(4);
  out.denominator = den.str();
  BigUint num = den;
  num.sub_one();
  out.numerator = num.str();
  const double d = 4.0 * std::pow(9.0, static_cast<double>(out.tau_value));
  out.value = std::isfinite(d) ? 1.0 - 1.0 / d : 1.0;
  return out;
}

MatrixXd complete_u(const MatrixXd& x, int k) {
  const int m = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  if (k < 1 || k > std::min(m, n) - 1)
    throw std::invalid_argument("complete_u: k must lie between 1 and min(m,n)-1");
  if (x.norm() == 0.0) return MatrixXd::Identity(m, m).leftCols(m - k);
  const linalg::Svd s = linalg::svd(x);
  const double cutoff = linalg::kRankThreshold * s.singular_values[0];
  int rank = 0;
  for (Index i = 0; i < s.singular_values.size(); ++i)
    if (s.singular_values[i] > cutoff) ++rank;
  if (rank > k)
    throw std::invalid_argument("complete_u: rank(X) exceeds k, lift infeasible");
  return s.u.rightCols(m - k);
}

bool rank_lift_feasible(const RankLift& lift, double tol) {
  const int mk = static_cast<int>(lift.u.cols());
  return (lift.u.transpose() * lift.x).norm() <= tol &&
         (lift.u.transpose() * lift.u - MatrixXd::Identity(mk, mk)).norm() <= tol;
}

double lifted_rank_value(const RankLift& lift, const MatrixXd& amap, const VectorXd& b) {
  const int mk = static_cast<int>(lift.u.cols());
  if ((lift.u.transpose() * lift.x).norm() > 1e-9) return kInf;
  const MatrixXd utu = lift.u.transpose() * lift.u;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(utu);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < 0.5 - 1e-9 || hi > 2.0 + 1e-9) return kInf;
  const VectorXd xv = Eigen::Map<const VectorXd>(lift.x.data(), lift.x.size());
  return 0.5 * (amap * xv - b).squaredNorm() +
         0.5 * (utu - MatrixXd::Identity(mk, mk)).squaredNorm();
}

}  // namespace klx::lagrangian
