#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace klx {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Smooth part h of a composite objective f = h + g. A null gradient means
/// the instance has no smooth part. `lipschitz == 0` means unknown (solvers
/// fall back to backtracking).
struct SmoothOracle {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd()> hessian;  ///< optional, constant-Hessian models only
  double lipschitz = 0.0;
};

/// Nonsmooth part g. `prox(x, step)` minimizes g(y) + ||y - x||^2 / (2 step).
/// `subgrad_dist(x, w)` returns min over xi in the subdifferential of g at x
/// of ||w + xi|| (set only when a closed form exists); +inf signals an empty
/// subdifferential.
struct NonsmoothOracle {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> prox;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> subgrad_dist;
};

struct ModelMeta {
  std::string name;
  std::optional<double> certified_exponent;  ///< present only when certified
  std::string certification;  ///< hypothesis under which the exponent holds
  bool convex = true;
};

/// One composite objective with value/gradient/prox oracles. Oracles are
/// immutable after construction and safe to evaluate concurrently.
struct ProblemInstance {
  Eigen::Index dim = 0;
  SmoothOracle smooth;
  NonsmoothOracle nonsmooth;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> domain_project;
  /// For max-of-pieces objectives: values of all pieces at x. Lets the
  /// sampler locate tie manifolds, where the subdifferential is widest.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> piece_values;
  ModelMeta meta;
  bool bounded_below = true;

  bool has_smooth() const { return static_cast<bool>(smooth.gradient); }
  bool has_prox() const { return static_cast<bool>(nonsmooth.prox); }
  bool has_subgrad_dist() const { return static_cast<bool>(nonsmooth.subgrad_dist); }

  double value(const Eigen::VectorXd& x) const {
    double v = 0.0;
    if (smooth.value) v += smooth.value(x);
    if (nonsmooth.value) v += nonsmooth.value(x);
    return v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    if (smooth.gradient) return smooth.gradient(x);
    return Eigen::VectorXd::Zero(x.size());
  }

  double nonsmooth_value(const Eigen::VectorXd& x) const {
    return nonsmooth.value ? nonsmooth.value(x) : 0.0;
  }
};

}  // namespace klx
