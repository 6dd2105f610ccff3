#include "klx/solvers.hpp"

#include <cmath>
#include <stdexcept>

#include "klx/kl.hpp"
#include "klx/linalg.hpp"

namespace klx::solvers {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kSufficientDecrease = 1e-4;

VectorXd apply_prox(const ProblemInstance& inst, const VectorXd& v, double gamma) {
  return inst.has_prox() ? inst.nonsmooth.prox(v, gamma) : v;
}

}  // namespace

IterateTrace prox_gradient(const ProblemInstance& inst, VectorXd x0,
                           const SolveOpts& opts) {
  if (!inst.has_smooth())
    throw std::invalid_argument("prox_gradient: model has no smooth gradient");
  if (inst.nonsmooth.value && !inst.has_prox())
    throw std::invalid_argument("prox_gradient: model has a nonsmooth part but no prox");

  const bool backtrack =
      opts.backtracking || (opts.step <= 0.0 && inst.smooth.lipschitz <= 0.0);
  double gamma = opts.step > 0.0
                     ? opts.step
                     : (inst.smooth.lipschitz > 0.0 ? 0.99 / inst.smooth.lipschitz : 1.0);

  IterateTrace trace;
  VectorXd x = std::move(x0);
  double fx = inst.value(x);
  for (int it = 0; it < opts.max_iter; ++it) {
    const VectorXd grad = inst.gradient(x);
    VectorXd next = apply_prox(inst, x - gamma * grad, gamma);
    double fnext = inst.value(next);
    if (backtrack) {
      while (gamma > 1e-18 &&
             fnext > fx - kSufficientDecrease * (next - x).squaredNorm() / gamma) {
        gamma *= 0.5;
        next = apply_prox(inst, x - gamma * grad, gamma);
        fnext = inst.value(next);
      }
    }
    const double res = inst.has_subgrad_dist()
                           ? inst.nonsmooth.subgrad_dist(x, grad)
                           : (x - next).norm() / gamma;
    trace.points.push_back(x);
    trace.values.push_back(fx);
    trace.residuals.push_back(res);
    trace.steps.push_back(gamma);
    if (res <= opts.tol) {
      trace.termination = "tol";
      return trace;
    }
    x = std::move(next);
    fx = fnext;
  }
  trace.termination = "max_iter";
  return trace;
}

RefSolution reference_solve(const ProblemInstance& inst, const VectorXd& x0) {
  SolveOpts opts;
  opts.tol = 1e-13;
  opts.max_iter = 1000000;
  IterateTrace trace = prox_gradient(inst, x0, opts);
  RefSolution sol;
  sol.tol_reached = trace.termination == "tol";
  sol.x = trace.points.back();
  sol.value = trace.values.back();
  // One value refinement: a single extra step, keeping the better point.
  const double gamma = trace.steps.back();
  const VectorXd extra = apply_prox(inst, sol.x - gamma * inst.gradient(sol.x), gamma);
  const double fextra = inst.value(extra);
  if (fextra < sol.value) {
    sol.x = extra;
    sol.value = fextra;
  }
  return sol;
}

MatrixXd truncate_rank(const MatrixXd& x, int k) {
  const linalg::Svd s = linalg::svd(x);
  const Index kk = std::min<Index>(k, s.singular_values.size());
  return s.u.leftCols(kk) * s.singular_values.head(kk).asDiagonal() *
         s.v.leftCols(kk).transpose();
}

IterateTrace iht_rank(const MatrixXd& amap, const VectorXd& b, int k, MatrixXd x0,
                      const SolveOpts& opts) {
  const int m = static_cast<int>(x0.rows());
  const int n = static_cast<int>(x0.cols());
  if (k < 1 || k > std::min(m, n) - 1)
    throw std::invalid_argument("iht_rank: k must lie between 1 and min(m,n)-1");
  if (amap.cols() != static_cast<Index>(m) * n)
    throw std::invalid_argument("iht_rank: map columns must equal m*n");

  const double lip = linalg::spectral_norm_sq(amap);
  const double gamma = opts.step > 0.0 ? opts.step : 0.99 / lip;

  auto to_vec = [](const MatrixXd& mat) {
    return VectorXd(Eigen::Map<const VectorXd>(mat.data(), mat.size()));
  };

  IterateTrace trace;
  MatrixXd x = truncate_rank(x0, k);
  for (int it = 0; it < opts.max_iter; ++it) {
    const VectorXd r = amap * to_vec(x) - b;
    const VectorXd g = amap.transpose() * r;
    const MatrixXd next =
        truncate_rank(x - gamma * Eigen::Map<const MatrixXd>(g.data(), m, n), k);
    const double res = (next - x).norm() / gamma;
    trace.points.push_back(to_vec(x));
    trace.values.push_back(0.5 * r.squaredNorm());
    trace.residuals.push_back(res);
    trace.steps.push_back(gamma);
    if (res <= opts.tol) {
      trace.termination = "tol";
      return trace;
    }
    x = next;
  }
  trace.termination = "max_iter";
  return trace;
}

IterateTrace dca(const dc::DcModel& model, VectorXd x0, const SolveOpts& opts) {
  IterateTrace trace;
  VectorXd x = std::move(x0);
  const double step_scale =
      model.p1.smooth.lipschitz > 0.0 ? 0.99 / model.p1.smooth.lipschitz : 1.0;

  for (int it = 0; it < opts.max_iter; ++it) {
    const VectorXd y = dc::argmin_y(model, x);

    // Partial majorant in x: P1(x) - <A^T y, x>, same prox as P1.
    ProblemInstance sub = model.p1;
    const VectorXd lin = model.amap.transpose() * y;
    const SmoothOracle base = model.p1.smooth;
    sub.smooth.value = [base, lin](const VectorXd& z) { return base.value(z) - lin.dot(z); };
    sub.smooth.gradient = [base, lin](const VectorXd& z) {
      return VectorXd(base.gradient(z) - lin);
    };

    SolveOpts inner;
    inner.tol = 1e-10;
    inner.max_iter = 200000;
    const IterateTrace inner_trace = prox_gradient(sub, x, inner);
    const VectorXd x_next = inner_trace.points.back();

    trace.points.push_back(x);
    trace.values.push_back(dc::lifted_value(model, x, y));
    trace.residuals.push_back((x_next - x).norm() / step_scale);
    trace.steps.push_back(step_scale);

    if (inner_trace.termination != "tol") {
      trace.termination = "inner_solve_failed";
      return trace;
    }
    if ((x_next - x).norm() <= opts.tol * (1.0 + x.norm())) {
      trace.termination = "tol";
      return trace;
    }
    x = x_next;
  }
  trace.termination = "max_iter";
  return trace;
}

}  // namespace klx::solvers
