#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "klx/problem.hpp"

#include <json.hpp>

namespace klx::models {

using GroupList = std::vector<std::vector<int>>;

/// f(x) = 0.5||Ax-b||^2 + sum_i w_i ||x_{J_i}||. Non-overlapping groups get
/// a blockwise prox and a closed-form subgradient distance; overlapping
/// groups get value + smooth gradient only (see make_group_lasso_lifted).
ProblemInstance make_group_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                 const GroupList& groups, const Eigen::VectorXd& weights,
                                 bool overlapping);

/// Consensus lift of the overlapping group Lasso: one copy of x_{J_i} per
/// group, hard consensus between copies of a shared coordinate. The lifted
/// objective equals f on the consensus subspace and is +inf off it; the
/// (coupled) prox is computed by accelerated dual ascent on the consensus
/// multipliers, then the result is averaged exactly onto the subspace.
ProblemInstance make_group_lasso_lifted(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                        const GroupList& groups, const Eigen::VectorXd& weights);

/// Embeds x into the consensus subspace (one copy per group).
Eigen::VectorXd lift_group_copies(const GroupList& groups, const Eigen::VectorXd& x);

/// f(x) = 0.5||Ax-b||^2 + sum w_i||x_{J_i}|| + sum_{i>=2} nu_i||x_{J_i} - x_{J_{i-1}}||.
/// `partition` must be an equi-partition; `nu` has one entry per block and
/// entry 0 is ignored. Dimension capped at 64 (inner coupled prox).
ProblemInstance make_group_fused_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const GroupList& partition, const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& nu);

/// f(x) = 0.5||Ax-b||^2 + indicator of a product of second-order cones; the
/// last coordinate of each block is the cone's scalar part.
ProblemInstance make_soc_constrained_ls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                        const std::vector<int>& cone_dims);

/// f(X) = 0.5||A vec(X) - b||^2 + mu sum|X_ij| + nu ||X||_*, X in R^{m x n}
/// (column-major vec). The composite prox is an alternating-prox splitting
/// iterated to a 1e-8 fixed point, at most 50 rounds.
ProblemInstance make_ls_l1_nuclear(const Eigen::MatrixXd& amap, const Eigen::VectorXd& b,
                                   double mu, double nu, int m, int n);

/// f(x) = 0.5||Ax-b||^2 + <v,x> + p(x) with the entropy-like penalty
/// p(x) = sum x_i log x_i - (sum x_i) log(sum x_i) on the nonnegative
/// orthant (0 log 0 = 0). No prox; estimation samples radially around an
/// interior stationary point.
ProblemInstance make_entropy_regularized(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& v);

/// Entropy penalty value and interior gradient, exposed for oracles.
double entropy_penalty(const Eigen::VectorXd& x);
Eigen::VectorXd entropy_penalty_gradient(const Eigen::VectorXd& x);

/// f(X) = 0.5||A vec(X) - b||^2 + <V,X> + indicator(X psd), X in S^n.
ProblemInstance make_psd_constrained(const Eigen::MatrixXd& amap, const Eigen::VectorXd& b,
                                     const Eigen::MatrixXd& v, int n);

enum class SchattenP { One, Two, Inf };

/// f(X) = 0.5||A vec(X) - b||^2 + <V,X> + tau ||X||_p on S^n, p in {1,2,inf}
/// (the closed-form prox cases).
ProblemInstance make_schatten(const Eigen::MatrixXd& amap, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& v, double tau, SchattenP p, int n);

enum class PolyFixture { X4, MaxQuadratics };

/// Ground-truth fixtures: f(x) = x^4, and F = max{x1^2, (x1+1)^2 + x2^2 - 1}
/// with the exact minimum-norm subgradient of the max.
ProblemInstance make_poly_fixture(PolyFixture kind);

/// Blockwise group soft-threshold: prox of sum_i w_i ||.|| at v, step gamma.
Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double gamma,
                                     const GroupList& groups, const Eigen::VectorXd& weights);

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

/// Euclidean projection onto the l1 ball of the given radius.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

// ---------------------------------------------------------------------------
// Seeded instance generation. A JSON document {kind, seed, params} fully
// determines an instance; matrices are regenerated from the seed so fixtures
// stay tiny and bit-reproducible.

struct GeneratedInstance {
  ProblemInstance inst;
  Eigen::VectorXd x0;
  std::optional<Eigen::VectorXd> x_star;  ///< planted/known minimizer
  std::optional<double> f_star;
  std::string default_sampling = "trace";  ///< "trace" | "radial"
  double suggested_r0 = 1.0;
};

GeneratedInstance make_instance(const nlohmann::json& config);
nlohmann::json instance_config(const std::string& kind, std::uint64_t seed,
                               const nlohmann::json& params);

/// Rank-constrained least squares data (consumed by the rank solver, not a
/// composite instance): 0.5||Amap vec(X) - b||^2 with rank(X) <= k.
struct RankInstance {
  Eigen::MatrixXd amap;
  Eigen::VectorXd b;
  int m = 0, n = 0, k = 0;
  Eigen::MatrixXd x_star;  ///< planted solution with Amap vec(x_star) = b
};

RankInstance make_rank_instance(std::uint64_t seed, int m, int n, int k, double offmix = 0.1);

}  // namespace klx::models
