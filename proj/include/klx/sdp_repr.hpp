#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "klx/models.hpp"
#include "klx/rng.hpp"

namespace klx::sdp_repr {

/// Minimum eigenvalue of a symmetric matrix.
double min_eig(const Eigen::MatrixXd& s);

/// Membership in the PSD cone with the single relaxed tolerance used by all
/// set-membership tests in this module: min-eig >= -1e-9 (1 + ||.||_F).
bool psd_member(const Eigen::MatrixXd& s);

/// One LMI-representable function: the epigraph is
/// { (x,t) : A00 + sum_j Aj x_j + A0 t >= 0 }.
struct LmiAtom {
  int dim = 0;
  int nvars = 0;
  Eigen::MatrixXd a00, a0;
  std::vector<Eigen::MatrixXd> ai;
  Eigen::VectorXd slater_x;
  double slater_s = 0.0;
  std::function<double(const Eigen::VectorXd&)> func;  ///< the represented function

  Eigen::MatrixXd lmi(const Eigen::VectorXd& x, double t) const;
  bool member(const Eigen::VectorXd& x, double t) const;
};

LmiAtom atom_abs(int n, int coord, double weight);
LmiAtom atom_l2(int n, const std::vector<int>& coords, double weight);
LmiAtom atom_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Assembled epigraph lift over variables v = (x, u, t): the single LMI
/// A00 + sum coeff_j v_j >= 0 together with the linear objective t.
struct LiftedSdp {
  int dim = 0;    ///< total LMI size
  int n = 0;      ///< original variables
  int nlift = 0;  ///< auxiliary variables u
  Eigen::MatrixXd a00;
  std::vector<Eigen::MatrixXd> coeff;  ///< order: A1..An, B1..BN, A0 last
  std::vector<int> block_sizes;        ///< block-diagonal structure, for export
  Eigen::VectorXd slater;              ///< strictly feasible (x, u, t)
  std::function<double(const Eigen::VectorXd&)> represented;  ///< f(x)
  /// Minimizing auxiliary variables: x -> (u*, t* = f(x)).
  std::function<std::pair<Eigen::VectorXd, double>(const Eigen::VectorXd&)> minimizing_lift;
  /// A random feasible lifted point above x (for domination checks).
  std::function<std::pair<Eigen::VectorXd, double>(const Eigen::VectorXd&, Rng&)>
      random_feasible_lift;

  Eigen::MatrixXd assemble(const Eigen::VectorXd& v) const;
  bool member(const Eigen::VectorXd& v) const;
  double f_value(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) const;
  Eigen::VectorXd apply_map(const Eigen::MatrixXd& w) const;
  Eigen::MatrixXd apply_adjoint(const Eigen::VectorXd& v) const;
};

/// Block-diagonal epigraph lift of a sum of LMI atoms: scalar block
/// t - sum_i s_i plus one block per atom in the variables (x, s, t).
LiftedSdp lift_sum_lmi(const std::vector<LmiAtom>& atoms);

/// Epigraph of x^4 with one auxiliary variable: blocks enforce u >= x^2 and
/// t >= u^2.
LiftedSdp lift_quartic();

/// Orthogonalized coefficient basis: hat = {Â1..Âp, Â0 (last, unscaled so
/// its own coefficient is 1)}, the full-row-rank change of coordinates U
/// with last row e_{n+N+1}, and a basis of the kernel of the reduced map.
struct ReducedBasis {
  std::vector<Eigen::MatrixXd> hat;
  Eigen::MatrixXd u;
  std::vector<Eigen::MatrixXd> kernel;
  int p() const { return static_cast<int>(hat.size()) - 1; }
};

/// Greedy Gram-Schmidt over the coefficient matrices in input order
/// (pivot threshold 1e-10 on residual norms), A0 appended last. Throws when
/// A0 lies in the span of the others (degenerate representation).
ReducedBasis orthogonalize_basis(const LiftedSdp& lift);

/// The reduced pair: F1 on the (z,t) coordinates and F2 on matrices, tied by
/// F2(A00 + adjoint(z,t)) - offset = F1(z,t) on the feasible set.
struct ReducedPair {
  Eigen::MatrixXd a00;
  std::vector<Eigen::MatrixXd> hat;
  std::vector<Eigen::MatrixXd> kernel;
  Eigen::VectorXd kernel_rhs;  ///< <H_i, A00>
  double offset = 0.0;         ///< <Â0, A00> / ||Â0||^2

  double f1(const Eigen::VectorXd& zt) const;
  double f2(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd reduced_adjoint(const Eigen::VectorXd& zt) const;
  bool d1_member(const Eigen::VectorXd& zt) const;
  bool d2_member(const Eigen::MatrixXd& x) const;
  /// Condition number of the Gram matrix of the reduced adjoint (injectivity
  /// certificate).
  double adjoint_gram_condition() const;
};

ReducedPair build_reduced_pair(const ReducedBasis& basis, const Eigen::MatrixXd& a00);

/// Sparse SDPA export of the lift with objective "minimize t". Variables are
/// ordered x_1..x_n, u_1..u_N, t; constraint matrices F_j are the LMI
/// coefficients and F_0 = -A00.
void write_sdpa(const LiftedSdp& lift, const std::string& path);

struct ScMargin {
  double margin = 0.0;
  bool warning = false;
  std::string note;
};

/// Strict-complementarity margin for group-separable l1/group models:
/// min over inactive groups of (w_i - ||grad_{J_i}||); 0 when every group is
/// active. Support detection at the relative 1e-10 threshold, with a warning
/// when a group norm falls inside the ambiguity band.
ScMargin check_sc_group(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                        const models::GroupList& groups, const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& xbar);
ScMargin check_sc_l1(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double mu,
                     const Eigen::VectorXd& xbar);

/// Nuclear-norm margin 1 - ||W0||_2 with W0 the projection of -grad/nu onto
/// the outer singular factors of xbar.
ScMargin check_sc_nuclear(const Eigen::MatrixXd& amap, const Eigen::VectorXd& b, double nu,
                          int m, int n, const Eigen::MatrixXd& xbar);

struct ErrorBoundFit {
  double slope = 0.0;
  double r2 = 0.0;
  int n_used = 0;
};

/// Growth-exponent probe for G(X) = <C,X> over {X psd : <H_i,X> = h_i}:
/// feasible samples are binned by gap and the per-bin *maximum* distance to
/// the analytic solution set is regressed against the gap (the probe checks
/// an upper bound, so the binding envelope is the maximum).
ErrorBoundFit error_bound_probe(const Eigen::MatrixXd& c,
                                const std::vector<Eigen::MatrixXd>& hs,
                                const Eigen::VectorXd& h_rhs,
                                const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>&
                                    project_argmin,
                                double g_star, const std::vector<Eigen::MatrixXd>& samples);

/// Semidefinite lift of f(X) = 0.5||A vec X - b||^2 + mu sum|X_ij| + nu||X||_*
/// over the PSD block matrix [[U, X], [X^T, V]].
struct NuclearLift {
  Eigen::MatrixXd amap;
  Eigen::VectorXd b;
  double mu = 0.0, nu = 1.0;
  int m = 0, n = 0;

  double f(const Eigen::MatrixXd& x) const;
  double lifted(const Eigen::MatrixXd& x, const Eigen::MatrixXd& u,
                const Eigen::MatrixXd& v) const;
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> minimizing_uv(const Eigen::MatrixXd& x) const;
};

struct PlantedLasso {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd xbar;
  double mu = 1.0;
  double margin = 0.0;  ///< planted value
};

/// Lasso instance with a planted stationary point whose inactive
/// correlations sit at rho_frac * mu exactly (margin mu (1 - rho_frac)).
PlantedLasso make_planted_lasso(std::uint64_t seed, int p, int n, int support, double mu,
                                double rho_frac);

struct PlantedNuclear {
  Eigen::MatrixXd amap;
  Eigen::VectorXd b;
  Eigen::MatrixXd xbar;
  double nu = 1.0;
  int m = 0, n = 0;
  double margin = 0.0;
};

/// Nuclear-norm instance built from a chosen outer factor W0 with
/// ||W0||_2 = w_norm (margin 1 - w_norm).
PlantedNuclear make_planted_nuclear(std::uint64_t seed, int m, int n, int r, double nu,
                                    double w_norm);

}  // namespace klx::sdp_repr
