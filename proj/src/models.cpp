#include "klx/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "klx/linalg.hpp"
#include "klx/rng.hpp"

namespace klx::models {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate_groups(const GroupList& groups, Index n, bool require_disjoint,
                     bool require_cover) {
  if (groups.empty()) throw std::invalid_argument("groups: empty list");
  std::vector<int> count(static_cast<size_t>(n), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("groups: empty group rejected");
    for (int j : g) {
      if (j < 0 || j >= n) throw std::invalid_argument("groups: index out of range");
      ++count[static_cast<size_t>(j)];
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (require_cover && count[static_cast<size_t>(j)] == 0)
      throw std::invalid_argument("groups: union must cover all coordinates");
    if (require_disjoint && count[static_cast<size_t>(j)] > 1)
      throw std::invalid_argument("groups: overlap where disjoint groups required");
  }
}

SmoothOracle quadratic_smooth(const MatrixXd& a, const VectorXd& b) {
  SmoothOracle s;
  s.value = [a, b](const VectorXd& x) { return 0.5 * (a * x - b).squaredNorm(); };
  s.gradient = [a, b](const VectorXd& x) { return VectorXd(a.transpose() * (a * x - b)); };
  s.hessian = [a]() { return MatrixXd(a.transpose() * a); };
  s.lipschitz = linalg::spectral_norm_sq(a);
  return s;
}

// prox of the nuclear norm (t * ||.||_*) at an m x n matrix
MatrixXd nuclear_prox_mat(const MatrixXd& x, double t) {
  const linalg::Svd s = linalg::svd(x);
  const Index k = s.singular_values.size();
  VectorXd sig = (s.singular_values.array() - t).max(0.0);
  return s.u.leftCols(k) * sig.asDiagonal() * s.v.leftCols(k).transpose();
}

double nuclear_norm(const MatrixXd& x) {
  return linalg::svd(x).singular_values.sum();
}

// Accelerated dual ascent for
//   min_u sum_i w_i ||u_{B_i}|| + ||u - v||^2 / (2 gamma)
//   s.t. <lambda blocks>, coupling rows D u entering as sup_{lambda} <lambda, D u>
// with each dual block constrained to a Euclidean ball (radius +inf means an
// equality constraint D_block u = 0). The primal map u(lambda) is the
// blockwise group soft-threshold, so every step is closed form.
struct CoupledProxEngine {
  GroupList blocks;
  VectorXd weights;
  MatrixXd d;                     // coupling map
  std::vector<int> dual_offsets;  // start row of each dual block
  std::vector<int> dual_sizes;
  std::vector<double> radii;      // +inf = unconstrained (equality constraint)
  double d_norm_sq = 0.0;
  int max_iter = 200000;
  double tol = 1e-13;

  void finalize() { d_norm_sq = std::max(linalg::spectral_norm_sq(d), 1e-30); }

  VectorXd primal(const VectorXd& v, double gamma, const VectorXd& lambda) const {
    return group_soft_threshold(v - gamma * (d.transpose() * lambda), gamma,
                                blocks, weights);
  }

  VectorXd project_dual(VectorXd lambda) const {
    for (size_t i = 0; i < dual_offsets.size(); ++i) {
      if (!std::isfinite(radii[i])) continue;
      auto seg = lambda.segment(dual_offsets[i], dual_sizes[i]);
      const double nrm = seg.norm();
      if (nrm > radii[i]) seg *= radii[i] / nrm;
    }
    return lambda;
  }

  VectorXd solve(const VectorXd& v, double gamma) const {
    if (d.rows() == 0) return group_soft_threshold(v, gamma, blocks, weights);
    const double step = 1.0 / (gamma * d_norm_sq);
    VectorXd lam = VectorXd::Zero(d.rows());
    VectorXd y = lam;
    VectorXd u_prev = primal(v, gamma, lam);
    double t = 1.0;
    const double stop = tol * (1.0 + v.lpNorm<Eigen::Infinity>());
    int stable = 0;
    for (int it = 0; it < max_iter; ++it) {
      const VectorXd u = primal(v, gamma, y);
      VectorXd lam_next = project_dual(y + step * (d * u));
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = lam_next + ((t - 1.0) / t_next) * (lam_next - lam);
      lam = lam_next;
      t = t_next;
      const VectorXd u_cur = primal(v, gamma, lam);
      if ((u_cur - u_prev).lpNorm<Eigen::Infinity>() <= stop) {
        if (++stable >= 3) return u_cur;
      } else {
        stable = 0;
      }
      u_prev = u_cur;
    }
    return u_prev;
  }
};

}  // namespace

VectorXd soft_threshold(const VectorXd& v, double t) {
  return v.array().sign() * (v.array().abs() - t).max(0.0);
}

VectorXd group_soft_threshold(const VectorXd& v, double gamma,
                              const GroupList& groups, const VectorXd& weights) {
  VectorXd out = v;
  for (size_t i = 0; i < groups.size(); ++i) {
    double nrm = 0.0;
    for (int j : groups[i]) nrm += v[j] * v[j];
    nrm = std::sqrt(nrm);
    const double thr = gamma * weights[static_cast<Index>(i)];
    const double scale = (nrm > thr) ? (1.0 - thr / nrm) : 0.0;
    for (int j : groups[i]) out[j] = scale * v[j];
  }
  return out;
}

VectorXd project_l1_ball(const VectorXd& v, double radius) {
  if (radius <= 0.0) return VectorXd::Zero(v.size());
  if (v.lpNorm<1>() <= radius) return v;
  VectorXd mag = v.cwiseAbs();
  std::sort(mag.data(), mag.data() + mag.size(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (Index i = 0; i < mag.size(); ++i) {
    cum += mag[i];
    const double cand = (cum - radius) / static_cast<double>(i + 1);
    if (i + 1 == mag.size() || mag[i + 1] <= cand) {
      theta = cand;
      break;
    }
  }
  return soft_threshold(v, theta);
}

ProblemInstance make_group_lasso(const MatrixXd& a, const VectorXd& b,
                                 const GroupList& groups, const VectorXd& weights,
                                 bool overlapping) {
  const Index n = a.cols();
  validate_groups(groups, n, /*require_disjoint=*/!overlapping, /*require_cover=*/true);
  if (weights.size() != static_cast<Index>(groups.size()))
    throw std::invalid_argument("group lasso: one weight per group required");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("group lasso: weights must be nonnegative");

  ProblemInstance inst;
  inst.dim = n;
  inst.smooth = quadratic_smooth(a, b);
  inst.nonsmooth.value = [groups, weights](const VectorXd& x) {
    double v = 0.0;
    for (size_t i = 0; i < groups.size(); ++i) {
      double nrm = 0.0;
      for (int j : groups[i]) nrm += x[j] * x[j];
      v += weights[static_cast<Index>(i)] * std::sqrt(nrm);
    }
    return v;
  };
  if (!overlapping) {
    inst.nonsmooth.prox = [groups, weights](const VectorXd& x, double gamma) {
      return group_soft_threshold(x, gamma, groups, weights);
    };
    // Activity is decided by exact zeros: the prox produces them, so solver
    // iterates carry the true pattern.
    inst.nonsmooth.subgrad_dist = [groups, weights](const VectorXd& x, const VectorXd& w) {
      double acc = 0.0;
      for (size_t i = 0; i < groups.size(); ++i) {
        double xn = 0.0, wn = 0.0;
        for (int j : groups[i]) {
          xn += x[j] * x[j];
          wn += w[j] * w[j];
        }
        xn = std::sqrt(xn);
        const double wi = weights[static_cast<Index>(i)];
        if (xn > 0.0) {
          double s = 0.0;
          for (int j : groups[i]) {
            const double c = w[j] + wi * x[j] / xn;
            s += c * c;
          }
          acc += s;
        } else {
          const double excess = std::max(0.0, std::sqrt(wn) - wi);
          acc += excess * excess;
        }
      }
      return std::sqrt(acc);
    };
  }
  inst.meta.name = overlapping ? "group-lasso-overlapping" : "group-lasso";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at stationary points with 0 in ri(subdifferential); "
      "sum of LMI-representable terms";
  inst.meta.convex = true;
  return inst;
}

VectorXd lift_group_copies(const GroupList& groups, const VectorXd& x) {
  Index total = 0;
  for (const auto& g : groups) total += static_cast<Index>(g.size());
  VectorXd z(total);
  Index at = 0;
  for (const auto& g : groups)
    for (int j : g) z[at++] = x[j];
  return z;
}

ProblemInstance make_group_lasso_lifted(const MatrixXd& a, const VectorXd& b,
                                        const GroupList& groups, const VectorXd& weights) {
  const Index n = a.cols();
  validate_groups(groups, n, /*require_disjoint=*/false, /*require_cover=*/true);
  if (weights.size() != static_cast<Index>(groups.size()))
    throw std::invalid_argument("group lasso: one weight per group required");

  // Copy layout: z = (z_1, ..., z_s) with z_i the copy of x_{J_i}.
  Index total = 0;
  std::vector<std::vector<Index>> copies(static_cast<size_t>(n));  // copy slots per coordinate
  GroupList copy_blocks;
  for (const auto& g : groups) {
    std::vector<int> block;
    for (int j : g) {
      copies[static_cast<size_t>(j)].push_back(total);
      block.push_back(static_cast<int>(total));
      ++total;
    }
    copy_blocks.push_back(block);
  }

  // Averaging map R: x_j = mean of the copies of coordinate j.
  MatrixXd r = MatrixXd::Zero(n, total);
  for (Index j = 0; j < n; ++j)
    for (Index slot : copies[static_cast<size_t>(j)])
      r(j, slot) = 1.0 / static_cast<double>(copies[static_cast<size_t>(j)].size());

  // Consensus rows: consecutive copies of a shared coordinate must agree.
  Index n_rows = 0;
  for (Index j = 0; j < n; ++j)
    n_rows += static_cast<Index>(copies[static_cast<size_t>(j)].size()) - 1;
  MatrixXd m = MatrixXd::Zero(n_rows, total);
  Index row = 0;
  for (Index j = 0; j < n; ++j) {
    const auto& slots = copies[static_cast<size_t>(j)];
    for (size_t c = 0; c + 1 < slots.size(); ++c) {
      m(row, slots[c]) = -1.0;
      m(row, slots[c + 1]) = 1.0;
      ++row;
    }
  }

  CoupledProxEngine engine;
  engine.blocks = copy_blocks;
  engine.weights = weights;
  engine.d = m;
  if (n_rows > 0) {
    engine.dual_offsets = {0};
    engine.dual_sizes = {static_cast<int>(n_rows)};
    engine.radii = {kInf};
  }
  engine.finalize();

  const MatrixXd ar = a * r;
  const MatrixXd mmap = m;

  auto average_onto_consensus = [r, copy_blocks, groups](const VectorXd& z) {
    VectorXd x = r * z;
    VectorXd out(z.size());
    for (size_t i = 0; i < groups.size(); ++i)
      for (size_t l = 0; l < groups[i].size(); ++l)
        out[copy_blocks[i][l]] = x[groups[i][l]];
    return out;
  };

  ProblemInstance inst;
  inst.dim = total;
  inst.smooth = quadratic_smooth(ar, b);
  inst.nonsmooth.value = [copy_blocks, weights, mmap](const VectorXd& z) {
    if (mmap.rows() > 0) {
      const double violation = (mmap * z).lpNorm<Eigen::Infinity>();
      if (violation > 1e-8 * (1.0 + z.lpNorm<Eigen::Infinity>())) return kInf;
    }
    double v = 0.0;
    for (size_t i = 0; i < copy_blocks.size(); ++i) {
      double nrm = 0.0;
      for (int j : copy_blocks[i]) nrm += z[j] * z[j];
      v += weights[static_cast<Index>(i)] * std::sqrt(nrm);
    }
    return v;
  };
  inst.nonsmooth.prox = [engine, average_onto_consensus](const VectorXd& z, double gamma) {
    return average_onto_consensus(engine.solve(z, gamma));
  };
  inst.domain_project = average_onto_consensus;
  inst.meta.name = "group-lasso-overlapping-lifted";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at stationary points with 0 in ri(subdifferential); "
      "consensus lift of the overlapping penalty (the lift preserves the exponent)";
  inst.meta.convex = true;
  return inst;
}

ProblemInstance make_group_fused_lasso(const MatrixXd& a, const VectorXd& b,
                                       const GroupList& partition, const VectorXd& w,
                                       const VectorXd& nu) {
  const Index n = a.cols();
  validate_groups(partition, n, /*require_disjoint=*/true, /*require_cover=*/true);
  const size_t s = partition.size();
  const size_t r0 = partition[0].size();
  for (const auto& g : partition)
    if (g.size() != r0)
      throw std::invalid_argument("group fused lasso: equi-partition required");
  if (w.size() != static_cast<Index>(s) || nu.size() != static_cast<Index>(s))
    throw std::invalid_argument("group fused lasso: w and nu need one entry per block");
  if (n > 64)
    throw std::invalid_argument("group fused lasso: dimension capped at 64");

  const int r = static_cast<int>(r0);
  // Difference rows: block i couples with block i-1, i = 1..s-1.
  MatrixXd d = MatrixXd::Zero(static_cast<Index>((s - 1) * r0), n);
  std::vector<int> offsets, sizes;
  std::vector<double> radii;
  for (size_t i = 1; i < s; ++i) {
    const Index base = static_cast<Index>((i - 1) * r0);
    for (int l = 0; l < r; ++l) {
      d(base + l, partition[i][static_cast<size_t>(l)]) = 1.0;
      d(base + l, partition[i - 1][static_cast<size_t>(l)]) = -1.0;
    }
    offsets.push_back(static_cast<int>(base));
    sizes.push_back(r);
    radii.push_back(nu[static_cast<Index>(i)]);
  }

  CoupledProxEngine engine;
  engine.blocks = partition;
  engine.weights = w;
  engine.d = d;
  engine.dual_offsets = offsets;
  engine.dual_sizes = sizes;
  engine.radii = radii;
  engine.finalize();

  ProblemInstance inst;
  inst.dim = n;
  inst.smooth = quadratic_smooth(a, b);
  inst.nonsmooth.value = [partition, w, nu](const VectorXd& x) {
    double v = 0.0;
    for (size_t i = 0; i < partition.size(); ++i) {
      double nrm = 0.0;
      for (int j : partition[i]) nrm += x[j] * x[j];
      v += w[static_cast<Index>(i)] * std::sqrt(nrm);
    }
    for (size_t i = 1; i < partition.size(); ++i) {
      double nrm = 0.0;
      for (size_t l = 0; l < partition[i].size(); ++l) {
        const double diff = x[partition[i][l]] - x[partition[i - 1][l]];
        nrm += diff * diff;
      }
      v += nu[static_cast<Index>(i)] * std::sqrt(nrm);
    }
    return v;
  };
  inst.nonsmooth.prox = [engine](const VectorXd& x, double gamma) {
    return engine.solve(x, gamma);
  };
  inst.meta.name = "group-fused-lasso";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at stationary points with 0 in ri(subdifferential); "
      "sum of LMI-representable terms";
  inst.meta.convex = true;
  return inst;
}

ProblemInstance make_soc_constrained_ls(const MatrixXd& a, const VectorXd& b,
                                        const std::vector<int>& cone_dims) {
  const Index n = a.cols();
  Index total = 0;
  for (int dim : cone_dims) {
    if (dim < 1) throw std::invalid_argument("soc: cone dimensions must be >= 1");
    total += dim;
  }
  if (total != n) throw std::invalid_argument("soc: cone dims must partition the variable");

  auto project = [cone_dims](const VectorXd& x, double) {
    VectorXd out(x.size());
    Index at = 0;
    for (int dim : cone_dims) {
      if (dim == 1) {
        out[at] = std::max(0.0, x[at]);
      } else {
        auto [z, t] = linalg::project_soc(x.segment(at, dim - 1), x[at + dim - 1]);
        out.segment(at, dim - 1) = z;
        out[at + dim - 1] = t;
      }
      at += dim;
    }
    return out;
  };

  ProblemInstance inst;
  inst.dim = n;
  inst.smooth = quadratic_smooth(a, b);
  inst.nonsmooth.value = [cone_dims](const VectorXd& x) {
    Index at = 0;
    for (int dim : cone_dims) {
      const double t = x[at + dim - 1];
      const double nz = (dim == 1) ? 0.0 : x.segment(at, dim - 1).norm();
      if (nz > t + 1e-9 * (1.0 + std::abs(t))) return kInf;
      at += dim;
    }
    return 0.0;
  };
  inst.nonsmooth.prox = project;
  inst.domain_project = [project](const VectorXd& x) { return project(x, 1.0); };
  inst.meta.name = "soc-constrained-ls";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at stationary points with 0 in ri(subdifferential); "
      "least squares over a product of second-order cones";
  inst.meta.convex = true;
  return inst;
}

ProblemInstance make_ls_l1_nuclear(const MatrixXd& amap, const VectorXd& b,
                                   double mu, double nu, int m, int n) {
  if (mu <= 0.0 || nu <= 0.0)
    throw std::invalid_argument("ls-l1-nuclear: mu and nu must be positive");
  if (amap.cols() != static_cast<Index>(m) * n)
    throw std::invalid_argument("ls-l1-nuclear: map columns must equal m*n");

  auto as_matrix = [m, n](const VectorXd& x) {
    return MatrixXd(Eigen::Map<const MatrixXd>(x.data(), m, n));
  };

  ProblemInstance inst;
  inst.dim = static_cast<Index>(m) * n;
  inst.smooth = quadratic_smooth(amap, b);
  inst.nonsmooth.value = [as_matrix, mu, nu](const VectorXd& x) {
    const MatrixXd xm = as_matrix(x);
    return mu * xm.cwiseAbs().sum() + nu * nuclear_norm(xm);
  };
  // Alternating-prox splitting with correction terms; fixed-point tolerance
  // 1e-8, at most 50 rounds. Exact in one round when either weight is the
  // only active one.
  inst.nonsmooth.prox = [as_matrix, mu, nu, m, n](const VectorXd& v, double gamma) {
    VectorXd y = v;
    VectorXd p = VectorXd::Zero(v.size());
    VectorXd q = VectorXd::Zero(v.size());
    for (int it = 0; it < 50; ++it) {
      const VectorXd a = soft_threshold(y + p, gamma * mu);
      p = y + p - a;
      const MatrixXd ym = nuclear_prox_mat(as_matrix(VectorXd(a + q)), gamma * nu);
      const VectorXd y_next = Eigen::Map<const VectorXd>(ym.data(), ym.size());
      q = a + q - y_next;
      const double change = (y_next - y).norm();
      y = y_next;
      if (change <= 1e-8 * (1.0 + v.norm())) break;
    }
    return y;
  };
  inst.meta.name = "ls-l1-nuclear";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at stationary points with 0 in ri(subdifferential); "
      "sum of LMI-representable terms plus the nuclear norm";
  inst.meta.convex = true;
  return inst;
}

double entropy_penalty(const VectorXd& x) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) return kInf;
    s += x[i];
  }
  if (s == 0.0) return 0.0;
  double v = -s * std::log(s);
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] > 0.0) v += x[i] * std::log(x[i]);
  return v;
}

VectorXd entropy_penalty_gradient(const VectorXd& x) {
  const double s = x.sum();
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) g[i] = std::log(x[i] / s);
  return g;
}

ProblemInstance make_entropy_regularized(const MatrixXd& a, const VectorXd& b,
                                         const VectorXd& v) {
  const Index n = a.cols();
  if (v.size() != n) throw std::invalid_argument("entropy: linear term has wrong size");

  ProblemInstance inst;
  inst.dim = n;
  inst.smooth.value = [a, b, v](const VectorXd& x) {
    return 0.5 * (a * x - b).squaredNorm() + v.dot(x);
  };
  inst.smooth.gradient = [a, b, v](const VectorXd& x) {
    return VectorXd(a.transpose() * (a * x - b) + v);
  };
  inst.smooth.hessian = [a]() { return MatrixXd(a.transpose() * a); };
  inst.smooth.lipschitz = linalg::spectral_norm_sq(a);
  inst.nonsmooth.value = [](const VectorXd& x) { return entropy_penalty(x); };
  // Interior-only subdifferential: at a boundary point the penalty has
  // infinite inward slope, so the distance is reported as +inf and the
  // sample gets filtered.
  inst.nonsmooth.subgrad_dist = [](const VectorXd& x, const VectorXd& w) {
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] <= 0.0) return kInf;
    return (w + entropy_penalty_gradient(x)).norm();
  };
  inst.domain_project = [](const VectorXd& x) { return VectorXd(x.cwiseMax(0.0)); };
  inst.meta.name = "entropy-regularized-ls";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at every stationary point; entropy-like penalty is a "
      "support function of a smooth sublevel set with polyhedral normal cones";
  inst.meta.convex = true;
  return inst;
}

ProblemInstance make_psd_constrained(const MatrixXd& amap, const VectorXd& b,
                                     const MatrixXd& v, int n) {
  if (amap.cols() != static_cast<Index>(n) * n)
    throw std::invalid_argument("psd: map columns must equal n*n");
  const VectorXd vv = Eigen::Map<const VectorXd>(v.data(), v.size());

  auto as_matrix = [n](const VectorXd& x) {
    MatrixXd xm = Eigen::Map<const MatrixXd>(x.data(), n, n);
    return MatrixXd(0.5 * (xm + xm.transpose()));
  };
  auto project = [as_matrix](const VectorXd& x, double) {
    const MatrixXd p = linalg::project_psd(as_matrix(x));
    return VectorXd(Eigen::Map<const VectorXd>(p.data(), p.size()));
  };

  ProblemInstance inst;
  inst.dim = static_cast<Index>(n) * n;
  inst.smooth.value = [amap, b, vv](const VectorXd& x) {
    return 0.5 * (amap * x - b).squaredNorm() + vv.dot(x);
  };
  inst.smooth.gradient = [amap, b, vv](const VectorXd& x) {
    return VectorXd(amap.transpose() * (amap * x - b) + vv);
  };
  inst.smooth.hessian = [amap]() { return MatrixXd(amap.transpose() * amap); };
  inst.smooth.lipschitz = linalg::spectral_norm_sq(amap);
  inst.nonsmooth.value = [as_matrix](const VectorXd& x) {
    const MatrixXd xm = as_matrix(x);
    const linalg::SymEig e = linalg::eigh(xm);
    const double lo = e.eigenvalues[e.eigenvalues.size() - 1];
    return (lo >= -1e-9 * (1.0 + xm.norm())) ? 0.0 : kInf;
  };
  inst.nonsmooth.prox = project;
  inst.domain_project = [project](const VectorXd& x) { return project(x, 1.0); };
  inst.meta.name = "psd-constrained-ls";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "exponent 1/2 at stationary points, conditional on a relative-interior "
      "regularity of the normal cone at the solution";
  inst.meta.convex = true;
  return inst;
}

ProblemInstance make_schatten(const MatrixXd& amap, const VectorXd& b,
                              const MatrixXd& v, double tau, SchattenP p, int n) {
  if (amap.cols() != static_cast<Index>(n) * n)
    throw std::invalid_argument("schatten: map columns must equal n*n");
  if (tau <= 0.0) throw std::invalid_argument("schatten: tau must be positive");
  const VectorXd vv = Eigen::Map<const VectorXd>(v.data(), v.size());

  auto as_matrix = [n](const VectorXd& x) {
    MatrixXd xm = Eigen::Map<const MatrixXd>(x.data(), n, n);
    return MatrixXd(0.5 * (xm + xm.transpose()));
  };
  auto to_vec = [](const MatrixXd& m) {
    return VectorXd(Eigen::Map<const VectorXd>(m.data(), m.size()));
  };

  ProblemInstance inst;
  inst.dim = static_cast<Index>(n) * n;
  inst.smooth.value = [amap, b, vv](const VectorXd& x) {
    return 0.5 * (amap * x - b).squaredNorm() + vv.dot(x);
  };
  inst.smooth.gradient = [amap, b, vv](const VectorXd& x) {
    return VectorXd(amap.transpose() * (amap * x - b) + vv);
  };
  inst.smooth.hessian = [amap]() { return MatrixXd(amap.transpose() * amap); };
  inst.smooth.lipschitz = linalg::spectral_norm_sq(amap);

  inst.nonsmooth.value = [as_matrix, tau, p](const VectorXd& x) {
    const linalg::SymEig e = linalg::eigh(as_matrix(x));
    const VectorXd mag = e.eigenvalues.cwiseAbs();
    switch (p) {
      case SchattenP::One: return tau * mag.sum();
      case SchattenP::Two: return tau * mag.norm();
      case SchattenP::Inf: return tau * mag.maxCoeff();
    }
    return 0.0;
  };
  inst.nonsmooth.prox = [as_matrix, to_vec, tau, p](const VectorXd& x, double gamma) {
    const MatrixXd xm = as_matrix(x);
    if (p == SchattenP::Two) {
      const double nrm = xm.norm();
      const double scale = (nrm > gamma * tau) ? (1.0 - gamma * tau / nrm) : 0.0;
      return to_vec(MatrixXd(scale * xm));
    }
    const linalg::SymEig e = linalg::eigh(xm);
    VectorXd lam = e.eigenvalues;
    if (p == SchattenP::One) {
      lam = soft_threshold(lam, gamma * tau);
    } else {
      lam -= project_l1_ball(lam, gamma * tau);  // Moreau: prox of the max eigenvalue magnitude
    }
    return to_vec(MatrixXd(e.vectors * lam.asDiagonal() * e.vectors.transpose()));
  };
  inst.domain_project = [as_matrix, to_vec](const VectorXd& x) { return to_vec(as_matrix(x)); };
  inst.meta.name = "schatten-regularized-ls";
  inst.meta.certified_exponent = 0.5;
  inst.meta.certification =
      "conditional: exponent 1/2 at nonzero stationary points under a "
      "relative-interior regularity; unresolved at the zero matrix";
  inst.meta.convex = true;
  return inst;
}

ProblemInstance make_poly_fixture(PolyFixture kind) {
  ProblemInstance inst;
  if (kind == PolyFixture::X4) {
    inst.dim = 1;
    inst.smooth.value = [](const VectorXd& x) { return std::pow(x[0], 4); };
    inst.smooth.gradient = [](const VectorXd& x) {
      VectorXd g(1);
      g[0] = 4.0 * std::pow(x[0], 3);
      return g;
    };
    inst.nonsmooth.value = [](const VectorXd&) { return 0.0; };
    inst.nonsmooth.prox = [](const VectorXd& x, double) { return x; };
    inst.nonsmooth.subgrad_dist = [](const VectorXd&, const VectorXd& w) { return w.norm(); };
    inst.meta.name = "quartic";
    inst.meta.certified_exponent = 0.75;
    inst.meta.certification = "exponent 3/4 at the origin: |f'(x)| = 4 f(x)^{3/4}";
    inst.meta.convex = true;
    return inst;
  }

  // F = max{x1^2, (x1+1)^2 + x2^2 - 1}, exact min-norm subgradient of the max.
  auto pieces = [](const VectorXd& x) {
    VectorXd f(2);
    f[0] = x[0] * x[0];
    f[1] = (x[0] + 1.0) * (x[0] + 1.0) + x[1] * x[1] - 1.0;
    return f;
  };
  inst.dim = 2;
  inst.nonsmooth.value = [pieces](const VectorXd& x) { return pieces(x).maxCoeff(); };
  inst.nonsmooth.subgrad_dist = [pieces](const VectorXd& x, const VectorXd& w) {
    const VectorXd f = pieces(x);
    VectorXd g1(2), g2(2);
    g1 << 2.0 * x[0], 0.0;
    g2 << 2.0 * (x[0] + 1.0), 2.0 * x[1];
    const double big = f.maxCoeff();
    const double tol = 1e-12 * (1.0 + std::abs(big));
    const bool a1 = f[0] >= big - tol;
    const bool a2 = f[1] >= big - tol;
    if (a1 && !a2) return (w + g1).norm();
    if (a2 && !a1) return (w + g2).norm();
    const VectorXd c = w + g1;
    const VectorXd d = g2 - g1;
    const double dd = d.squaredNorm();
    const double t = (dd > 0.0) ? std::clamp(-c.dot(d) / dd, 0.0, 1.0) : 0.0;
    return (c + t * d).norm();
  };
  inst.piece_values = pieces;
  inst.meta.name = "max-quadratics";
  inst.meta.certified_exponent = 0.75;
  inst.meta.certification =
      "exponent 3/4 at the origin for the max of these two quadratics "
      "(the pointwise maximum does not inherit the pieces' exponent 1/2)";
  inst.meta.convex = true;
  return inst;
}

// ---------------------------------------------------------------------------
// Seeded generation

namespace {

GroupList contiguous_groups(int n, int s) {
  GroupList groups;
  const int base = n / s, extra = n % s;
  int at = 0;
  for (int i = 0; i < s; ++i) {
    const int len = base + (i < extra ? 1 : 0);
    std::vector<int> g(static_cast<size_t>(len));
    std::iota(g.begin(), g.end(), at);
    at += len;
    groups.push_back(g);
  }
  return groups;
}

GroupList overlapping_groups(int n, int s, int overlap) {
  if (s < 2) throw std::invalid_argument("overlapping groups: need at least 2 groups");
  if ((n + (s - 1) * overlap) % s != 0)
    throw std::invalid_argument("overlapping groups: (n + (s-1)*overlap) must be divisible by s");
  const int r = (n + (s - 1) * overlap) / s;
  GroupList groups;
  for (int i = 0; i < s; ++i) {
    std::vector<int> g;
    const int start = i * (r - overlap);
    for (int j = start; j < start + r; ++j) g.push_back(j);
    groups.push_back(g);
  }
  return groups;
}

}  // namespace

nlohmann::json instance_config(const std::string& kind, std::uint64_t seed,
                               const nlohmann::json& params) {
  return nlohmann::json{{"kind", kind}, {"seed", seed}, {"params", params}};
}

GeneratedInstance make_instance(const nlohmann::json& config) {
  const std::string kind = config.at("kind").get<std::string>();
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});
  const nlohmann::json params = config.value("params", nlohmann::json::object());
  Rng rng(seed);
  GeneratedInstance out;

  if (kind == "x4") {
    out.inst = make_poly_fixture(PolyFixture::X4);
    out.x0 = VectorXd::Constant(1, 1.0);
    out.x_star = VectorXd::Zero(1);
    out.f_star = 0.0;
    out.default_sampling = "radial";
    return out;
  }
  if (kind == "max-quadratics") {
    out.inst = make_poly_fixture(PolyFixture::MaxQuadratics);
    out.x0 = VectorXd::Zero(2);
    out.x_star = VectorXd::Zero(2);
    out.f_star = 0.0;
    out.default_sampling = "radial";
    return out;
  }

  if (kind == "group-lasso" || kind == "lasso" || kind == "group-lasso-overlap" ||
      kind == "group-lasso-overlap-lifted") {
    const int p = params.value("rows", 8);
    const int n = params.value("cols", 6);
    const double w = params.value("weight", 0.5);
    const MatrixXd a = rng.normal_matrix(p, n) / std::sqrt(static_cast<double>(p));
    GroupList groups;
    bool overlapping = false;
    if (kind == "lasso") {
      groups = contiguous_groups(n, n);
    } else if (kind == "group-lasso") {
      groups = contiguous_groups(n, params.value("groups", 3));
    } else {
      overlapping = true;
      groups = overlapping_groups(n, params.value("groups", 3), params.value("overlap", 1));
    }
    const int s = static_cast<int>(groups.size());
    VectorXd x_nat = VectorXd::Zero(n);
    const int active = std::max(1, params.value("active_groups", (s + 1) / 2));
    for (int i = 0; i < active && i < s; ++i)
      for (int j : groups[static_cast<size_t>(i)])
        x_nat[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
    const VectorXd b = a * x_nat + 0.1 * rng.normal_vector(p);
    const VectorXd weights = VectorXd::Constant(s, w);
    if (kind == "group-lasso-overlap-lifted") {
      out.inst = make_group_lasso_lifted(a, b, groups, weights);
      out.x0 = VectorXd::Zero(out.inst.dim);
    } else {
      out.inst = make_group_lasso(a, b, groups, weights, overlapping);
      out.x0 = VectorXd::Zero(n);
    }
    return out;
  }

  if (kind == "group-fused-lasso") {
    const int p = params.value("rows", 10);
    const int s = params.value("blocks", 4);
    const int r = params.value("block_size", 2);
    const int n = s * r;
    const MatrixXd a = rng.normal_matrix(p, n) / std::sqrt(static_cast<double>(p));
    VectorXd x_nat(n);
    double level = 1.0;
    for (int i = 0; i < s; ++i) {
      if (i > 0 && rng.uniform() < 0.5) level += rng.uniform(-1.0, 1.0);
      for (int l = 0; l < r; ++l) x_nat[i * r + l] = level;
    }
    const VectorXd b = a * x_nat + 0.1 * rng.normal_vector(p);
    out.inst = make_group_fused_lasso(a, b, contiguous_groups(n, s),
                                      VectorXd::Constant(s, params.value("weight", 0.3)),
                                      VectorXd::Constant(s, params.value("nu", 0.3)));
    out.x0 = VectorXd::Zero(n);
    return out;
  }

  if (kind == "soc-ls") {
    std::vector<int> dims;
    if (params.contains("cone_dims"))
      for (const auto& d : params.at("cone_dims")) dims.push_back(d.get<int>());
    else
      dims = {3, 3, 2};
    const int n = std::accumulate(dims.begin(), dims.end(), 0);
    const int p = params.value("rows", n + 2);
    const MatrixXd a = rng.normal_matrix(p, n) / std::sqrt(static_cast<double>(p));
    // Plant an unconstrained optimum with infeasible scalar parts so the
    // cones are active at the solution.
    VectorXd x_unc = rng.normal_vector(n);
    int at = 0;
    for (int d : dims) {
      x_unc[at + d - 1] = -0.1 - std::abs(rng.normal());
      at += d;
    }
    const VectorXd b = a * x_unc;
    out.inst = make_soc_constrained_ls(a, b, dims);
    out.x0 = VectorXd::Zero(n);
    return out;
  }

  if (kind == "ls-l1-nuclear") {
    const int m = params.value("m", 10);
    const int n = params.value("n", 8);
    const int p = params.value("rows", m * n);
    const double mu = params.value("mu", 0.1);
    const double nu = params.value("nu", 0.2);
    const MatrixXd amap =
        rng.normal_matrix(p, m * n) / std::sqrt(static_cast<double>(p));
    const MatrixXd x_nat = rng.normal_matrix(m, 2) * rng.normal_matrix(2, n);
    const VectorXd b =
        amap * Eigen::Map<const VectorXd>(x_nat.data(), x_nat.size()) +
        0.1 * rng.normal_vector(p);
    out.inst = make_ls_l1_nuclear(amap, b, mu, nu, m, n);
    out.x0 = VectorXd::Zero(m * n);
    return out;
  }

  if (kind == "entropy") {
    const int n = params.value("cols", 5);
    const int p = params.value("rows", 7);
    const MatrixXd a = rng.normal_matrix(p, n) / std::sqrt(static_cast<double>(p));
    VectorXd x_bar(n);
    for (int i = 0; i < n; ++i) x_bar[i] = 1.0 + rng.uniform();
    const VectorXd b = a * x_bar + 0.1 * rng.normal_vector(p);
    // Plant stationarity: v cancels the full gradient at x_bar.
    const VectorXd v = -(a.transpose() * (a * x_bar - b)) - entropy_penalty_gradient(x_bar);
    out.inst = make_entropy_regularized(a, b, v);
    out.x0 = x_bar;
    out.x_star = x_bar;
    out.f_star = out.inst.value(x_bar);
    out.default_sampling = "radial";
    out.suggested_r0 = 0.5;
    return out;
  }

  if (kind == "psd-ls") {
    const int n = params.value("n", 4);
    const int p = params.value("rows", 10);
    MatrixXd amap(p, n * n);
    for (int i = 0; i < p; ++i) {
      MatrixXd s = rng.normal_matrix(n, n);
      s = 0.5 * (s + s.transpose());
      amap.row(i) = Eigen::Map<const VectorXd>(s.data(), s.size()).transpose();
    }
    amap /= std::sqrt(static_cast<double>(p));
    MatrixXd q = rng.normal_matrix(n, n);
    const Eigen::HouseholderQR<MatrixXd> qr(q);
    const MatrixXd orth = qr.householderQ();
    VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam[i] = (i < n / 2) ? 1.0 + rng.uniform() : 0.0;
    const MatrixXd x_nat = orth * lam.asDiagonal() * orth.transpose();
    const VectorXd b =
        amap * Eigen::Map<const VectorXd>(x_nat.data(), x_nat.size()) +
        0.05 * rng.normal_vector(p);
    out.inst = make_psd_constrained(amap, b, MatrixXd::Zero(n, n), n);
    out.x0 = VectorXd::Zero(n * n);
    return out;
  }

  if (kind == "schatten") {
    const int n = params.value("n", 4);
    const int p = params.value("rows", 12);
    const double tau = params.value("tau", 0.5);
    const std::string ps = params.value("p", std::string("1"));
    SchattenP sp;
    if (ps == "1") sp = SchattenP::One;
    else if (ps == "2") sp = SchattenP::Two;
    else if (ps == "inf") sp = SchattenP::Inf;
    else throw std::invalid_argument("schatten: p must be 1, 2, or inf (closed-form prox cases)");
    MatrixXd amap(p, n * n);
    for (int i = 0; i < p; ++i) {
      MatrixXd s = rng.normal_matrix(n, n);
      s = 0.5 * (s + s.transpose());
      amap.row(i) = Eigen::Map<const VectorXd>(s.data(), s.size()).transpose();
    }
    amap /= std::sqrt(static_cast<double>(p));
    MatrixXd x_nat = rng.normal_matrix(n, 2);
    x_nat = x_nat * x_nat.transpose();
    const VectorXd b =
        amap * Eigen::Map<const VectorXd>(x_nat.data(), x_nat.size()) +
        0.05 * rng.normal_vector(p);
    out.inst = make_schatten(amap, b, MatrixXd::Zero(n, n), tau, sp, n);
    out.x0 = VectorXd::Zero(n * n);
    return out;
  }

  throw std::invalid_argument("unknown model kind: " + kind);
}

RankInstance make_rank_instance(std::uint64_t seed, int m, int n, int k, double offmix) {
  if (k < 1 || k > std::min(m, n) - 1)
    throw std::invalid_argument("rank instance: k must lie between 1 and min(m,n)-1");
  Rng rng(seed);
  RankInstance out;
  out.m = m;
  out.n = n;
  out.k = k;
  const int mn = m * n;
  out.amap = MatrixXd::Identity(mn, mn) +
             offmix * rng.normal_matrix(mn, mn) / std::sqrt(static_cast<double>(mn));
  out.x_star = rng.normal_matrix(m, k) * rng.normal_matrix(k, n);
  out.b = out.amap * Eigen::Map<const VectorXd>(out.x_star.data(), out.x_star.size());
  return out;
}

}  // namespace klx::models
