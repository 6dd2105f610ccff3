#include "klx/sdp_repr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "klx/io_util.hpp"
#include "klx/kl.hpp"
#include "klx/linalg.hpp"
#include "klx/rng.hpp"

namespace klx::sdp_repr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double min_eig(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s + s.transpose()));
  return es.eigenvalues().minCoeff();
}

bool psd_member(const MatrixXd& s) {
  return min_eig(s) >= -1e-9 * (1.0 + s.norm());
}

namespace {

double mat_dot(const MatrixXd& a, const MatrixXd& b) {
  return (a.array() * b.array()).sum();
}

// Symmetric vectorization with sqrt(2)-scaled off-diagonals: preserves the
// trace inner product, used for kernel computations.
VectorXd svec(const MatrixXd& s) {
  const Index d = s.rows();
  VectorXd v(d * (d + 1) / 2);
  Index at = 0;
  const double rt2 = std::sqrt(2.0);
  for (Index i = 0; i < d; ++i) {
    v[at++] = s(i, i);
    for (Index j = i + 1; j < d; ++j) v[at++] = rt2 * s(i, j);
  }
  return v;
}

MatrixXd unsvec(const VectorXd& v, Index d) {
  MatrixXd s(d, d);
  Index at = 0;
  const double rt2 = std::sqrt(2.0);
  for (Index i = 0; i < d; ++i) {
    s(i, i) = v[at++];
    for (Index j = i + 1; j < d; ++j) {
      s(i, j) = s(j, i) = v[at++] / rt2;
    }
  }
  return s;
}

}  // namespace

MatrixXd LmiAtom::lmi(const VectorXd& x, double t) const {
  MatrixXd m = a00 + t * a0;
  for (int j = 0; j < nvars; ++j) m += x[j] * ai[static_cast<size_t>(j)];
  return m;
}

bool LmiAtom::member(const VectorXd& x, double t) const { return psd_member(lmi(x, t)); }

LmiAtom atom_abs(int n, int coord, double weight) {
  LmiAtom atom;
  atom.dim = 2;
  atom.nvars = n;
  atom.a00 = MatrixXd::Zero(2, 2);
  atom.a0 = MatrixXd::Identity(2, 2);
  atom.ai.assign(static_cast<size_t>(n), MatrixXd::Zero(2, 2));
  atom.ai[static_cast<size_t>(coord)] << 0.0, weight, weight, 0.0;
  atom.slater_x = VectorXd::Zero(n);
  atom.slater_s = 1.0;
  atom.func = [coord, weight](const VectorXd& x) { return weight * std::abs(x[coord]); };
  return atom;
}

LmiAtom atom_l2(int n, const std::vector<int>& coords, double weight) {
  const int d = static_cast<int>(coords.size()) + 1;
  LmiAtom atom;
  atom.dim = d;
  atom.nvars = n;
  atom.a00 = MatrixXd::Zero(d, d);
  atom.a0 = MatrixXd::Identity(d, d);
  atom.ai.assign(static_cast<size_t>(n), MatrixXd::Zero(d, d));
  for (size_t l = 0; l < coords.size(); ++l) {
    MatrixXd& m = atom.ai[static_cast<size_t>(coords[l])];
    m(static_cast<Index>(l), d - 1) = weight;
    m(d - 1, static_cast<Index>(l)) = weight;
  }
  atom.slater_x = VectorXd::Zero(n);
  atom.slater_s = 1.0;
  atom.func = [coords, weight](const VectorXd& x) {
    double s = 0.0;
    for (int j : coords) s += x[j] * x[j];
    return weight * std::sqrt(s);
  };
  return atom;
}

LmiAtom atom_least_squares(const MatrixXd& a, const VectorXd& b) {
  const int p = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const int d = p + 1;
  const double rt2inv = 1.0 / std::sqrt(2.0);
  LmiAtom atom;
  atom.dim = d;
  atom.nvars = n;
  atom.a00 = MatrixXd::Zero(d, d);
  atom.a00.topLeftCorner(p, p).setIdentity();
  atom.a00.block(0, p, p, 1) = -rt2inv * b;
  atom.a00.block(p, 0, 1, p) = -rt2inv * b.transpose();
  atom.a0 = MatrixXd::Zero(d, d);
  atom.a0(p, p) = 1.0;
  atom.ai.assign(static_cast<size_t>(n), MatrixXd::Zero(d, d));
  for (int j = 0; j < n; ++j) {
    atom.ai[static_cast<size_t>(j)].block(0, p, p, 1) = rt2inv * a.col(j);
    atom.ai[static_cast<size_t>(j)].block(p, 0, 1, p) = rt2inv * a.col(j).transpose();
  }
  atom.slater_x = VectorXd::Zero(n);
  atom.slater_s = 0.5 * b.squaredNorm() + 1.0;
  atom.func = [a, b](const VectorXd& x) { return 0.5 * (a * x - b).squaredNorm(); };
  return atom;
}

MatrixXd LiftedSdp::assemble(const VectorXd& v) const {
  MatrixXd m = a00;
  for (size_t j = 0; j < coeff.size(); ++j) m += v[static_cast<Index>(j)] * coeff[j];
  return m;
}

bool LiftedSdp::member(const VectorXd& v) const { return psd_member(assemble(v)); }

double LiftedSdp::f_value(const VectorXd& x, const VectorXd& u, double t) const {
  VectorXd v(x.size() + u.size() + 1);
  v << x, u, t;
  return member(v) ? t : kInf;
}

VectorXd LiftedSdp::apply_map(const MatrixXd& w) const {
  VectorXd out(coeff.size());
  for (size_t j = 0; j < coeff.size(); ++j)
    out[static_cast<Index>(j)] = mat_dot(coeff[j], w);
  return out;
}

MatrixXd LiftedSdp::apply_adjoint(const VectorXd& v) const {
  MatrixXd m = MatrixXd::Zero(dim, dim);
  for (size_t j = 0; j < coeff.size(); ++j) m += v[static_cast<Index>(j)] * coeff[j];
  return m;
}

LiftedSdp lift_sum_lmi(const std::vector<LmiAtom>& atoms) {
  if (atoms.empty()) throw std::invalid_argument("lift_sum_lmi: no atoms");
  const int n = atoms[0].nvars;
  for (const auto& a : atoms)
    if (a.nvars != n)
      throw std::invalid_argument("lift_sum_lmi: atoms must share the variable dimension");
  const int m = static_cast<int>(atoms.size());
  int d = 1;
  std::vector<int> offsets{0};
  std::vector<int> sizes{1};
  for (const auto& a : atoms) {
    offsets.push_back(d);
    sizes.push_back(a.dim);
    d += a.dim;
  }

  LiftedSdp lift;
  lift.dim = d;
  lift.n = n;
  lift.nlift = m;
  lift.block_sizes = sizes;
  lift.a00 = MatrixXd::Zero(d, d);
  for (int i = 0; i < m; ++i)
    lift.a00.block(offsets[static_cast<size_t>(i + 1)], offsets[static_cast<size_t>(i + 1)],
                   atoms[static_cast<size_t>(i)].dim, atoms[static_cast<size_t>(i)].dim) =
        atoms[static_cast<size_t>(i)].a00;

  // x coefficients
  for (int j = 0; j < n; ++j) {
    MatrixXd c = MatrixXd::Zero(d, d);
    for (int i = 0; i < m; ++i)
      c.block(offsets[static_cast<size_t>(i + 1)], offsets[static_cast<size_t>(i + 1)],
              atoms[static_cast<size_t>(i)].dim, atoms[static_cast<size_t>(i)].dim) =
          atoms[static_cast<size_t>(i)].ai[static_cast<size_t>(j)];
    lift.coeff.push_back(c);
  }
  // s_i coefficients: -1 in the scalar block, the atom's A0 in its block
  for (int i = 0; i < m; ++i) {
    MatrixXd c = MatrixXd::Zero(d, d);
    c(0, 0) = -1.0;
    c.block(offsets[static_cast<size_t>(i + 1)], offsets[static_cast<size_t>(i + 1)],
            atoms[static_cast<size_t>(i)].dim, atoms[static_cast<size_t>(i)].dim) =
        atoms[static_cast<size_t>(i)].a0;
    lift.coeff.push_back(c);
  }
  // t coefficient
  MatrixXd ct = MatrixXd::Zero(d, d);
  ct(0, 0) = 1.0;
  lift.coeff.push_back(ct);

  // Joint strictly feasible point from the per-atom witnesses (shared x).
  const VectorXd xs = atoms[0].slater_x;
  for (const auto& a : atoms)
    if ((a.slater_x - xs).norm() > 1e-12)
      throw std::invalid_argument("lift_sum_lmi: atoms must share a strictly feasible x");
  VectorXd slater(n + m + 1);
  double ssum = 0.0;
  for (int i = 0; i < m; ++i) {
    slater[n + i] = atoms[static_cast<size_t>(i)].slater_s;
    ssum += atoms[static_cast<size_t>(i)].slater_s;
  }
  slater.head(n) = xs;
  slater[n + m] = ssum + 1.0;
  lift.slater = slater;

  std::vector<std::function<double(const VectorXd&)>> funcs;
  for (const auto& a : atoms) funcs.push_back(a.func);
  lift.represented = [funcs](const VectorXd& x) {
    double s = 0.0;
    for (const auto& f : funcs) s += f(x);
    return s;
  };
  lift.minimizing_lift = [funcs](const VectorXd& x) {
    VectorXd u(static_cast<Index>(funcs.size()));
    double t = 0.0;
    for (size_t i = 0; i < funcs.size(); ++i) {
      u[static_cast<Index>(i)] = funcs[i](x);
      t += u[static_cast<Index>(i)];
    }
    return std::make_pair(u, t);
  };
  // Each atom stays feasible when its epigraph variable grows (A0 >= 0), and
  // the scalar block needs t >= sum s_i.
  lift.random_feasible_lift = [funcs](const VectorXd& x, Rng& rng) {
    VectorXd u(static_cast<Index>(funcs.size()));
    for (size_t i = 0; i < funcs.size(); ++i)
      u[static_cast<Index>(i)] = funcs[i](x) + std::abs(rng.normal());
    return std::make_pair(u, u.sum() + std::abs(rng.normal()));
  };
  return lift;
}

LiftedSdp lift_quartic() {
  // Blocks [[1, u],[u, t]] and [[1, x],[x, u]]: u >= x^2 and t >= u^2, so the
  // infimum over (u, t) is x^4.
  LiftedSdp lift;
  lift.dim = 4;
  lift.n = 1;
  lift.nlift = 1;
  lift.block_sizes = {2, 2};
  lift.a00 = MatrixXd::Zero(4, 4);
  lift.a00(0, 0) = 1.0;
  lift.a00(2, 2) = 1.0;
  MatrixXd ax = MatrixXd::Zero(4, 4);
  ax(2, 3) = ax(3, 2) = 1.0;
  MatrixXd bu = MatrixXd::Zero(4, 4);
  bu(0, 1) = bu(1, 0) = 1.0;
  bu(3, 3) = 1.0;
  MatrixXd at = MatrixXd::Zero(4, 4);
  at(1, 1) = 1.0;
  lift.coeff = {ax, bu, at};
  lift.slater = VectorXd::Zero(3);
  lift.slater << 0.0, 1.0, 2.0;
  lift.represented = [](const VectorXd& x) { return std::pow(x[0], 4); };
  lift.minimizing_lift = [](const VectorXd& x) {
    VectorXd u(1);
    u[0] = x[0] * x[0];
    return std::make_pair(u, u[0] * u[0]);
  };
  lift.random_feasible_lift = [](const VectorXd& x, Rng& rng) {
    VectorXd u(1);
    u[0] = x[0] * x[0] + std::abs(rng.normal());
    return std::make_pair(u, u[0] * u[0] + std::abs(rng.normal()));
  };
  return lift;
}

ReducedBasis orthogonalize_basis(const LiftedSdp& lift) {
  ReducedBasis basis;
  const size_t total = lift.coeff.size();
  std::vector<MatrixXd> hat;  // orthogonal matrices from the non-t coefficients
  for (size_t j = 0; j + 1 < total; ++j) {
    MatrixXd r = lift.coeff[j];
    for (const MatrixXd& h : hat) r -= (mat_dot(h, lift.coeff[j]) / mat_dot(h, h)) * h;
    if (r.norm() > 1e-10 * (1.0 + lift.coeff[j].norm())) hat.push_back(r);
  }
  const MatrixXd& a0 = lift.coeff.back();
  MatrixXd r0 = a0;
  for (const MatrixXd& h : hat) r0 -= (mat_dot(h, a0) / mat_dot(h, h)) * h;
  if (r0.norm() <= 1e-10 * (1.0 + a0.norm()))
    throw std::invalid_argument(
        "orthogonalize_basis: objective coefficient lies in the span of the others "
        "(degenerate representation)");
  hat.push_back(r0);  // last, unscaled: its own coordinate is exactly 1

  const int p = static_cast<int>(hat.size()) - 1;
  MatrixXd u(p + 1, static_cast<Index>(total));
  for (size_t c = 0; c < total; ++c)
    for (int w = 0; w <= p; ++w)
      u(w, static_cast<Index>(c)) =
          mat_dot(hat[static_cast<size_t>(w)], lift.coeff[c]) /
          mat_dot(hat[static_cast<size_t>(w)], hat[static_cast<size_t>(w)]);

  // Kernel of the reduced map: null space of the svec rows of the basis.
  const Index d = lift.a00.rows();
  const Index dd = d * (d + 1) / 2;
  MatrixXd rows(p + 1, dd);
  for (int w = 0; w <= p; ++w) rows.row(w) = svec(hat[static_cast<size_t>(w)]).transpose();
  Eigen::JacobiSVD<MatrixXd> sv(rows, Eigen::ComputeFullV);
  const Index rank = p + 1;  // basis is orthogonal, hence full row rank
  std::vector<MatrixXd> kernel;
  for (Index j = rank; j < dd; ++j) kernel.push_back(unsvec(sv.matrixV().col(j), d));

  basis.hat = std::move(hat);
  basis.u = std::move(u);
  basis.kernel = std::move(kernel);
  return basis;
}

double ReducedPair::f1(const VectorXd& zt) const {
  return d1_member(zt) ? zt[zt.size() - 1] : kInf;
}

bool ReducedPair::d1_member(const VectorXd& zt) const {
  return psd_member(a00 + reduced_adjoint(zt));
}

MatrixXd ReducedPair::reduced_adjoint(const VectorXd& zt) const {
  MatrixXd m = MatrixXd::Zero(a00.rows(), a00.cols());
  for (size_t w = 0; w < hat.size(); ++w) m += zt[static_cast<Index>(w)] * hat[w];
  return m;
}

bool ReducedPair::d2_member(const MatrixXd& x) const {
  if (!psd_member(x)) return false;
  for (size_t i = 0; i < kernel.size(); ++i) {
    if (std::abs(mat_dot(kernel[i], x) - kernel_rhs[static_cast<Index>(i)]) >
        1e-9 * (1.0 + x.norm()))
      return false;
  }
  return true;
}

double ReducedPair::f2(const MatrixXd& x) const {
  if (!d2_member(x)) return kInf;
  const MatrixXd& hat0 = hat.back();
  return mat_dot(hat0, x) / mat_dot(hat0, hat0);
}

double ReducedPair::adjoint_gram_condition() const {
  double lo = kInf, hi = 0.0;
  for (const MatrixXd& h : hat) {
    const double g = mat_dot(h, h);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return hi / lo;
}

ReducedPair build_reduced_pair(const ReducedBasis& basis, const MatrixXd& a00) {
  ReducedPair pair;
  pair.a00 = a00;
  pair.hat = basis.hat;
  pair.kernel = basis.kernel;
  pair.kernel_rhs.resize(static_cast<Index>(basis.kernel.size()));
  for (size_t i = 0; i < basis.kernel.size(); ++i)
    pair.kernel_rhs[static_cast<Index>(i)] = mat_dot(basis.kernel[i], a00);
  const MatrixXd& hat0 = basis.hat.back();
  pair.offset = mat_dot(hat0, a00) / mat_dot(hat0, hat0);
  return pair;
}

void write_sdpa(const LiftedSdp& lift, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_sdpa: cannot open " + path);
  const int mvars = static_cast<int>(lift.coeff.size());
  std::vector<int> sizes = lift.block_sizes.empty() ? std::vector<int>{lift.dim}
                                                    : lift.block_sizes;
  os << mvars << "\n";
  os << sizes.size() << "\n";
  for (size_t i = 0; i < sizes.size(); ++i) os << (i ? " " : "") << sizes[i];
  os << "\n";
  // Objective: minimize t (the last variable).
  for (int j = 0; j < mvars; ++j) os << (j ? " " : "") << (j + 1 == mvars ? 1 : 0);
  os << "\n";
  std::vector<int> block_of(static_cast<size_t>(lift.dim));
  std::vector<int> start_of(static_cast<size_t>(lift.dim));
  {
    int at = 0, blk = 0;
    for (int s : sizes) {
      for (int r = 0; r < s; ++r) {
        block_of[static_cast<size_t>(at + r)] = blk;
        start_of[static_cast<size_t>(at + r)] = at;
      }
      at += s;
      ++blk;
    }
  }
  auto emit = [&](int matno, const MatrixXd& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = i; j < m.cols(); ++j) {
        if (m(i, j) == 0.0) continue;
        const int blk = block_of[static_cast<size_t>(i)];
        const int base = start_of[static_cast<size_t>(i)];
        os << matno << " " << blk + 1 << " " << i - base + 1 << " " << j - base + 1
           << " " << num17(m(i, j)) << "\n";
      }
  };
  emit(0, MatrixXd(-lift.a00));
  for (int j = 0; j < mvars; ++j) emit(j + 1, lift.coeff[static_cast<size_t>(j)]);
}

ScMargin check_sc_group(const MatrixXd& a, const VectorXd& b,
                        const models::GroupList& groups, const VectorXd& weights,
                        const VectorXd& xbar) {
  const VectorXd grad = a.transpose() * (a * xbar - b);
  const double thr = linalg::kRankThreshold * (1.0 + xbar.norm());
  ScMargin out;
  out.margin = kInf;
  bool any_inactive = false;
  for (size_t i = 0; i < groups.size(); ++i) {
    double xn = 0.0, gn = 0.0;
    for (int j : groups[i]) {
      xn += xbar[j] * xbar[j];
      gn += grad[j] * grad[j];
    }
    xn = std::sqrt(xn);
    gn = std::sqrt(gn);
    const double wi = weights[static_cast<Index>(i)];
    if (xn > thr && xn < 1e3 * thr) {
      out.warning = true;
      out.note = "support detection ambiguous at the rank threshold";
    }
    if (xn > thr) {
      // Active group: the subdifferential is a singleton; stationarity needs
      // grad_J = -w_i x_J / ||x_J||.
      double viol = 0.0;
      for (int j : groups[i]) {
        const double e = grad[j] + wi * xbar[j] / xn;
        viol += e * e;
      }
      if (std::sqrt(viol) > 1e-6 * (1.0 + gn)) {
        out.warning = true;
        out.note = "reference point not stationary on an active group";
      }
    } else {
      any_inactive = true;
      out.margin = std::min(out.margin, wi - gn);
    }
  }
  if (!any_inactive) {
    out.margin = 0.0;
    if (out.note.empty())
      out.note = "every group active; margin 0 by convention (singleton subdifferential)";
  }
  return out;
}

ScMargin check_sc_l1(const MatrixXd& a, const VectorXd& b, double mu, const VectorXd& xbar) {
  models::GroupList singletons;
  for (Index j = 0; j < xbar.size(); ++j) singletons.push_back({static_cast<int>(j)});
  return check_sc_group(a, b, singletons, VectorXd::Constant(xbar.size(), mu), xbar);
}

ScMargin check_sc_nuclear(const MatrixXd& amap, const VectorXd& b, double nu, int m, int n,
                          const MatrixXd& xbar) {
  const VectorXd xv = Eigen::Map<const VectorXd>(xbar.data(), xbar.size());
  const VectorXd gv = amap.transpose() * (amap * xv - b);
  const MatrixXd grad = Eigen::Map<const MatrixXd>(gv.data(), m, n);

  const linalg::Svd s = linalg::svd(xbar);
  ScMargin out;
  int rank = 0;
  if (s.singular_values.size() > 0 && s.singular_values[0] > 0.0) {
    const double cutoff = linalg::kRankThreshold * s.singular_values[0];
    for (Index i = 0; i < s.singular_values.size(); ++i) {
      if (s.singular_values[i] > cutoff) {
        ++rank;
        continue;
      }
      if (s.singular_values[i] > 1e-3 * cutoff && s.singular_values[i] <= cutoff) {
        out.warning = true;
        out.note = "rank detection ambiguous at the threshold";
      }
    }
  }
  const MatrixXd pplus = s.u.leftCols(rank);
  const MatrixXd qplus = s.v.leftCols(rank);
  const MatrixXd pzero = s.u.rightCols(m - rank);
  const MatrixXd qzero = s.v.rightCols(n - rank);

  if (rank > 0) {
    const MatrixXd inner = pplus.transpose() * (-grad / nu) * qplus;
    if ((inner - MatrixXd::Identity(rank, rank)).norm() > 1e-6 * (1.0 + inner.norm())) {
      out.warning = true;
      out.note = "reference point not stationary on the positive singular block";
    }
  }
  const MatrixXd w0 = -pzero.transpose() * grad * qzero / nu;
  const double w0_norm =
      (w0.size() > 0) ? linalg::svd(w0).singular_values[0] : 0.0;
  out.margin = 1.0 - w0_norm;
  return out;
}

ErrorBoundFit error_bound_probe(const MatrixXd& c, const std::vector<MatrixXd>& hs,
                                const VectorXd& h_rhs,
                                const std::function<MatrixXd(const MatrixXd&)>& project_argmin,
                                double g_star, const std::vector<MatrixXd>& samples) {
  std::vector<double> gaps, dists;
  for (const MatrixXd& x : samples) {
    if (!psd_member(x)) continue;
    bool feasible = true;
    for (size_t i = 0; i < hs.size(); ++i) {
      if (std::abs(mat_dot(hs[i], x) - h_rhs[static_cast<Index>(i)]) >
          1e-9 * (1.0 + x.norm())) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    const double gap = mat_dot(c, x) - g_star;
    if (!(gap > 1e-12 * (1.0 + std::abs(g_star)))) continue;
    const double dist = (x - project_argmin(x)).norm();
    if (!(dist > 0.0) || !std::isfinite(dist)) continue;
    gaps.push_back(gap);
    dists.push_back(dist);
  }
  if (gaps.size() < 20)
    throw kl::EstimatorError("error_bound_probe: too few feasible samples");

  double gmin = gaps[0], gmax = gaps[0];
  for (double g : gaps) {
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  if (!(gmax > gmin))
    throw kl::EstimatorError("error_bound_probe: degenerate gap range");
  constexpr int kBins = 20;
  const double lo = std::log(gmin), width = (std::log(gmax) - lo) / kBins;
  std::vector<double> bin_dist(kBins, 0.0), bin_gap(kBins, 0.0);
  for (size_t i = 0; i < gaps.size(); ++i) {
    int bin = static_cast<int>((std::log(gaps[i]) - lo) / width);
    bin = std::clamp(bin, 0, kBins - 1);
    if (dists[i] > bin_dist[static_cast<size_t>(bin)]) {
      bin_dist[static_cast<size_t>(bin)] = dists[i];
      bin_gap[static_cast<size_t>(bin)] = gaps[i];
    }
  }
  std::vector<double> xs, ys;
  for (int bIdx = 0; bIdx < kBins; ++bIdx) {
    if (bin_dist[static_cast<size_t>(bIdx)] <= 0.0) continue;
    xs.push_back(std::log(bin_gap[static_cast<size_t>(bIdx)]));
    ys.push_back(std::log(bin_dist[static_cast<size_t>(bIdx)]));
  }
  if (xs.size() < 3)
    throw kl::EstimatorError("error_bound_probe: fewer than 3 populated bins");
  const auto [slope, intercept] = kl::theil_sen(xs, ys);
  (void)intercept;
  ErrorBoundFit fit;
  fit.slope = slope;
  fit.r2 = kl::ols_r2(xs, ys);
  fit.n_used = static_cast<int>(gaps.size());
  return fit;
}

double NuclearLift::f(const MatrixXd& x) const {
  const VectorXd xv = Eigen::Map<const VectorXd>(x.data(), x.size());
  return 0.5 * (amap * xv - b).squaredNorm() + mu * x.cwiseAbs().sum() +
         nu * linalg::svd(x).singular_values.sum();
}

double NuclearLift::lifted(const MatrixXd& x, const MatrixXd& u, const MatrixXd& v) const {
  MatrixXd z(m + n, m + n);
  z.topLeftCorner(m, m) = u;
  z.topRightCorner(m, n) = x;
  z.bottomLeftCorner(n, m) = x.transpose();
  z.bottomRightCorner(n, n) = v;
  if (!psd_member(z)) return kInf;
  const VectorXd xv = Eigen::Map<const VectorXd>(x.data(), x.size());
  return 0.5 * (amap * xv - b).squaredNorm() + mu * x.cwiseAbs().sum() +
         0.5 * nu * (u.trace() + v.trace());
}

std::pair<MatrixXd, MatrixXd> NuclearLift::minimizing_uv(const MatrixXd& x) const {
  const linalg::Svd s = linalg::svd(x);
  const Index k = s.singular_values.size();
  const MatrixXd u =
      s.u.leftCols(k) * s.singular_values.asDiagonal() * s.u.leftCols(k).transpose();
  const MatrixXd v =
      s.v.leftCols(k) * s.singular_values.asDiagonal() * s.v.leftCols(k).transpose();
  return {u, v};
}

PlantedLasso make_planted_lasso(std::uint64_t seed, int p, int n, int support, double mu,
                                double rho_frac) {
  if (p < n) throw std::invalid_argument("planted lasso: need p >= n");
  if (support < 1 || support > n) throw std::invalid_argument("planted lasso: bad support");
  Rng rng(seed);
  PlantedLasso out;
  out.mu = mu;
  out.a = rng.normal_matrix(p, n) / std::sqrt(static_cast<double>(p));
  out.xbar = VectorXd::Zero(n);
  for (int j = 0; j < support; ++j)
    out.xbar[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
  VectorXd rho(n);
  for (int j = 0; j < n; ++j) {
    if (j < support)
      rho[j] = mu * (out.xbar[j] > 0 ? 1.0 : -1.0);
    else
      rho[j] = rho_frac * mu * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  }
  // Want a^T (a xbar - b) = -rho: put w = -a (a^T a)^{-1} rho and b = a xbar - w.
  const VectorXd y = linalg::lstsq_min_norm(out.a.transpose() * out.a, rho);
  const VectorXd w = -out.a * y;
  out.b = out.a * out.xbar - w;
  out.margin = mu * (1.0 - rho_frac);
  return out;
}

PlantedNuclear make_planted_nuclear(std::uint64_t seed, int m, int n, int r, double nu,
                                    double w_norm) {
  if (r < 0 || r > std::min(m, n)) throw std::invalid_argument("planted nuclear: bad rank");
  Rng rng(seed);
  PlantedNuclear out;
  out.m = m;
  out.n = n;
  out.nu = nu;
  const Eigen::HouseholderQR<MatrixXd> qrp(rng.normal_matrix(m, m));
  const Eigen::HouseholderQR<MatrixXd> qrq(rng.normal_matrix(n, n));
  const MatrixXd pfull = qrp.householderQ();
  const MatrixXd qfull = qrq.householderQ();
  VectorXd sig(r);
  for (int i = 0; i < r; ++i) sig[i] = 1.0 + rng.uniform();
  out.xbar = pfull.leftCols(r) * sig.asDiagonal() * qfull.leftCols(r).transpose();

  MatrixXd w0 = MatrixXd::Zero(m - r, n - r);
  if (w_norm > 0.0 && (m - r) > 0 && (n - r) > 0) {
    w0 = rng.normal_matrix(m - r, n - r);
    w0 *= w_norm / linalg::svd(w0).singular_values[0];
  }
  const MatrixXd grad =
      -nu * (pfull.leftCols(r) * qfull.leftCols(r).transpose() +
             pfull.rightCols(m - r) * w0 * qfull.rightCols(n - r).transpose());
  // Identity map: gradient at xbar is xbar - B, so B = xbar - grad.
  out.amap = MatrixXd::Identity(m * n, m * n);
  const MatrixXd bmat = out.xbar - grad;
  out.b = Eigen::Map<const VectorXd>(bmat.data(), bmat.size());
  out.margin = 1.0 - w_norm;
  return out;
}

}  // namespace klx::sdp_repr
