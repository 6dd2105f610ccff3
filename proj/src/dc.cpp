#include "klx/dc.hpp"

#include <cmath>
#include <stdexcept>

#include "klx/models.hpp"

namespace klx::dc {

using Eigen::Index;
using Eigen::VectorXd;

double p2_value(const DcModel& m, const VectorXd& u) {
  return (m.p2_kind == P2Kind::L2) ? m.nu * u.norm() : m.nu * u.lpNorm<1>();
}

double p2_conjugate(const DcModel& m, const VectorXd& y) {
  const double r = (m.p2_kind == P2Kind::L2) ? y.norm() : y.lpNorm<Eigen::Infinity>();
  return (r <= m.nu * (1.0 + 1e-12)) ? 0.0 : kInf;
}

VectorXd argmin_y(const DcModel& m, const VectorXd& x) {
  const VectorXd u = m.amap * x;
  if (m.p2_kind == P2Kind::L2) {
    const double n = u.norm();
    if (n == 0.0) return VectorXd::Zero(u.size());
    return (m.nu / n) * u;
  }
  VectorXd y(u.size());
  for (Index i = 0; i < u.size(); ++i)
    y[i] = (u[i] > 0.0) ? m.nu : (u[i] < 0.0 ? -m.nu : 0.0);
  return y;
}

double f_value(const DcModel& m, const VectorXd& x) {
  return m.p1.value(x) - p2_value(m, m.amap * x);
}

double lifted_value(const DcModel& m, const VectorXd& x, const VectorXd& y) {
  const double conj = p2_conjugate(m, y);
  if (!std::isfinite(conj)) return kInf;
  return m.p1.value(x) - (m.amap * x).dot(y) + conj;
}

VectorXd project_dual_ball(const DcModel& m, VectorXd y) {
  if (m.p2_kind == P2Kind::L2) {
    const double n = y.norm();
    if (n > m.nu) y *= m.nu / n;
    return y;
  }
  for (Index i = 0; i < y.size(); ++i) y[i] = std::clamp(y[i], -m.nu, m.nu);
  return y;
}

double joint_residual(const DcModel& m, const VectorXd& x, const VectorXd& y) {
  const VectorXd shift = m.p1.gradient(x) - m.amap.transpose() * y;
  double rx;
  if (m.p1.has_subgrad_dist())
    rx = m.p1.nonsmooth.subgrad_dist(x, shift);
  else if (!m.p1.nonsmooth.value)
    rx = shift.norm();
  else
    throw std::invalid_argument("joint_residual: P1 lacks a subgradient oracle");

  const VectorXd u = m.amap * x;
  double ry2 = 0.0;
  if (m.p2_kind == P2Kind::L2) {
    const double n = y.norm();
    if (n < m.nu * (1.0 - 1e-9)) {
      ry2 = u.squaredNorm();
    } else {
      const VectorXd yhat = y / n;
      const double t = std::max(0.0, u.dot(yhat));
      ry2 = (t * yhat - u).squaredNorm();
    }
  } else {
    for (Index i = 0; i < y.size(); ++i) {
      double c;
      if (y[i] >= m.nu * (1.0 - 1e-9))
        c = std::min(u[i], 0.0);  // normal cone [0, inf)
      else if (y[i] <= -m.nu * (1.0 - 1e-9))
        c = std::max(u[i], 0.0);  // normal cone (-inf, 0]
      else
        c = u[i];
      ry2 += c * c;
    }
  }
  return std::sqrt(rx * rx + ry2);
}

double f_residual(const DcModel& m, const VectorXd& x) {
  const VectorXd shift = m.p1.gradient(x) - m.amap.transpose() * argmin_y(m, x);
  if (m.p1.has_subgrad_dist()) return m.p1.nonsmooth.subgrad_dist(x, shift);
  if (!m.p1.nonsmooth.value) return shift.norm();
  throw std::invalid_argument("f_residual: P1 lacks a subgradient oracle");
}

ProblemInstance f_instance(const DcModel& m) {
  ProblemInstance inst;
  inst.dim = m.p1.dim;
  inst.nonsmooth.value = [m](const VectorXd& x) { return f_value(m, x); };
  inst.nonsmooth.subgrad_dist = [m](const VectorXd& x, const VectorXd& w) {
    // The instance has no smooth part, so w is the zero shift.
    (void)w;
    return f_residual(m, x);
  };
  inst.meta.name = m.p1.meta.name + "-minus-" +
                   (m.p2_kind == P2Kind::L2 ? std::string("l2") : std::string("l1"));
  inst.meta.convex = false;
  inst.meta.certification = "measured only; no certified exponent for this family";
  inst.bounded_below = true;
  return inst;
}

ProblemInstance joint_instance(const DcModel& m) {
  const Index nx = m.p1.dim;
  const Index ny = m.amap.rows();
  ProblemInstance inst;
  inst.dim = nx + ny;
  inst.nonsmooth.value = [m, nx, ny](const VectorXd& z) {
    return lifted_value(m, z.head(nx), z.tail(ny));
  };
  inst.nonsmooth.subgrad_dist = [m, nx, ny](const VectorXd& z, const VectorXd& w) {
    (void)w;
    return joint_residual(m, z.head(nx), z.tail(ny));
  };
  inst.domain_project = [m, nx, ny](const VectorXd& z) {
    VectorXd out = z;
    out.tail(ny) = project_dual_ball(m, VectorXd(z.tail(ny)));
    return out;
  };
  inst.meta.name = "dc-majorant";
  inst.meta.convex = false;
  return inst;
}

TransferReport dc_transfer_experiment(const DcModel& m, const VectorXd& x_bar,
                                      kl::SampleOpts opts) {
  TransferReport rep;
  const double f_star = f_value(m, x_bar);
  rep.alpha_f = kl::estimate_exponent(kl::sample_around(f_instance(m), x_bar, f_star, opts));

  const VectorXd y_bar = argmin_y(m, x_bar);
  VectorXd z_bar(x_bar.size() + y_bar.size());
  z_bar << x_bar, y_bar;
  opts.seed ^= 0x5bd1e995;  // independent draws for the joint cloud
  rep.alpha_joint =
      kl::estimate_exponent(kl::sample_around(joint_instance(m), z_bar, f_star, opts));
  rep.consistent = rep.alpha_f.alpha_hat <= rep.alpha_joint.alpha_hat + 0.05;
  return rep;
}

DcModel make_l12(const Eigen::MatrixXd& a, const VectorXd& b, double mu, double nu) {
  const Index n = a.cols();
  models::GroupList singletons;
  for (Index j = 0; j < n; ++j) singletons.push_back({static_cast<int>(j)});
  DcModel m;
  m.p1 = models::make_group_lasso(a, b, singletons, VectorXd::Constant(n, mu), false);
  m.p1.meta.name = "lasso";
  m.p2_kind = P2Kind::L2;
  m.nu = nu;
  m.amap = Eigen::MatrixXd::Identity(n, n);
  return m;
}

}  // namespace klx::dc
