#include "klx/linalg.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "klx/io_util.hpp"

namespace klx::linalg {

namespace {

void require_symmetric(const Eigen::Ref<const Eigen::MatrixXd>& s,
                       const char* who) {
  if (s.rows() != s.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  const double scale = s.norm();
  if ((s - s.transpose()).norm() > 1e-12 * std::max(scale, 1.0))
    throw std::invalid_argument(std::string(who) + ": matrix must be symmetric");
}

// Flip sign so the first entry with magnitude above tol is positive.
// Returns +1/-1 applied.
double sign_fix(Eigen::Ref<Eigen::VectorXd> col) {
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (std::abs(col[i]) > 1e-12) {
      if (col[i] < 0.0) {
        col = -col;
        return -1.0;
      }
      return 1.0;
    }
  }
  return 1.0;
}

}  // namespace

SymEig eigh(const Eigen::Ref<const Eigen::MatrixXd>& s) {
  require_symmetric(s, "eigh");
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigh: eigendecomposition did not converge");
  SymEig out;
  // Eigen returns ascending order; the project convention is descending.
  out.eigenvalues = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

Svd svd(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (!a.allFinite()) throw std::invalid_argument("svd: non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Svd out;
  out.u = solver.matrixU();
  out.v = solver.matrixV();
  out.singular_values = solver.singularValues();
  const Eigen::Index k = out.singular_values.size();
  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    const double s = sign_fix(out.u.col(j));
    if (j < k && j < out.v.cols() && s < 0) out.v.col(j) = -out.v.col(j);
  }
  for (Eigen::Index j = k; j < out.v.cols(); ++j) sign_fix(out.v.col(j));
  return out;
}

Eigen::MatrixXd project_psd(const Eigen::Ref<const Eigen::MatrixXd>& s) {
  const SymEig e = eigh(s);
  const Eigen::VectorXd clipped = e.eigenvalues.cwiseMax(0.0);
  Eigen::MatrixXd p = e.vectors * clipped.asDiagonal() * e.vectors.transpose();
  return 0.5 * (p + p.transpose());
}

std::pair<Eigen::VectorXd, double> project_soc(
    const Eigen::Ref<const Eigen::VectorXd>& z, double t) {
  const double nz = z.norm();
  if (nz <= t) return {z, t};
  if (nz <= -t) return {Eigen::VectorXd::Zero(z.size()), 0.0};
  const double alpha = 0.5 * (nz + t);
  return {(alpha / nz) * z, alpha};
}

Eigen::VectorXd lstsq_min_norm(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("lstsq_min_norm: non-finite input");
  if (a.rows() != b.size())
    throw std::invalid_argument("lstsq_min_norm: dimension mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sig = solver.singularValues();
  if (sig.size() == 0 || sig[0] == 0.0) return Eigen::VectorXd::Zero(a.cols());
  const double cutoff = kRankThreshold * sig[0];
  Eigen::VectorXd coeff = solver.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < sig.size(); ++i)
    coeff[i] = (sig[i] > cutoff) ? coeff[i] / sig[i] : 0.0;
  return solver.matrixV() * coeff;
}

double spectral_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols());
  v.normalize();
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double nw = w.norm();
    if (nw < 1e-300) return 0.0;
    v = w / nw;
  }
  return (a * v).squaredNorm();
}

void write_matrix_text(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << " ";
      os << num17(m(i, j));
    }
    os << "\n";
  }
}

void write_matrix_text(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_text: cannot open " + path);
  write_matrix_text(os, m);
}

Eigen::MatrixXd read_matrix_text(std::istream& is) {
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw std::runtime_error("read_matrix_text: bad header");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(is >> m(i, j)))
        throw std::runtime_error("read_matrix_text: truncated data");
  return m;
}

Eigen::MatrixXd read_matrix_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_matrix_text: cannot open " + path);
  return read_matrix_text(is);
}

}  // namespace klx::linalg
