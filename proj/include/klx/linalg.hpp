#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace klx::linalg {

/// Relative threshold used for every rank decision in the project.
inline constexpr double kRankThreshold = 1e-10;

struct SymEig {
  Eigen::VectorXd eigenvalues;  ///< descending
  Eigen::MatrixXd vectors;      ///< orthogonal, columns paired with eigenvalues
};

struct Svd {
  Eigen::MatrixXd u;                ///< m x m orthogonal
  Eigen::VectorXd singular_values;  ///< descending, nonnegative, length min(m,n)
  Eigen::MatrixXd v;                ///< n x n orthogonal
};

/// Symmetric eigendecomposition. Input must be square and symmetric to
/// 1e-12 * ||S||_F; throws std::invalid_argument otherwise.
SymEig eigh(const Eigen::Ref<const Eigen::MatrixXd>& s);

/// Full SVD with a deterministic sign convention (first significant entry of
/// each left singular vector is positive; paired right vectors flipped along).
Svd svd(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Nearest positive semidefinite matrix in Frobenius norm.
Eigen::MatrixXd project_psd(const Eigen::Ref<const Eigen::MatrixXd>& s);

/// Euclidean projection onto {(z, t) : ||z|| <= t}.
std::pair<Eigen::VectorXd, double> project_soc(
    const Eigen::Ref<const Eigen::VectorXd>& z, double t);

/// Minimum-norm least-squares solution; singular values below
/// kRankThreshold * sigma_max are treated as zero.
Eigen::VectorXd lstsq_min_norm(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b);

/// Squared spectral norm of a, estimated by 100 power iterations on a^T a
/// from a deterministic start vector.
double spectral_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Text fixture format: first line "rows cols", then row-major entries,
/// 17 significant digits. Round-trips doubles exactly.
void write_matrix_text(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix_text(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_text(std::istream& is);
Eigen::MatrixXd read_matrix_text(const std::string& path);

}  // namespace klx::linalg
