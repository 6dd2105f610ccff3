#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "klx/linalg.hpp"
#include "klx/rng.hpp"
#include "oracles.hpp"

using namespace klx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_symmetric(Rng& rng, int n) {
  MatrixXd m = rng.normal_matrix(n, n);
  return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("eigh: identity and diagonal") {
  const auto e = linalg::eigh(MatrixXd::Identity(3, 3));
  CHECK(e.eigenvalues.isApprox(VectorXd::Ones(3)));
  CHECK((e.vectors.transpose() * e.vectors - MatrixXd::Identity(3, 3)).norm() <= 1e-10 * 3);

  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const auto e2 = linalg::eigh(d);
  CHECK(e2.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(e2.eigenvalues[1] == doctest::Approx(1.0));
}

TEST_CASE("eigh: reconstruction and orthogonality on random symmetric input") {
  Rng rng(42);
  const MatrixXd s = random_symmetric(rng, 5);
  const auto e = linalg::eigh(s);
  const MatrixXd rec = e.vectors * e.eigenvalues.asDiagonal() * e.vectors.transpose();
  CHECK((rec - s).norm() <= 1e-9 * s.norm());
  CHECK((e.vectors.transpose() * e.vectors - MatrixXd::Identity(5, 5)).norm() <= 1e-10 * 5);
  for (int i = 0; i + 1 < 5; ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i + 1]);
}

TEST_CASE("eigh: rejects asymmetric and non-square input") {
  MatrixXd bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(linalg::eigh(bad), std::invalid_argument);
  CHECK_THROWS_AS(linalg::eigh(MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("svd: zero and diagonal cases") {
  const auto z = linalg::svd(MatrixXd::Zero(3, 2));
  CHECK(z.singular_values.isZero(0.0));

  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  const auto s = linalg::svd(d);
  CHECK(s.singular_values[0] == doctest::Approx(2.0));
  CHECK(s.singular_values[1] == doctest::Approx(1.0));
}

TEST_CASE("svd: reconstruction on random 6x4 input") {
  Rng rng(7);
  const MatrixXd a = rng.normal_matrix(6, 4);
  const auto s = linalg::svd(a);
  MatrixXd sigma = MatrixXd::Zero(6, 4);
  for (int i = 0; i < 4; ++i) sigma(i, i) = s.singular_values[i];
  CHECK((s.u * sigma * s.v.transpose() - a).norm() <= 1e-9 * a.norm());
  CHECK((s.u.transpose() * s.u - MatrixXd::Identity(6, 6)).norm() <= 1e-10 * 6);
  CHECK((s.v.transpose() * s.v - MatrixXd::Identity(4, 4)).norm() <= 1e-10 * 4);
  for (int i = 0; i + 1 < 4; ++i) CHECK(s.singular_values[i] >= s.singular_values[i + 1]);
}

TEST_CASE("project_psd: identity on PSD input, clips negative eigenvalues") {
  Rng rng(3);
  MatrixXd g = rng.normal_matrix(3, 3);
  const MatrixXd psd = g * g.transpose();
  CHECK((linalg::project_psd(psd) - psd).norm() <= 1e-9 * psd.norm());

  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  MatrixXd expect = MatrixXd::Zero(2, 2);
  expect(0, 0) = 1.0;
  CHECK((linalg::project_psd(d) - expect).norm() <= 1e-12);
}

TEST_CASE("project_psd: matches the independent Jacobi-eigendecomposition oracle") {
  Rng rng(11);
  const MatrixXd s = random_symmetric(rng, 4);
  const MatrixXd ours = linalg::project_psd(s);
  const MatrixXd ref = oracle::project_psd_jacobi(s);
  CHECK((ours - ref).norm() <= 1e-9 * (1.0 + s.norm()));
}

TEST_CASE("project_psd: idempotent and 1-Lipschitz on random pairs") {
  Rng rng(17);
  for (int t = 0; t < 25; ++t) {
    const MatrixXd s1 = random_symmetric(rng, 4);
    const MatrixXd s2 = random_symmetric(rng, 4);
    const MatrixXd p1 = linalg::project_psd(s1);
    const MatrixXd p2 = linalg::project_psd(s2);
    CHECK((linalg::project_psd(p1) - p1).norm() <= 1e-9 * (1.0 + p1.norm()));
    CHECK((p1 - p2).norm() <= (s1 - s2).norm() + 1e-12);
  }
}

TEST_CASE("project_soc: interior, polar cone, and boundary formula") {
  VectorXd z0 = VectorXd::Zero(2);
  auto [z1, t1] = linalg::project_soc(z0, 1.0);
  CHECK(z1.isZero());
  CHECK(t1 == doctest::Approx(1.0));

  VectorXd z(2);
  z << 1.0, 1.0;
  auto [z2, t2] = linalg::project_soc(z, -z.norm() - 1.0);
  CHECK(z2.isZero());
  CHECK(t2 == 0.0);

  VectorXd z3(2);
  z3 << 3.0, 0.0;
  auto [z4, t4] = linalg::project_soc(z3, 1.0);
  CHECK(z4[0] == doctest::Approx(2.0));
  CHECK(z4[1] == doctest::Approx(0.0));
  CHECK(t4 == doctest::Approx(2.0));
}

TEST_CASE("project_soc: closed form matches grid minimization of the distance") {
  // Project (3, 0; 1): scan points on the cone boundary z = (r, 0), t = r.
  VectorXd z(2);
  z << 3.0, 0.0;
  const double t = 1.0;
  auto dist = [&](double r) {
    return (z[0] - r) * (z[0] - r) + (t - r) * (t - r);
  };
  const double r_star = oracle::grid_min_1d(dist, 0.0, 4.0, 400000);
  auto [zp, tp] = linalg::project_soc(z, t);
  CHECK(zp[0] == doctest::Approx(r_star).epsilon(1e-4));
  CHECK(tp == doctest::Approx(r_star).epsilon(1e-4));
}

TEST_CASE("project_soc: output feasible and idempotent on random input") {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    const VectorXd z = 3.0 * rng.normal_vector(4);
    const double s = 3.0 * rng.normal();
    auto [zp, tp] = linalg::project_soc(z, s);
    CHECK(zp.norm() <= tp + 1e-12);
    auto [z2, t2] = linalg::project_soc(zp, tp);
    CHECK((z2 - zp).norm() + std::abs(t2 - tp) <= 1e-12);
  }
}

TEST_CASE("lstsq_min_norm: identity, symmetric split, normal-equations oracle") {
  const VectorXd b = VectorXd::LinSpaced(3, 1.0, 3.0);
  CHECK((linalg::lstsq_min_norm(MatrixXd::Identity(3, 3), b) - b).norm() <= 1e-12);

  MatrixXd wide(1, 2);
  wide << 1.0, 1.0;
  VectorXd rhs(1);
  rhs << 2.0;
  const VectorXd x = linalg::lstsq_min_norm(wide, rhs);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));

  Rng rng(9);
  const MatrixXd a = rng.normal_matrix(5, 3);
  const VectorXd y = rng.normal_vector(5);
  const VectorXd sol = linalg::lstsq_min_norm(a, y);
  const VectorXd ne = (a.transpose() * a).ldlt().solve(a.transpose() * y);
  CHECK((sol - ne).norm() <= 1e-9 * (1.0 + ne.norm()));
}

TEST_CASE("matrix text format round-trips to 17 significant digits") {
  Rng rng(31);
  const MatrixXd m = rng.normal_matrix(3, 4) * 1e-7;
  std::stringstream ss;
  linalg::write_matrix_text(ss, m);
  const MatrixXd back = linalg::read_matrix_text(ss);
  CHECK(back.rows() == 3);
  CHECK(back.cols() == 4);
  CHECK((back - m).norm() == 0.0);
}

TEST_CASE("spectral_norm_sq matches the largest squared singular value") {
  Rng rng(5);
  const MatrixXd a = rng.normal_matrix(6, 4);
  const double sq = linalg::spectral_norm_sq(a);
  const double ref = linalg::svd(a).singular_values[0];
  CHECK(sq == doctest::Approx(ref * ref).epsilon(1e-8));
}
