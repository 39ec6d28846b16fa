#include "chi2geo/error.hpp"
#include "chi2geo/spectral.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace chi2geo;
using chi2geo::testing::random_orthogonal;
using chi2geo::testing::symmetrize;

namespace {

Eigen::MatrixXd m2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

double span_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd pa = a * a.transpose();
  const Eigen::MatrixXd pb = b * b.transpose();
  return (pa - pb).norm();
}

}  // namespace

TEST_CASE("spectral_decompose: identity has unit eigenvalues and an orthonormal basis") {
  const auto dec = spectral_decompose(SymmetricOperator::identity(2));
  CHECK(dec.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(dec.eigenvalues(1) == doctest::Approx(1.0));
  const Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("spectral_decompose: rank-one projection onto (1,1)") {
  const SymmetricOperator m(m2(0.5, 0.5, 0.5, 0.5));
  const auto dec = spectral_decompose(m);
  CHECK(dec.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(dec.eigenvalues(1)) < 1e-15);
  const Eigen::Vector2d expected(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  CHECK((dec.eigenvectors.col(0) - expected).norm() < 1e-15);
  // M v = lambda v by direct multiplication
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd v = dec.eigenvectors.col(i);
    CHECK((m.matrix() * v - dec.eigenvalues(i) * v).norm() < 1e-15);
  }
}

TEST_CASE("spectral_decompose: diagonal input returns coordinate vectors") {
  const auto dec = spectral_decompose(SymmetricOperator::diagonal(Eigen::Vector2d(2.0, 0.0)));
  CHECK(dec.eigenvalues(0) == 2.0);
  CHECK(dec.eigenvalues(1) == 0.0);
  CHECK(dec.eigenvectors.isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("eigenvalues are sorted descending") {
  const auto dec = spectral_decompose(SymmetricOperator::diagonal(Eigen::Vector3d(0.0, 3.0, -1.0)));
  CHECK(dec.eigenvalues(0) == 3.0);
  CHECK(dec.eigenvalues(1) == 0.0);
  CHECK(dec.eigenvalues(2) == -1.0);
}

TEST_CASE("non-symmetric input is rejected with the asymmetry") {
  try {
    (void)SymmetricOperator(m2(1.0, 2.0, 0.0, 1.0));
    FAIL("expected NonSymmetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSymmetric);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  // Within 1e-12 relative the matrix is accepted and symmetrized.
  const SymmetricOperator ok(m2(1.0, 0.5 + 1e-13, 0.5, 1.0));
  CHECK(ok(0, 1) == ok(1, 0));
  CHECK_THROWS_AS(SymmetricOperator(Eigen::MatrixXd(2, 3)), Error);
  CHECK_THROWS_AS(SymmetricOperator(Eigen::MatrixXd(0, 0)), Error);
}

TEST_CASE("projection_onto examples") {
  const Subspace e1(2, Eigen::Vector2d(1.0, 0.0));
  CHECK(projection_onto(e1).matrix().isApprox(m2(1, 0, 0, 0)));

  const Subspace diag(2, Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0));
  CHECK((projection_onto(diag).matrix() - m2(0.5, 0.5, 0.5, 0.5)).norm() < 1e-15);

  const Subspace zero(3, Eigen::MatrixXd(3, 0));
  CHECK(zero.dim() == 0);
  CHECK(projection_onto(zero).matrix().isZero(0.0));
}

TEST_CASE("image and kernel examples") {
  const auto d110 = SymmetricOperator::diagonal(Eigen::Vector3d(1.0, 1.0, 0.0));
  const auto img = image_subspace(d110);
  const auto ker = kernel_subspace(d110);
  CHECK(img.dim() == 2);
  CHECK(ker.dim() == 1);
  CHECK(std::abs(ker.basis()(2, 0)) == doctest::Approx(1.0));

  const SymmetricOperator proj(m2(0.5, 0.5, 0.5, 0.5));
  const auto img2 = image_subspace(proj);
  const auto ker2 = kernel_subspace(proj);
  REQUIRE(img2.dim() == 1);
  REQUIRE(ker2.dim() == 1);
  CHECK(span_distance(img2.basis(), Eigen::Vector2d(1, 1) / std::sqrt(2.0)) < 1e-15);
  CHECK(span_distance(ker2.basis(), Eigen::Vector2d(1, -1) / std::sqrt(2.0)) < 1e-15);

  CHECK(image_subspace(SymmetricOperator::zero(3)).dim() == 0);
  CHECK(kernel_subspace(SymmetricOperator::zero(3)).dim() == 3);
  CHECK(kernel_subspace(SymmetricOperator::identity(3)).dim() == 0);
}

TEST_CASE("rank threshold is relative to the largest eigenvalue") {
  // 1e-6 is numerically zero next to 1e3 at tol 1e-8 * 1e3 = 1e-5.
  const auto big = SymmetricOperator::diagonal(Eigen::Vector2d(1e3, 1e-6));
  CHECK(image_subspace(big).dim() == 1);
  const auto small = SymmetricOperator::diagonal(Eigen::Vector2d(1e-3, 1e-6));
  CHECK(image_subspace(small).dim() == 2);
  CHECK_THROWS_AS((void)image_subspace(small, 0.0), Error);
}

TEST_CASE("random symmetric operators: reconstruction, orthonormality, oracle eigenvalues") {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + trial % 16;
    Eigen::MatrixXd raw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        raw(i, j) = unif(rng);
      }
    }
    const SymmetricOperator m(symmetrize(raw));
    const auto dec = spectral_decompose(m);

    const double scale = std::max(1.0, m.matrix().norm());
    CHECK((dec.reconstruct() - m.matrix()).norm() <= 1e-10 * scale);
    const Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
    for (Eigen::Index i = 1; i < n; ++i) {
      CHECK(dec.eigenvalues(i - 1) >= dec.eigenvalues(i));
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(dec.eigenvectors(i, k)) > 1e-12) {
          CHECK(dec.eigenvectors(i, k) > 0.0);
          break;
        }
      }
    }

    // Independent oracle: Eigen's self-adjoint solver (ascending order).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(m.matrix());
    const Eigen::VectorXd expected = oracle.eigenvalues().reverse();
    CHECK((dec.eigenvalues - expected).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("decomposition is deterministic") {
  std::mt19937_64 rng(7);
  const auto q = random_orthogonal(6, rng);
  Eigen::VectorXd lambda(6);
  lambda << 3, 1, 1, 0.5, 0, 0;
  const SymmetricOperator m(chi2geo::testing::with_spectrum(lambda, q));
  const auto a = spectral_decompose(m);
  const auto b = spectral_decompose(m);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("degenerate eigenvalue clusters are compared by span") {
  std::mt19937_64 rng(11);
  const auto q = random_orthogonal(5, rng);
  Eigen::VectorXd lambda(5);
  lambda << 2, 2, 2, 1, 1;
  const SymmetricOperator m(chi2geo::testing::with_spectrum(lambda, q));
  const auto dec = spectral_decompose(m);
  CHECK(span_distance(dec.eigenvectors.leftCols(3), q.leftCols(3)) < 1e-12);
  CHECK(span_distance(dec.eigenvectors.rightCols(2), q.rightCols(2)) < 1e-12);
}

TEST_CASE("image/kernel properties on random low-rank operators") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.2, 4.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 9;
    const Eigen::Index rank = trial % (n + 1);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < rank; ++i) {
      lambda(i) = (trial % 2 == 0 ? 1.0 : -1.0) * unif(rng);
    }
    const auto q = random_orthogonal(n, rng);
    const SymmetricOperator m(chi2geo::testing::with_spectrum(lambda, q));
    const auto dec = spectral_decompose(m);
    const auto img = image_subspace(dec);
    const auto ker = kernel_subspace(dec);
    CHECK(img.dim() == static_cast<std::size_t>(rank));
    CHECK(img.dim() + ker.dim() == static_cast<std::size_t>(n));
    if (img.dim() > 0 && ker.dim() > 0) {
      CHECK((img.basis().transpose() * ker.basis()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const double threshold = rank_threshold(dec, kDefaultTolerance);
    for (Eigen::Index j = 0; j < ker.basis().cols(); ++j) {
      CHECK((m.matrix() * ker.basis().col(j)).norm() <= threshold);
    }
  }
}

TEST_CASE("image of a projection recovers the subspace") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    const Eigen::Index k = trial % (n + 1);
    const auto q = random_orthogonal(n, rng);
    const Subspace w(static_cast<std::size_t>(n), q.leftCols(k));
    const auto p = projection_onto(w);
    const Eigen::MatrixXd& pm = p.matrix();
    CHECK((pm * pm - pm).norm() <= 1e-12 * static_cast<double>(n));
    const auto img = image_subspace(p, 1e-8);
    REQUIRE(img.dim() == w.dim());
    CHECK(span_distance(img.basis(), w.basis()) <= 1e-8);
  }
}

TEST_CASE("subspace rejects a non-orthonormal basis") {
  CHECK_THROWS_AS(Subspace(2, Eigen::Vector2d(1.0, 1.0)), Error);
  CHECK_THROWS_AS(Subspace(3, Eigen::Vector2d(1.0, 0.0)), Error);
}
