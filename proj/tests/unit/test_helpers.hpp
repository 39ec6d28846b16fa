#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace chi2geo::testing {

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = normal(rng);
    }
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

/// Q diag(lambda) Q^T with Q random orthogonal.
inline Eigen::MatrixXd with_spectrum(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& q) {
  return symmetrize(q * lambda.asDiagonal() * q.transpose());
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = normal(rng);
  }
  return v;
}

struct MeanCov {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
};

/// Orthogonal projection of rank k in R^n with mean of length nu inside its image.
inline MeanCov random_projection(Eigen::Index n, Eigen::Index k, double nu, std::mt19937_64& rng) {
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  MeanCov out;
  out.cov = symmetrize(q.leftCols(k) * q.leftCols(k).transpose());
  out.mu = Eigen::VectorXd::Zero(n);
  if (k > 0) {
    const Eigen::VectorXd coeff = random_vector(k, rng);
    out.mu = q.leftCols(k) * (coeff.normalized() * nu);
  }
  return out;
}

}  // namespace chi2geo::testing
