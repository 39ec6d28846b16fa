#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace chi2geo {

inline constexpr double kDefaultTolerance = 1e-8;

/// Real symmetric n x n operator. Construction checks the symmetry
/// invariant |m_ij - m_ji| <= 1e-12 * max(1, max|m|) and stores the exactly
/// symmetrized matrix (M + M^T) / 2.
class SymmetricOperator {
public:
  static constexpr double kSymmetryTolerance = 1e-12;

  /// Throws Error(NonSymmetric) reporting the max asymmetry, or
  /// Error(DimensionMismatch) for empty/non-square input.
  explicit SymmetricOperator(const Eigen::MatrixXd& entries);

  static SymmetricOperator identity(std::size_t n);
  static SymmetricOperator zero(std::size_t n);
  static SymmetricOperator diagonal(const Eigen::VectorXd& diag);

  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(m_.rows());
  }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

private:
  Eigen::MatrixXd m_;
};

/// Largest |m_ij - m_ji| over the matrix.
[[nodiscard]] double max_asymmetry(const Eigen::MatrixXd& m);

/// Eigenvalues sorted descending; eigenvectors are the matching columns.
/// Each eigenvector's first component with magnitude above 1e-12 is positive.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(eigenvalues.size());
  }
  [[nodiscard]] double max_abs_eigenvalue() const;
  [[nodiscard]] Eigen::MatrixXd reconstruct() const;
};

/// Orthonormal basis (columns of `basis`) of a subspace of R^ambient_dim.
/// A zero-dimensional subspace has a basis with zero columns.
class Subspace {
public:
  Subspace(std::size_t ambient_dim, Eigen::MatrixXd basis);

  [[nodiscard]] std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(basis_.cols());
  }
  [[nodiscard]] const Eigen::MatrixXd& basis() const noexcept { return basis_; }

  /// Component of v orthogonal to this subspace.
  [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& v) const;

private:
  std::size_t ambient_dim_;
  Eigen::MatrixXd basis_;
};

/// Cyclic Jacobi eigen-solver. Iterates until the off-diagonal Frobenius mass
/// is at most 1e-14 * ||M||_F; more than 100 n^2 sweeps raises
/// Error(ConvergenceFailure).
[[nodiscard]] SpectralDecomposition spectral_decompose(const SymmetricOperator& m);

[[nodiscard]] SymmetricOperator projection_onto(const Subspace& w);

/// Rank threshold used by image/kernel extraction: tol * max(1, max|lambda|).
[[nodiscard]] double rank_threshold(const SpectralDecomposition& dec, double tol);

[[nodiscard]] Subspace image_subspace(const SpectralDecomposition& dec,
                                      double tol = kDefaultTolerance);
[[nodiscard]] Subspace kernel_subspace(const SpectralDecomposition& dec,
                                       double tol = kDefaultTolerance);
[[nodiscard]] Subspace image_subspace(const SymmetricOperator& m,
                                      double tol = kDefaultTolerance);
[[nodiscard]] Subspace kernel_subspace(const SymmetricOperator& m,
                                       double tol = kDefaultTolerance);

}  // namespace chi2geo
