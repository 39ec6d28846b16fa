#pragma once

#include "chi2geo/gaussian.hpp"
#include "chi2geo/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace chi2geo {

struct ResidualCheck {
  bool passed = false;
  double residual = 0.0;
};

/// residual = ||C^2 - C||_F; passes iff residual <= tol * max(1, ||C||_F).
[[nodiscard]] ResidualCheck check_idempotent(const SymmetricOperator& c,
                                             double tol = kDefaultTolerance);

/// residual = ||C mu - mu||; passes iff residual <= tol * max(1, ||mu||).
[[nodiscard]] ResidualCheck check_mean_fixed(const SymmetricOperator& c,
                                             const Eigen::VectorXd& mu,
                                             double tol = kDefaultTolerance);

/// Eigenvalues within tol of 0, within tol of 1, and everything else.
struct EigenvaluePartition {
  std::vector<double> zeros;
  std::vector<double> ones;
  std::vector<double> others;
};

[[nodiscard]] EigenvaluePartition classify_eigenvalues(const SpectralDecomposition& dec,
                                                       double tol = kDefaultTolerance);

struct ChiSquareVerdict {
  bool is_chi_square = false;
  std::optional<int> df;     // Dim(W) = Rank(C), set iff is_chi_square
  std::optional<double> ncp; // nu = ||mu||, set iff is_chi_square
  bool degenerate = false;   // df == 0: ||X||^2 is identically 0

  double tol = kDefaultTolerance;
  double idempotency_residual = 0.0;
  double mean_residual = 0.0;
  std::vector<double> offending_eigenvalues;
  bool mean_outside_image = false;
  /// ||(I - P_image) mu||
  double mean_outside_norm = 0.0;
  /// sum of mu_i^2 over the unit eigenvalues
  double ncp_squared_from_eigenbasis = 0.0;
  std::size_t image_dim = 0;
  std::size_t ambient_dim = 0;
  /// max(max_i |lambda_i - nearest of {0, 1}|, ||C mu - mu||)
  double distance_to_projection = 0.0;
  std::vector<double> eigenvalues;

  /// Conventional noncentrality lambda = nu^2.
  [[nodiscard]] std::optional<double> ncp_lambda() const {
    if (!ncp) {
      return std::nullopt;
    }
    return *ncp * *ncp;
  }
};

/// ||X||^2 is chi-square iff C^2 = C and C mu = mu (equivalently C is the
/// orthogonal projection onto W = Image(C) and mu lies in W). A single
/// tolerance drives all three numerical checks, and any eigenvalue outside
/// the {0, 1} bands yields a "no" even if the Frobenius residual is small.
[[nodiscard]] ChiSquareVerdict characterize(const GaussianSpec& spec,
                                            double tol = kDefaultTolerance);

}  // namespace chi2geo
