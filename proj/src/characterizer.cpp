#include "chi2geo/characterizer.hpp"

#include "chi2geo/error.hpp"

#include <algorithm>
#include <cmath>

namespace chi2geo {

ResidualCheck check_idempotent(const SymmetricOperator& c, double tol) {
  const Eigen::MatrixXd& m = c.matrix();
  const double residual = (m * m - m).norm();
  return {residual <= tol * std::max(1.0, m.norm()), residual};
}

ResidualCheck check_mean_fixed(const SymmetricOperator& c, const Eigen::VectorXd& mu,
                               double tol) {
  if (static_cast<std::size_t>(mu.size()) != c.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "mean length must match the operator dimension");
  }
  const double residual = (c.matrix() * mu - mu).norm();
  return {residual <= tol * std::max(1.0, mu.norm()), residual};
}

EigenvaluePartition classify_eigenvalues(const SpectralDecomposition& dec, double tol) {
  EigenvaluePartition part;
  for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
    const double lambda = dec.eigenvalues(i);
    if (std::abs(lambda) <= tol) {
      part.zeros.push_back(lambda);
    } else if (std::abs(lambda - 1.0) <= tol) {
      part.ones.push_back(lambda);
    } else {
      part.others.push_back(lambda);
    }
  }
  return part;
}

ChiSquareVerdict characterize(const GaussianSpec& spec, double tol) {
  if (!(tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }
  const auto& dec = spec.decomposition();
  const Eigen::VectorXd& mu = spec.mu();

  ChiSquareVerdict v;
  v.tol = tol;
  v.ambient_dim = spec.dim();
  v.eigenvalues.assign(dec.eigenvalues.data(), dec.eigenvalues.data() + dec.eigenvalues.size());

  const auto idem = check_idempotent(spec.cov(), tol);
  const auto fixed = check_mean_fixed(spec.cov(), mu, tol);
  const auto part = classify_eigenvalues(dec, tol);
  v.idempotency_residual = idem.residual;
  v.mean_residual = fixed.residual;
  v.offending_eigenvalues = part.others;

  const Subspace image = image_subspace(dec, tol);
  v.image_dim = image.dim();
  v.mean_outside_norm = image.residual(mu).norm();
  v.mean_outside_image = v.mean_outside_norm > tol * std::max(1.0, mu.norm());

  const Eigen::VectorXd mu_b = spec.mean_in_eigenbasis();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
    const double lambda = dec.eigenvalues(i);
    const double nearest = lambda >= 0.5 ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(lambda - nearest));
    if (std::abs(lambda - 1.0) <= tol) {
      v.ncp_squared_from_eigenbasis += mu_b(i) * mu_b(i);
    }
  }
  v.distance_to_projection = std::max(worst, fixed.residual);

  v.is_chi_square = idem.passed && fixed.passed && part.others.empty();
  if (v.is_chi_square) {
    v.df = static_cast<int>(part.ones.size());
    v.ncp = mu.norm();
    v.degenerate = *v.df == 0;
  }
  return v;
}

}  // namespace chi2geo
