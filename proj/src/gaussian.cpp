#include "chi2geo/gaussian.hpp"

#include "chi2geo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chi2geo {

GaussianSpec validate(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() != mu.size() || mu.size() == 0) {
    std::ostringstream msg;
    msg << "mean has length " << mu.size() << " but covariance is " << cov.rows() << "x"
        << cov.cols();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  return validate(mu, SymmetricOperator(cov));
}

GaussianSpec validate(const Eigen::VectorXd& mu, const SymmetricOperator& cov) {
  if (static_cast<std::size_t>(mu.size()) != cov.dim()) {
    std::ostringstream msg;
    msg << "mean has length " << mu.size() << " but covariance has dim " << cov.dim();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (!mu.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "mean has non-finite entries");
  }
  auto dec = std::make_shared<SpectralDecomposition>(spectral_decompose(cov));
  const double lambda_max = dec->eigenvalues.size() > 0 ? dec->eigenvalues(0) : 0.0;
  const double band = kPsdClampBand * std::max(1.0, lambda_max);
  const double lambda_min = dec->eigenvalues(dec->eigenvalues.size() - 1);
  if (lambda_min < -band) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "covariance is not positive semidefinite: min eigenvalue " << lambda_min
        << " < -" << band;
    throw Error(ErrorCode::NotPositiveSemidefinite, msg.str());
  }
  double clamp = 0.0;
  for (Eigen::Index i = 0; i < dec->eigenvalues.size(); ++i) {
    if (dec->eigenvalues(i) < 0.0) {
      clamp = std::max(clamp, -dec->eigenvalues(i));
      dec->eigenvalues(i) = 0.0;
    }
  }
  return GaussianSpec(mu, cov, std::move(dec), clamp);
}

Eigen::MatrixXd sampling_transform(const GaussianSpec& spec, double rank_tol) {
  const auto& dec = spec.decomposition();
  const double threshold = rank_threshold(dec, rank_tol);
  Eigen::MatrixXd t = dec.eigenvectors;
  for (Eigen::Index i = 0; i < t.cols(); ++i) {
    const double lambda = dec.eigenvalues(i);
    if (lambda > threshold) {
      t.col(i) *= std::sqrt(lambda);
    } else {
      t.col(i).setZero();
    }
  }
  return t;
}

SampleBatch sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed,
                   Generator gen, double rank_tol) {
  SampleBatch batch;
  batch.n = spec.dim();
  batch.count = count;
  batch.seed = seed;
  batch.generator_id = std::string(generator_id(gen));
  batch.draws.resize(count * batch.n);
  kernels::gaussian_draws(spec.mu(), sampling_transform(spec, rank_tol), seed, gen,
                          batch.draws);
  return batch;
}

namespace {

std::string residual_message(double residual) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "operator is not idempotent: ||A^2 - A||_F = " << residual;
  return msg.str();
}

}  // namespace

NotIdempotentError::NotIdempotentError(double residual)
    : Error(ErrorCode::NotIdempotent, residual_message(residual)), residual_(residual) {}

GaussianSpec quadratic_form_to_norm(const SymmetricOperator& a, const Eigen::VectorXd& mu,
                                    double tol) {
  if (static_cast<std::size_t>(mu.size()) != a.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "mean length must match the operator dimension");
  }
  const Eigen::MatrixXd& m = a.matrix();
  const double residual = (m * m - m).norm();
  if (residual > tol * std::max(1.0, m.norm())) {
    throw NotIdempotentError(residual);
  }
  return validate(m * mu, a);
}

}  // namespace chi2geo
