#pragma once

#include "chi2geo/error.hpp"
#include "chi2geo/rng.hpp"
#include "chi2geo/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace chi2geo {

/// Eigenvalues below -kPsdClampBand * max(1, lambda_max) reject a covariance;
/// negative eigenvalues inside the band are clamped to zero.
inline constexpr double kPsdClampBand = 1e-10;

/// X ~ N(mu, C). Only obtainable through validate(); the spectral
/// decomposition of C is computed once there and shared by all copies.
class GaussianSpec {
public:
  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(mu_.size());
  }
  [[nodiscard]] const Eigen::VectorXd& mu() const noexcept { return mu_; }
  [[nodiscard]] const SymmetricOperator& cov() const noexcept { return cov_; }

  /// Decomposition of C with the PSD clamp applied.
  [[nodiscard]] const SpectralDecomposition& decomposition() const noexcept { return *dec_; }

  /// Largest |lambda| among negative eigenvalues clamped to zero (0 if none).
  [[nodiscard]] double clamp_magnitude() const noexcept { return clamp_magnitude_; }

  /// Coordinates of mu in the eigenbasis: mu_i = b_i . mu.
  [[nodiscard]] Eigen::VectorXd mean_in_eigenbasis() const {
    return dec_->eigenvectors.transpose() * mu_;
  }

private:
  GaussianSpec(Eigen::VectorXd mu, SymmetricOperator cov,
               std::shared_ptr<const SpectralDecomposition> dec, double clamp)
      : mu_(std::move(mu)), cov_(std::move(cov)), dec_(std::move(dec)), clamp_magnitude_(clamp) {}

  friend GaussianSpec validate(const Eigen::VectorXd& mu, const SymmetricOperator& cov);

  Eigen::VectorXd mu_;
  SymmetricOperator cov_;
  std::shared_ptr<const SpectralDecomposition> dec_;
  double clamp_magnitude_;
};

/// Errors: DimensionMismatch, NonSymmetric, NotPositiveSemidefinite,
/// InvalidArgument (non-finite entries).
[[nodiscard]] GaussianSpec validate(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov);
[[nodiscard]] GaussianSpec validate(const Eigen::VectorXd& mu, const SymmetricOperator& cov);

/// `count` draws of an n-dimensional vector, stored row-major.
struct SampleBatch {
  std::size_t n = 0;
  std::size_t count = 0;
  std::vector<double> draws;
  std::uint64_t seed = 0;
  std::string generator_id;

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(draws).subspan(i * n, n);
  }
  friend bool operator==(const SampleBatch&, const SampleBatch&) = default;
};

/// Spectral square-root factor B * diag(sqrt(lambda)) of C. Eigenvalues at
/// or below the rank threshold tol * max(1, lambda_max) contribute exactly
/// zero columns, so draws lie in mu + Image(C) by construction.
[[nodiscard]] Eigen::MatrixXd sampling_transform(const GaussianSpec& spec,
                                                 double rank_tol = kDefaultTolerance);

/// Each draw is mu + sum_i sqrt(lambda_i) z_i b_i. Draws are split into
/// chunks of kernels::kChunkSize driven by substream (seed, chunk index).
[[nodiscard]] SampleBatch sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed,
                                 Generator gen = kDefaultGenerator,
                                 double rank_tol = kDefaultTolerance);

/// Raised by quadratic_form_to_norm when ||A^2 - A||_F exceeds tolerance.
class NotIdempotentError : public Error {
public:
  explicit NotIdempotentError(double residual);
  [[nodiscard]] double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// For idempotent symmetric A, X . A(X) = ||A(X)||^2 with X ~ N(mu, I), and
/// A(X) ~ N(A mu, A). Returns that Gaussian, or throws NotIdempotentError
/// when ||A^2 - A||_F > tol * max(1, ||A||_F).
[[nodiscard]] GaussianSpec quadratic_form_to_norm(const SymmetricOperator& a,
                                                  const Eigen::VectorXd& mu,
                                                  double tol = kDefaultTolerance);

}  // namespace chi2geo
