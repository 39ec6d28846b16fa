#pragma once

#include "chi2geo/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Data-parallel inner loops. Work is cut into fixed chunks of kChunkSize
// elements; chunk c of a sampling kernel draws from substream c, and every
// reduction combines per-chunk partials in chunk order. Results therefore do
// not depend on the number of OpenMP threads.
//
// The serial namespace holds straightforward single-threaded versions used as
// references in tests and benchmarks.
namespace chi2geo::kernels {

inline constexpr std::size_t kChunkSize = 65536;

[[nodiscard]] constexpr std::size_t chunk_count(std::size_t count) noexcept {
  return (count + kChunkSize - 1) / kChunkSize;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr int kMaxPowerOrder = 8;

/// sums[k] = sum_i (x_i - center)^k for k = 1..kMaxPowerOrder; sums[0] = count.
using PowerSums = std::array<double, kMaxPowerOrder + 1>;

/// Per-draw checks of where Gaussian draws lie relative to Image(C).
struct DrawDiagnostics {
  /// max over draws of ||(I - P_image)(x - mu)|| / (1 + ||x||)
  double max_residual = 0.0;
  /// sample variance of (x - mu) . v for each kernel basis vector v
  std::vector<double> kernel_variance;
};

/// out[d*n .. d*n+n) = mu + transform * z_d, where z_d holds the next n
/// normals from substream chunk(d). out.size() must be a multiple of n.
void gaussian_draws(const Eigen::VectorXd& mu, const Eigen::MatrixXd& transform,
                    std::uint64_t seed, Generator gen, std::span<double> out);

/// out[d] = (nu + z_1)^2 + z_2^2 + ... + z_df^2.
void chisq_draws(int df, double nu, std::uint64_t seed, Generator gen, std::span<double> out);

/// out[d] = ||row d||^2, accumulated with compensated summation.
void squared_norms(std::span<const double> draws, std::size_t n, std::span<double> out);

void cdf_values(std::span<const double> x, const std::function<double(double)>& cdf,
                std::span<double> out);

[[nodiscard]] double compensated_sum(std::span<const double> data);

[[nodiscard]] PowerSums central_power_sums(std::span<const double> data, double center);

/// image_basis / kernel_basis are n x k matrices with orthonormal columns.
[[nodiscard]] DrawDiagnostics draw_diagnostics(std::span<const double> draws,
                                               const Eigen::VectorXd& mu,
                                               const Eigen::MatrixXd& image_basis,
                                               const Eigen::MatrixXd& kernel_basis);

namespace serial {

void gaussian_draws(const Eigen::VectorXd& mu, const Eigen::MatrixXd& transform,
                    std::uint64_t seed, Generator gen, std::span<double> out);
void chisq_draws(int df, double nu, std::uint64_t seed, Generator gen, std::span<double> out);
void squared_norms(std::span<const double> draws, std::size_t n, std::span<double> out);
void cdf_values(std::span<const double> x, const std::function<double(double)>& cdf,
                std::span<double> out);
[[nodiscard]] double compensated_sum(std::span<const double> data);
[[nodiscard]] PowerSums central_power_sums(std::span<const double> data, double center);
[[nodiscard]] DrawDiagnostics draw_diagnostics(std::span<const double> draws,
                                               const Eigen::VectorXd& mu,
                                               const Eigen::MatrixXd& image_basis,
                                               const Eigen::MatrixXd& kernel_basis);

}  // namespace serial

}  // namespace chi2geo::kernels
