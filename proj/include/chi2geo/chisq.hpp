#pragma once

#include "chi2geo/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace chi2geo {

/// chi^2(r, nu) with the noncentrality stored as nu = ||mu||; the textbook
/// parameter lambda = nu^2 is derived. df = 0 is allowed only with nu = 0 and
/// denotes the point mass at 0.
class NoncentralChiSquare {
public:
  NoncentralChiSquare(int df, double nu);

  [[nodiscard]] int df() const noexcept { return df_; }
  [[nodiscard]] double ncp_nu() const noexcept { return nu_; }
  [[nodiscard]] double lambda() const noexcept { return nu_ * nu_; }
  [[nodiscard]] bool degenerate() const noexcept { return df_ == 0; }

  /// Poisson mixture sum_k w_k P(r/2 + k, x/2), w_k = e^(-lambda/2) (lambda/2)^k / k!,
  /// summed outward from the Poisson mode until the bounded tail mass is
  /// below 1e-14.
  [[nodiscard]] double cdf(double x) const;

  /// Density for x > 0 (the degenerate case has no density; returns 0).
  [[nodiscard]] double pdf(double x) const;

  /// Sum of df squared normals, the first centred at nu.
  [[nodiscard]] std::vector<double> sample_direct(std::size_t count, std::uint64_t seed,
                                                  Generator gen = kDefaultGenerator) const;

private:
  int df_;
  double nu_;
};

/// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
/// Lentz continued fraction for the complement otherwise.
[[nodiscard]] double regularized_lower_gamma(double a, double x);

}  // namespace chi2geo
