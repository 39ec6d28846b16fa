#pragma once

#include "chi2geo/gaussian.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace chi2geo {

inline constexpr int kMaxCumulantOrder = 20;
inline constexpr int kMaxNumericCumulantOrder = 6;

/// kappa_1 .. kappa_J; values[j - 1] holds kappa_j.
struct CumulantSequence {
  std::vector<double> values;

  [[nodiscard]] int order() const noexcept { return static_cast<int>(values.size()); }
  [[nodiscard]] double operator[](int j) const { return values.at(static_cast<std::size_t>(j - 1)); }
};

/// 2^(j-1) (j-1)!
[[nodiscard]] double cumulant_scale(int j);

/// Cumulants of ||X||^2 for X ~ N(mu, C):
///   kappa_j = 2^(j-1) (j-1)! (sum_i lambda_i^j + j sum_i lambda_i^(j-1) mu_i^2)
/// with mu_i = b_i . mu and 0^0 = 1. Throws OrderTooLarge for J > 20.
[[nodiscard]] CumulantSequence quadratic_norm_cumulants(const GaussianSpec& spec, int order);

/// Cumulants of chi^2(r, nu): 2^(j-1) (j-1)! (r + j nu^2).
[[nodiscard]] CumulantSequence chisq_cumulants(int df, double nu, int order);

/// E[exp(t ||X||^2)], evaluated in the eigenbasis as
///   exp(t sum_i mu_i^2 / (1 - 2 t lambda_i)) * prod_i (1 - 2 t lambda_i)^(-1/2).
/// Valid for t < 1 / (2 lambda_max) - 1e-9; throws OutOfDomain otherwise.
[[nodiscard]] double mgf_norm(const GaussianSpec& spec, double t);

/// exp(t nu^2 / (1 - 2t)) / (1 - 2t)^(r/2) for t < 0.5 - 1e-9. The r = nu = 0
/// point mass has M(t) = 1 everywhere.
[[nodiscard]] double mgf_chisq(int df, double nu, double t);

/// Numerical cumulants kappa_1..kappa_J (J <= 6) from central finite
/// differences of log M at 0 with two levels of Richardson extrapolation over
/// steps h, 2h, 4h. The stencil reaches +-2 J h. Throws OutOfDomain if the
/// MGF raises it or returns a non-positive or non-finite value.
[[nodiscard]] CumulantSequence cumulants_from_mgf(const std::function<double(double)>& mgf,
                                                  int order, double step);

}  // namespace chi2geo
