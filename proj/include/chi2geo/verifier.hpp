#pragma once

#include "chi2geo/characterizer.hpp"
#include "chi2geo/gaussian.hpp"
#include "chi2geo/moments.hpp"
#include "chi2geo/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chi2geo {

/// Unbiased k-statistics with large-sample standard errors.
struct CumulantEstimate {
  std::size_t count = 0;
  std::vector<double> values;
  std::vector<double> standard_errors;
};

/// k-statistics k_1..k_J (J <= 4) of `data`.
///
/// Standard errors are the square roots of Fisher's sampling variances of the
/// k-statistics, with population cumulants up to order 8 replaced by plug-in
/// estimates from the sample central moments:
///   var k1 = K2/n
///   var k2 = K4/n + 2 K2^2/(n-1)
///   var k3 = K6/n + 9 (K2 K4 + K3^2)/(n-1) + 6 n K2^3 / ((n-1)(n-2))
///   var k4 = K8/n + (16 K2 K6 + 48 K3 K5 + 34 K4^2)/(n-1)
///            + n (72 K2^2 K4 + 144 K2 K3^2) / ((n-1)(n-2))
///            + 24 n (n+1) K2^4 / ((n-1)(n-2)(n-3))
/// Throws TooFewSamples when data.size() < max(2, J).
[[nodiscard]] CumulantEstimate sample_cumulants(std::span<const double> data, int order);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P(K > x) for the limiting Kolmogorov distribution.
[[nodiscard]] double kolmogorov_survival(double x);

/// Two-sided one-sample KS test: D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n),
/// p = kolmogorov_survival(sqrt(n) D). Needs at least 10 observations.
[[nodiscard]] KsResult ks_test(std::span<const double> data,
                               const std::function<double(double)>& cdf);

struct VerifyThresholds {
  double tol = kDefaultTolerance;
  double ks_alpha = 0.01;
  double cumulant_z = 4.0;
  double subspace_residual = 1e-10;
  double kernel_variance = 1e-20;
};

/// Chi-square law chi^2(r, nu) with integer r whose cumulants agree with the
/// analytic ones for the longest prefix of orders (kappa_1 always matches).
struct CumulantMismatch {
  int order = 0;  // first order where the best fit deviates; 0 if none up to the max order
  int best_fit_df = 0;
  double best_fit_ncp = 0.0;
  double analytic = 0.0;
  double best_fit = 0.0;
  /// (sample - best_fit) / standard error at `order`, when order <= 4
  std::optional<double> sample_z;
};

inline constexpr int kMismatchSearchOrder = 12;

[[nodiscard]] std::optional<CumulantMismatch> find_cumulant_mismatch(
    const CumulantSequence& analytic, double tol = kDefaultTolerance);

struct VerificationReport {
  ChiSquareVerdict verdict;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::string generator_id;
  VerifyThresholds thresholds;

  CumulantEstimate sample_cumulants;
  std::vector<double> analytic_cumulants;
  std::vector<double> cumulant_z;

  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  /// Law the KS test compared against: the verdict's law on "yes", the best
  /// {0,1}-eigenvalue fit on "no". Only gated on "yes".
  std::optional<int> ks_reference_df;
  std::optional<double> ks_reference_ncp;
  bool ks_gated = false;

  double subspace_max_residual = 0.0;
  double kernel_max_variance = 0.0;
  double mean_z_score = 0.0;
  std::optional<CumulantMismatch> mismatch;

  bool passed = false;
};

struct GateOutcome {
  bool ks = true;
  std::vector<bool> cumulants;
  bool subspace = true;
  bool kernel = true;
  [[nodiscard]] bool all() const;
};

/// Recomputes every gate from the numbers recorded in the report.
[[nodiscard]] GateOutcome evaluate_gates(const VerificationReport& report);

/// Samples X, forms ||x||^2 and checks it against the verdict: KS against
/// chi^2(df, nu) on "yes", sample vs analytic cumulants of orders 1-4, and
/// containment of every draw in mu + Image(C).
[[nodiscard]] VerificationReport verify(const GaussianSpec& spec, std::size_t count,
                                        std::uint64_t seed, const VerifyThresholds& thresholds = {},
                                        Generator gen = kDefaultGenerator);

}  // namespace chi2geo
