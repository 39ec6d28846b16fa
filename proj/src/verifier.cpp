#include "chi2geo/verifier.hpp"

#include "chi2geo/chisq.hpp"
#include "chi2geo/error.hpp"
#include "chi2geo/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chi2geo {

namespace {

constexpr std::size_t kMinKsSamples = 10;

[[noreturn]] void too_few(std::size_t got, std::size_t need) {
  std::ostringstream msg;
  msg << "need at least " << need << " samples, got " << got;
  throw Error(ErrorCode::TooFewSamples, msg.str());
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

// Cumulants K_2..K_8 of the empirical distribution from its central moments.
std::array<double, 9> plug_in_cumulants(const std::array<double, 9>& m) {
  std::array<double, 9> k{};
  for (int r = 2; r <= 8; ++r) {
    double acc = m[static_cast<std::size_t>(r)];
    for (int j = 2; j <= r - 2; ++j) {
      acc -= binomial(r - 1, j - 1) * k[static_cast<std::size_t>(j)] *
             m[static_cast<std::size_t>(r - j)];
    }
    k[static_cast<std::size_t>(r)] = acc;
  }
  return k;
}

}  // namespace

CumulantEstimate sample_cumulants(std::span<const double> data, int order) {
  if (order < 1 || order > 4) {
    throw Error(ErrorCode::OrderTooLarge, "sample cumulant order must be in [1, 4]");
  }
  const std::size_t need = std::max<std::size_t>(2, static_cast<std::size_t>(order));
  if (data.size() < need) {
    too_few(data.size(), need);
  }
  const double n = static_cast<double>(data.size());
  const double mean = kernels::compensated_sum(data) / n;
  const auto sums = kernels::central_power_sums(data, mean);

  std::array<double, 9> m{};
  m[0] = 1.0;
  for (std::size_t r = 2; r < m.size(); ++r) {
    m[r] = sums[r] / n;
  }
  // Recentre the second to fourth moments on the exact sample mean.
  const double d = sums[1] / n;
  const double m2 = m[2] - d * d;
  const double m3 = m[3] - 3.0 * d * m[2] + 2.0 * d * d * d;
  const double m4 = m[4] - 4.0 * d * m[3] + 6.0 * d * d * m[2] - 3.0 * d * d * d * d;
  const auto big_k = plug_in_cumulants(m);
  const double k2p = big_k[2], k3p = big_k[3], k4p = big_k[4];
  const double k5p = big_k[5], k6p = big_k[6], k8p = big_k[8];

  CumulantEstimate out;
  out.count = data.size();
  std::array<double, 4> value{};
  std::array<double, 4> var{};
  value[0] = mean + d;
  var[0] = k2p / n;
  if (order >= 2) {
    value[1] = n * m2 / (n - 1.0);
    var[1] = k4p / n + 2.0 * k2p * k2p / (n - 1.0);
  }
  if (order >= 3) {
    value[2] = n * n * m3 / ((n - 1.0) * (n - 2.0));
    var[2] = k6p / n + 9.0 * (k2p * k4p + k3p * k3p) / (n - 1.0) +
             6.0 * n * k2p * k2p * k2p / ((n - 1.0) * (n - 2.0));
  }
  if (order >= 4) {
    value[3] = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) /
               ((n - 1.0) * (n - 2.0) * (n - 3.0));
    var[3] = k8p / n + (16.0 * k2p * k6p + 48.0 * k3p * k5p + 34.0 * k4p * k4p) / (n - 1.0) +
             n * (72.0 * k2p * k2p * k4p + 144.0 * k2p * k3p * k3p) / ((n - 1.0) * (n - 2.0)) +
             24.0 * n * (n + 1.0) * k2p * k2p * k2p * k2p /
                 ((n - 1.0) * (n - 2.0) * (n - 3.0));
  }
  for (int j = 0; j < order; ++j) {
    out.values.push_back(value[static_cast<std::size_t>(j)]);
    out.standard_errors.push_back(std::sqrt(std::max(0.0, var[static_cast<std::size_t>(j)])));
  }
  return out;
}

double kolmogorov_survival(double x) {
  if (!(x > 0.0)) {
    return 1.0;
  }
  constexpr double kTruncation = 1e-10;
  if (x < 1.18) {
    // Theta-function form of the CDF converges fast for small x.
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * w);
      sum += term;
      if (term <= kTruncation * sum) {
        break;
      }
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / x * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term <= kTruncation * std::abs(sum)) {
      break;
    }
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> data, const std::function<double(double)>& cdf) {
  if (data.size() < kMinKsSamples) {
    too_few(data.size(), kMinKsSamples);
  }
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> f(sorted.size());
  kernels::cdf_values(sorted, cdf, f);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - f[i];
    const double below = f[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

std::optional<CumulantMismatch> find_cumulant_mismatch(const CumulantSequence& analytic,
                                                       double tol) {
  if (analytic.order() < 1) {
    return std::nullopt;
  }
  const double k1 = analytic[1];
  const int max_df = static_cast<int>(std::floor(k1 + tol * std::max(1.0, k1)));
  std::optional<CumulantMismatch> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= max_df; ++r) {
    const double nu_sq = std::max(0.0, k1 - r);
    const auto fit = chisq_cumulants(r, std::sqrt(nu_sq), analytic.order());
    int first = 0;
    double gap = 0.0;
    for (int j = 2; j <= analytic.order(); ++j) {
      const double diff = std::abs(fit[j] - analytic[j]);
      if (diff > tol * std::max(1.0, std::abs(analytic[j]))) {
        first = j;
        gap = diff / std::max(1.0, std::abs(analytic[j]));
        break;
      }
    }
    const int rank_first = first == 0 ? analytic.order() + 1 : first;
    const int rank_best = !best ? -1 : (best->order == 0 ? analytic.order() + 1 : best->order);
    if (!best || rank_first > rank_best || (rank_first == rank_best && gap < best_gap)) {
      CumulantMismatch m;
      m.order = first;
      m.best_fit_df = r;
      m.best_fit_ncp = std::sqrt(nu_sq);
      m.analytic = first == 0 ? 0.0 : analytic[first];
      m.best_fit = first == 0 ? 0.0 : fit[first];
      best = m;
      best_gap = gap;
    }
  }
  return best;
}

bool GateOutcome::all() const {
  return ks && subspace && kernel &&
         std::all_of(cumulants.begin(), cumulants.end(), [](bool b) { return b; });
}

GateOutcome evaluate_gates(const VerificationReport& report) {
  const auto& th = report.thresholds;
  GateOutcome g;
  g.ks = !report.ks_gated || report.ks_p_value >= th.ks_alpha;
  for (double z : report.cumulant_z) {
    g.cumulants.push_back(std::abs(z) <= th.cumulant_z);
  }
  g.subspace = report.subspace_max_residual <= th.subspace_residual;
  g.kernel = report.kernel_max_variance <= th.kernel_variance;
  return g;
}

namespace {

double z_score(double sample, double expected, double se) {
  const double diff = sample - expected;
  if (se > 0.0) {
    return diff / se;
  }
  return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

// KS against a point mass at 0 is exact: D is the fraction of nonzero draws.
KsResult point_mass_ks(std::span<const double> data) {
  const auto nonzero = std::count_if(data.begin(), data.end(), [](double x) { return x != 0.0; });
  const double d = static_cast<double>(nonzero) / static_cast<double>(data.size());
  return {d, d == 0.0 ? 1.0 : 0.0};
}

}  // namespace

VerificationReport verify(const GaussianSpec& spec, std::size_t count, std::uint64_t seed,
                          const VerifyThresholds& thresholds, Generator gen) {
  if (count < kMinKsSamples) {
    too_few(count, kMinKsSamples);
  }
  VerificationReport report;
  report.thresholds = thresholds;
  report.sample_count = count;
  report.seed = seed;
  report.generator_id = std::string(generator_id(gen));
  report.verdict = characterize(spec, thresholds.tol);

  const SampleBatch batch = sample(spec, count, seed, gen, thresholds.tol);
  std::vector<double> norms(count);
  kernels::squared_norms(batch.draws, batch.n, norms);

  const auto& dec = spec.decomposition();
  const Subspace image = image_subspace(dec, thresholds.tol);
  const Subspace kernel = kernel_subspace(dec, thresholds.tol);
  const auto diag = kernels::draw_diagnostics(batch.draws, spec.mu(), image.basis(), kernel.basis());
  report.subspace_max_residual = diag.max_residual;
  for (double v : diag.kernel_variance) {
    report.kernel_max_variance = std::max(report.kernel_max_variance, v);
  }

  report.sample_cumulants = sample_cumulants(norms, 4);
  report.analytic_cumulants = quadratic_norm_cumulants(spec, 4).values;
  for (std::size_t j = 0; j < 4; ++j) {
    report.cumulant_z.push_back(z_score(report.sample_cumulants.values[j],
                                        report.analytic_cumulants[j],
                                        report.sample_cumulants.standard_errors[j]));
  }
  report.mean_z_score = report.cumulant_z[0];

  std::optional<NoncentralChiSquare> reference;
  if (report.verdict.is_chi_square) {
    reference.emplace(*report.verdict.df, *report.verdict.ncp);
    report.ks_gated = true;
  } else {
    report.mismatch =
        find_cumulant_mismatch(quadratic_norm_cumulants(spec, kMismatchSearchOrder), thresholds.tol);
    if (report.mismatch) {
      auto& m = *report.mismatch;
      if (m.order >= 1 && m.order <= 4) {
        const auto idx = static_cast<std::size_t>(m.order - 1);
        m.sample_z = z_score(report.sample_cumulants.values[idx], m.best_fit,
                             report.sample_cumulants.standard_errors[idx]);
      }
      if (m.best_fit_df > 0) {
        reference.emplace(m.best_fit_df, m.best_fit_ncp);
      }
    }
  }
  if (reference) {
    report.ks_reference_df = reference->df();
    report.ks_reference_ncp = reference->ncp_nu();
    const KsResult ks = reference->degenerate()
                            ? point_mass_ks(norms)
                            : ks_test(norms, [&](double x) { return reference->cdf(x); });
    report.ks_statistic = ks.statistic;
    report.ks_p_value = ks.p_value;
  }

  report.passed = evaluate_gates(report).all();
  return report;
}

}  // namespace chi2geo
