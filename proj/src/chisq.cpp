#include "chi2geo/chisq.hpp"

#include "chi2geo/error.hpp"
#include "chi2geo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chi2geo {

namespace {

constexpr double kTailMass = 1e-14;
constexpr int kMaxGammaIterations = 1'000'000;

double lower_gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int it = 0; it < kMaxGammaIterations; ++it) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw Error(ErrorCode::ConvergenceFailure, "incomplete gamma series did not converge");
}

double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) {
      d = tiny;
    }
    c = b + an / c;
    if (std::abs(c) < tiny) {
      c = tiny;
    }
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw Error(ErrorCode::ConvergenceFailure, "incomplete gamma continued fraction did not converge");
}

// x^s e^-x / Gamma(s + 1) = P(s, x) - P(s + 1, x)
double gamma_step(double s, double x) {
  return std::exp(s * std::log(x) - x - std::lgamma(s + 1.0));
}

double poisson_weight(double mean, double k) {
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    std::ostringstream msg;
    msg << "regularized_lower_gamma needs a > 0 and x >= 0 (a = " << a << ", x = " << x << ")";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  if (x == 0.0) {
    return 0.0;
  }
  if (std::isinf(x)) {
    return 1.0;
  }
  if (x < a + 1.0) {
    return std::min(1.0, lower_gamma_series(a, x));
  }
  return std::clamp(1.0 - upper_gamma_fraction(a, x), 0.0, 1.0);
}

NoncentralChiSquare::NoncentralChiSquare(int df, double nu) : df_(df), nu_(nu) {
  if (df < 0 || !(nu >= 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorCode::InvalidArgument, "chi-square needs df >= 0 and finite nu >= 0");
  }
  if (df == 0 && nu != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "df = 0 is only defined with nu = 0");
  }
}

double NoncentralChiSquare::cdf(double x) const {
  if (degenerate()) {
    return x >= 0.0 ? 1.0 : 0.0;
  }
  if (!(x > 0.0)) {
    return 0.0;
  }
  const double a = 0.5 * df_;
  const double y = 0.5 * x;
  const double half_lambda = 0.5 * lambda();
  if (half_lambda == 0.0) {
    return regularized_lower_gamma(a, y);
  }

  const double mode = std::floor(half_lambda);
  const double p_mode = regularized_lower_gamma(a + mode, y);
  const double w_mode = poisson_weight(half_lambda, mode);
  const double step_mode = gamma_step(a + mode, y);

  kernels::CompensatedSum sum;
  sum.add(w_mode * p_mode);

  // Upward: P(s + 1) = P(s) - step(s); weights fall by half_lambda / (k + 1).
  {
    double w = w_mode;
    double p = p_mode;
    double step = step_mode;
    for (double k = mode;; k += 1.0) {
      p = std::max(0.0, p - step);
      step *= y / (a + k + 1.0);
      w *= half_lambda / (k + 1.0);
      sum.add(w * p);
      const double ratio = half_lambda / (k + 2.0);
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kTailMass) {
        break;
      }
      if (p == 0.0 && ratio < 1.0) {
        break;
      }
    }
  }
  // Downward: P(s - 1) = P(s) + step(s - 1); weights fall by k / half_lambda.
  {
    double w = w_mode;
    double p = p_mode;
    double step = step_mode;
    for (double k = mode; k > 0.0; k -= 1.0) {
      step *= (a + k) / y;
      p = std::min(1.0, p + step);
      w *= k / half_lambda;
      sum.add(w * p);
      const double ratio = (k - 1.0) / half_lambda;
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kTailMass) {
        break;
      }
    }
  }
  return std::clamp(sum.value(), 0.0, 1.0);
}

double NoncentralChiSquare::pdf(double x) const {
  if (degenerate() || !(x > 0.0)) {
    return 0.0;
  }
  const double half_lambda = 0.5 * lambda();
  const auto central_pdf = [&](double k) {
    const double s = 0.5 * df_ + k;
    return std::exp((s - 1.0) * std::log(0.5 * x) - 0.5 * x - std::lgamma(s)) * 0.5;
  };
  if (half_lambda == 0.0) {
    return central_pdf(0.0);
  }
  const double mode = std::floor(half_lambda);
  kernels::CompensatedSum sum;
  sum.add(poisson_weight(half_lambda, mode) * central_pdf(mode));
  for (double k = mode + 1.0;; k += 1.0) {
    const double w = poisson_weight(half_lambda, k);
    sum.add(w * central_pdf(k));
    if (k > half_lambda && w < kTailMass) {
      break;
    }
  }
  for (double k = mode - 1.0; k >= 0.0; k -= 1.0) {
    const double w = poisson_weight(half_lambda, k);
    sum.add(w * central_pdf(k));
    if (w < kTailMass) {
      break;
    }
  }
  return sum.value();
}

std::vector<double> NoncentralChiSquare::sample_direct(std::size_t count, std::uint64_t seed,
                                                       Generator gen) const {
  std::vector<double> out(count, 0.0);
  kernels::chisq_draws(df_, nu_, seed, gen, out);
  return out;
}

}  // namespace chi2geo
