#include "chi2geo/moments.hpp"

#include <cmath>
#include <sstream>

namespace chi2geo {

namespace {

constexpr double kDomainMargin = 1e-9;

void check_order(int order, int cap) {
  if (order < 1 || order > cap) {
    std::ostringstream msg;
    msg << "cumulant order " << order << " outside [1, " << cap << "]";
    throw Error(ErrorCode::OrderTooLarge, msg.str());
  }
}

[[noreturn]] void out_of_domain(double t, double bound) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "t = " << t << " is outside the MGF domain t < " << bound;
  throw Error(ErrorCode::OutOfDomain, msg.str());
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace

double cumulant_scale(int j) {
  double s = std::ldexp(1.0, j - 1);
  for (int k = 2; k < j; ++k) {
    s *= k;
  }
  return s;
}

CumulantSequence quadratic_norm_cumulants(const GaussianSpec& spec, int order) {
  check_order(order, kMaxCumulantOrder);
  const auto& lambda = spec.decomposition().eigenvalues;
  const Eigen::VectorXd mu_b = spec.mean_in_eigenbasis();
  CumulantSequence out;
  out.values.reserve(static_cast<std::size_t>(order));
  for (int j = 1; j <= order; ++j) {
    double trace_term = 0.0;
    double mean_term = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double lj1 = j == 1 ? 1.0 : std::pow(lambda(i), j - 1);
      trace_term += lj1 * lambda(i);
      mean_term += lj1 * mu_b(i) * mu_b(i);
    }
    out.values.push_back(cumulant_scale(j) * (trace_term + j * mean_term));
  }
  return out;
}

CumulantSequence chisq_cumulants(int df, double nu, int order) {
  check_order(order, kMaxCumulantOrder);
  if (df < 0 || !(nu >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "chi-square needs df >= 0 and nu >= 0");
  }
  CumulantSequence out;
  for (int j = 1; j <= order; ++j) {
    out.values.push_back(cumulant_scale(j) * (df + j * nu * nu));
  }
  return out;
}

double mgf_norm(const GaussianSpec& spec, double t) {
  const auto& lambda = spec.decomposition().eigenvalues;
  const double lambda_max = lambda.size() > 0 ? lambda(0) : 0.0;
  if (lambda_max > 0.0) {
    const double bound = 1.0 / (2.0 * lambda_max) - kDomainMargin;
    if (!(t < bound)) {
      out_of_domain(t, bound);
    }
  }
  const Eigen::VectorXd mu_b = spec.mean_in_eigenbasis();
  double exponent = 0.0;
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double f = 1.0 - 2.0 * t * lambda(i);
    exponent += t * mu_b(i) * mu_b(i) / f;
    log_det += std::log(f);
  }
  return std::exp(exponent - 0.5 * log_det);
}

double mgf_chisq(int df, double nu, double t) {
  if (df < 0 || !(nu >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "chi-square needs df >= 0 and nu >= 0");
  }
  if (df == 0 && nu == 0.0) {
    return 1.0;
  }
  const double bound = 0.5 - kDomainMargin;
  if (!(t < bound)) {
    out_of_domain(t, bound);
  }
  const double f = 1.0 - 2.0 * t;
  return std::exp(t * nu * nu / f - 0.5 * df * std::log(f));
}

CumulantSequence cumulants_from_mgf(const std::function<double(double)>& mgf, int order,
                                    double step) {
  check_order(order, kMaxNumericCumulantOrder);
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  }
  const auto log_mgf = [&](double t) {
    const double m = mgf(t);
    if (!(m > 0.0) || !std::isfinite(m)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "MGF is not finite and positive at t = " << t;
      throw Error(ErrorCode::OutOfDomain, msg.str());
    }
    return std::log(m);
  };
  // delta^j g(0) / h^j with nodes at (j/2 - k) h: error series in even powers of h.
  const auto central = [&](int j, double h) {
    double acc = 0.0;
    for (int k = 0; k <= j; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      acc += sign * binomial(j, k) * log_mgf((0.5 * j - k) * h);
    }
    return acc / std::pow(h, j);
  };
  CumulantSequence out;
  for (int j = 1; j <= order; ++j) {
    const double d1 = central(j, step);
    const double d2 = central(j, 2.0 * step);
    const double d4 = central(j, 4.0 * step);
    const double r1 = (4.0 * d1 - d2) / 3.0;
    const double r2 = (4.0 * d2 - d4) / 3.0;
    out.values.push_back((16.0 * r1 - r2) / 15.0);
  }
  return out;
}

}  // namespace chi2geo
