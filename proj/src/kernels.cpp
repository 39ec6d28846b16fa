#include "chi2geo/kernels.hpp"

#include "chi2geo/error.hpp"

#include <algorithm>
#include <cmath>

namespace chi2geo::kernels {

namespace {

using Eigen::Index;

struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

ChunkRange chunk_range(std::size_t chunk, std::size_t count) {
  const std::size_t begin = chunk * kChunkSize;
  return {begin, std::min(count, begin + kChunkSize)};
}

void check_rows(std::size_t size, std::size_t n) {
  if (n == 0 || size % n != 0) {
    throw Error(ErrorCode::DimensionMismatch, "draw buffer is not a whole number of rows");
  }
}

void gaussian_chunk(const Eigen::VectorXd& mu, const Eigen::MatrixXd& transform,
                    std::uint64_t seed, Generator gen, std::size_t chunk,
                    std::span<double> out) {
  const auto n = static_cast<std::size_t>(mu.size());
  const auto range = chunk_range(chunk, out.size() / n);
  NormalStream stream(gen, seed, chunk);
  std::vector<double> z(n);
  for (std::size_t d = range.begin; d < range.end; ++d) {
    for (auto& zi : z) {
      zi = stream.next();
    }
    double* x = out.data() + d * n;
    for (std::size_t r = 0; r < n; ++r) {
      double acc = mu(static_cast<Index>(r));
      for (std::size_t i = 0; i < n; ++i) {
        acc += transform(static_cast<Index>(r), static_cast<Index>(i)) * z[i];
      }
      x[r] = acc;
    }
  }
}

void chisq_chunk(int df, double nu, std::uint64_t seed, Generator gen, std::size_t chunk,
                 std::span<double> out) {
  const auto range = chunk_range(chunk, out.size());
  NormalStream stream(gen, seed, chunk);
  for (std::size_t d = range.begin; d < range.end; ++d) {
    double acc = 0.0;
    for (int i = 0; i < df; ++i) {
      const double g = (i == 0 ? nu : 0.0) + stream.next();
      acc += g * g;
    }
    out[d] = acc;
  }
}

double row_squared_norm(const double* x, std::size_t n) {
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) {
    s.add(x[i] * x[i]);
  }
  return s.value();
}

struct DiagnosticPartial {
  double max_residual = 0.0;
  std::vector<CompensatedSum> proj_sum;
  std::vector<CompensatedSum> proj_sq_sum;
};

void diagnostics_range(std::span<const double> draws, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& image_basis, const Eigen::MatrixXd& kernel_basis,
                       std::size_t begin, std::size_t end, DiagnosticPartial& part) {
  const Index n = mu.size();
  const Index k_img = image_basis.cols();
  const Index k_ker = kernel_basis.cols();
  part.proj_sum.assign(static_cast<std::size_t>(k_ker), {});
  part.proj_sq_sum.assign(static_cast<std::size_t>(k_ker), {});
  Eigen::VectorXd dev(n);
  Eigen::VectorXd coeff(k_img);
  Eigen::VectorXd resid(n);
  for (std::size_t d = begin; d < end; ++d) {
    const Eigen::Map<const Eigen::VectorXd> x(draws.data() + d * static_cast<std::size_t>(n), n);
    dev = x - mu;
    if (k_img > 0) {
      coeff.noalias() = image_basis.transpose() * dev;
      resid = dev;
      resid.noalias() -= image_basis * coeff;
    } else {
      resid = dev;
    }
    part.max_residual = std::max(part.max_residual, resid.norm() / (1.0 + x.norm()));
    for (Index j = 0; j < k_ker; ++j) {
      const double p = kernel_basis.col(j).dot(dev);
      part.proj_sum[static_cast<std::size_t>(j)].add(p);
      part.proj_sq_sum[static_cast<std::size_t>(j)].add(p * p);
    }
  }
}

DrawDiagnostics finish_diagnostics(std::span<const DiagnosticPartial> parts, std::size_t count,
                                   Index k_ker) {
  DrawDiagnostics out;
  out.kernel_variance.assign(static_cast<std::size_t>(k_ker), 0.0);
  std::vector<CompensatedSum> sum(static_cast<std::size_t>(k_ker));
  std::vector<CompensatedSum> sq(static_cast<std::size_t>(k_ker));
  for (const auto& part : parts) {
    out.max_residual = std::max(out.max_residual, part.max_residual);
    for (std::size_t j = 0; j < sum.size(); ++j) {
      sum[j].add(part.proj_sum[j].value());
      sq[j].add(part.proj_sq_sum[j].value());
    }
  }
  if (count > 1) {
    const double cnt = static_cast<double>(count);
    for (std::size_t j = 0; j < sum.size(); ++j) {
      const double s = sum[j].value();
      out.kernel_variance[j] = std::max(0.0, (sq[j].value() - s * s / cnt) / (cnt - 1.0));
    }
  }
  return out;
}

void check_diagnostics_shape(std::span<const double> draws, const Eigen::VectorXd& mu,
                             const Eigen::MatrixXd& image_basis,
                             const Eigen::MatrixXd& kernel_basis) {
  const auto n = static_cast<std::size_t>(mu.size());
  check_rows(draws.size(), n);
  if (image_basis.rows() != mu.size() || kernel_basis.rows() != mu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "basis rows must match the mean dimension");
  }
}

}  // namespace

void gaussian_draws(const Eigen::VectorXd& mu, const Eigen::MatrixXd& transform,
                    std::uint64_t seed, Generator gen, std::span<double> out) {
  const auto n = static_cast<std::size_t>(mu.size());
  check_rows(out.size(), n);
  const auto chunks = static_cast<std::int64_t>(chunk_count(out.size() / n));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    gaussian_chunk(mu, transform, seed, gen, static_cast<std::size_t>(c), out);
  }
}

void chisq_draws(int df, double nu, std::uint64_t seed, Generator gen, std::span<double> out) {
  const auto chunks = static_cast<std::int64_t>(chunk_count(out.size()));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    chisq_chunk(df, nu, seed, gen, static_cast<std::size_t>(c), out);
  }
}

void squared_norms(std::span<const double> draws, std::size_t n, std::span<double> out) {
  check_rows(draws.size(), n);
  const auto count = static_cast<std::int64_t>(draws.size() / n);
  if (out.size() != static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::DimensionMismatch, "output length must equal the draw count");
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t d = 0; d < count; ++d) {
    out[static_cast<std::size_t>(d)] =
        row_squared_norm(draws.data() + static_cast<std::size_t>(d) * n, n);
  }
}

void cdf_values(std::span<const double> x, const std::function<double(double)>& cdf,
                std::span<double> out) {
  if (out.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "output length must equal input length");
  }
  const auto count = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = cdf(x[static_cast<std::size_t>(i)]);
  }
}

double compensated_sum(std::span<const double> data) {
  const std::size_t chunks = chunk_count(data.size());
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto range = chunk_range(static_cast<std::size_t>(c), data.size());
    CompensatedSum s;
    for (std::size_t i = range.begin; i < range.end; ++i) {
      s.add(data[i]);
    }
    partial[static_cast<std::size_t>(c)] = s.value();
  }
  CompensatedSum total;
  for (double p : partial) {
    total.add(p);
  }
  return total.value();
}

PowerSums central_power_sums(std::span<const double> data, double center) {
  const std::size_t chunks = chunk_count(data.size());
  std::vector<PowerSums> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto range = chunk_range(static_cast<std::size_t>(c), data.size());
    std::array<CompensatedSum, kMaxPowerOrder + 1> s{};
    for (std::size_t i = range.begin; i < range.end; ++i) {
      const double dev = data[i] - center;
      double p = 1.0;
      for (int k = 1; k <= kMaxPowerOrder; ++k) {
        p *= dev;
        s[static_cast<std::size_t>(k)].add(p);
      }
    }
    auto& out = partial[static_cast<std::size_t>(c)];
    out[0] = static_cast<double>(range.end - range.begin);
    for (int k = 1; k <= kMaxPowerOrder; ++k) {
      out[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k)].value();
    }
  }
  std::array<CompensatedSum, kMaxPowerOrder + 1> total{};
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      total[k].add(p[k]);
    }
  }
  PowerSums out{};
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = total[k].value();
  }
  return out;
}

DrawDiagnostics draw_diagnostics(std::span<const double> draws, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& image_basis,
                                 const Eigen::MatrixXd& kernel_basis) {
  check_diagnostics_shape(draws, mu, image_basis, kernel_basis);
  const std::size_t count = draws.size() / static_cast<std::size_t>(mu.size());
  const std::size_t chunks = chunk_count(count);
  std::vector<DiagnosticPartial> parts(chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto range = chunk_range(static_cast<std::size_t>(c), count);
    diagnostics_range(draws, mu, image_basis, kernel_basis, range.begin, range.end,
                      parts[static_cast<std::size_t>(c)]);
  }
  return finish_diagnostics(parts, count, kernel_basis.cols());
}

namespace serial {

void gaussian_draws(const Eigen::VectorXd& mu, const Eigen::MatrixXd& transform,
                    std::uint64_t seed, Generator gen, std::span<double> out) {
  const auto n = static_cast<std::size_t>(mu.size());
  check_rows(out.size(), n);
  const std::size_t chunks = chunk_count(out.size() / n);
  for (std::size_t c = 0; c < chunks; ++c) {
    gaussian_chunk(mu, transform, seed, gen, c, out);
  }
}

void chisq_draws(int df, double nu, std::uint64_t seed, Generator gen, std::span<double> out) {
  const std::size_t chunks = chunk_count(out.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    chisq_chunk(df, nu, seed, gen, c, out);
  }
}

void squared_norms(std::span<const double> draws, std::size_t n, std::span<double> out) {
  check_rows(draws.size(), n);
  if (out.size() != draws.size() / n) {
    throw Error(ErrorCode::DimensionMismatch, "output length must equal the draw count");
  }
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = row_squared_norm(draws.data() + d * n, n);
  }
}

void cdf_values(std::span<const double> x, const std::function<double(double)>& cdf,
                std::span<double> out) {
  if (out.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "output length must equal input length");
  }
  std::transform(x.begin(), x.end(), out.begin(), cdf);
}

double compensated_sum(std::span<const double> data) {
  CompensatedSum s;
  for (double v : data) {
    s.add(v);
  }
  return s.value();
}

PowerSums central_power_sums(std::span<const double> data, double center) {
  std::array<CompensatedSum, kMaxPowerOrder + 1> s{};
  for (double v : data) {
    const double dev = v - center;
    double p = 1.0;
    for (int k = 1; k <= kMaxPowerOrder; ++k) {
      p *= dev;
      s[static_cast<std::size_t>(k)].add(p);
    }
  }
  PowerSums out{};
  out[0] = static_cast<double>(data.size());
  for (int k = 1; k <= kMaxPowerOrder; ++k) {
    out[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k)].value();
  }
  return out;
}

DrawDiagnostics draw_diagnostics(std::span<const double> draws, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& image_basis,
                                 const Eigen::MatrixXd& kernel_basis) {
  check_diagnostics_shape(draws, mu, image_basis, kernel_basis);
  const std::size_t count = draws.size() / static_cast<std::size_t>(mu.size());
  DiagnosticPartial whole;
  diagnostics_range(draws, mu, image_basis, kernel_basis, 0, count, whole);
  return finish_diagnostics(std::span<const DiagnosticPartial>(&whole, 1), count,
                            kernel_basis.cols());
}

}  // namespace serial

}  // namespace chi2geo::kernels
