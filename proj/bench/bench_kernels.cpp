#include "chi2geo/chisq.hpp"
#include "chi2geo/kernels.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace chi2geo;

namespace {

struct Setup {
  Eigen::VectorXd mu;
  Eigen::MatrixXd transform;
};

Setup make_setup(Eigen::Index n) {
  Setup s;
  s.mu = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  s.transform = Eigen::MatrixXd::Identity(n, n);
  s.transform(0, n - 1) = 0.5;
  return s;
}

template <bool Parallel>
void BM_GaussianDraws(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const auto s = make_setup(3);
  std::vector<double> out(count * 3);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::gaussian_draws(s.mu, s.transform, 1, kDefaultGenerator, out);
    } else {
      kernels::serial::gaussian_draws(s.mu, s.transform, 1, kDefaultGenerator, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}

template <bool Parallel>
void BM_SquaredNorms(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const auto s = make_setup(3);
  std::vector<double> draws(count * 3);
  kernels::gaussian_draws(s.mu, s.transform, 1, kDefaultGenerator, draws);
  std::vector<double> out(count);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::squared_norms(draws, 3, out);
    } else {
      kernels::serial::squared_norms(draws, 3, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}

template <bool Parallel>
void BM_CentralPowerSums(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  std::vector<double> data(count);
  kernels::chisq_draws(3, 1.5, 2, kDefaultGenerator, data);
  for (auto _ : state) {
    kernels::PowerSums sums;
    if constexpr (Parallel) {
      sums = kernels::central_power_sums(data, 5.25);
    } else {
      sums = kernels::serial::central_power_sums(data, 5.25);
    }
    benchmark::DoNotOptimize(sums);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}

template <bool Parallel>
void BM_CdfValues(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const NoncentralChiSquare d(3, 1.5);
  std::vector<double> data(count);
  kernels::chisq_draws(3, 1.5, 3, kDefaultGenerator, data);
  std::vector<double> out(count);
  const auto cdf = [&](double x) { return d.cdf(x); };
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::cdf_values(data, cdf, out);
    } else {
      kernels::serial::cdf_values(data, cdf, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * count));
}

}  // namespace

BENCHMARK(BM_GaussianDraws<false>)->Name("gaussian_draws/serial")->Arg(1 << 20);
BENCHMARK(BM_GaussianDraws<true>)->Name("gaussian_draws/parallel")->Arg(1 << 20);
BENCHMARK(BM_SquaredNorms<false>)->Name("squared_norms/serial")->Arg(1 << 20);
BENCHMARK(BM_SquaredNorms<true>)->Name("squared_norms/parallel")->Arg(1 << 20);
BENCHMARK(BM_CentralPowerSums<false>)->Name("central_power_sums/serial")->Arg(1 << 20);
BENCHMARK(BM_CentralPowerSums<true>)->Name("central_power_sums/parallel")->Arg(1 << 20);
BENCHMARK(BM_CdfValues<false>)->Name("cdf_values/serial")->Arg(1 << 18);
BENCHMARK(BM_CdfValues<true>)->Name("cdf_values/parallel")->Arg(1 << 18);

BENCHMARK_MAIN();
