// Serial reference vs OpenMP kernels on fixed mid-sized problems.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numeric>

#include "islab/kernels.hpp"
#include "islab/models.hpp"

namespace {

using namespace islab;

struct OracleFixture {
  std::vector<double> mass{0.3, 0.25, 0.2, 0.15, 0.1};
  Matrix kernel = ChannelModel::bsc(0.1).kernel(3).to_dense(Limits{});
  kernels::OracleProblem problem() const { return {mass, &kernel}; }
};

struct EnsembleFixture {
  static constexpr int n = 8;
  std::vector<double> self_info;
  std::vector<kernels::SparseRow> rows;
  BlockKernel kernel = ChannelModel::bsc(0.1).kernel(n);
  std::vector<double> output_law = std::vector<double>(1u << n, 1.0 / (1u << n));

  EnsembleFixture() {
    const auto pmf = SourceModel::iid({0.8, 0.2}).pmf(n);
    kernels::SparseRow uniform;
    for (std::uint64_t x = 0; x < (1u << n); ++x) uniform.emplace_back(x, 1.0 / (1u << n));
    for (double p : pmf) {
      self_info.push_back(self_information(p, n));
      rows.push_back(uniform);
    }
  }
  kernels::EnsembleProblem problem() const { return {self_info, rows, &kernel, output_law, 0.1, n}; }
};

struct GainFixture {
  static constexpr int n = 10;
  BlockKernel kernel = ChannelModel::bsc(0.05).kernel(n);
  std::vector<double> output_law = std::vector<double>(1u << n, 1.0 / (1u << n));
  std::vector<double> fresh = std::vector<double>(1u << n, 0.7);
  std::vector<double> base = std::vector<double>(1u << n, 1e-4);
  std::vector<std::uint64_t> candidates = std::vector<std::uint64_t>(1u << n);
  GainFixture() { std::iota(candidates.begin(), candidates.end(), 0); }
  kernels::GainProblem problem() const { return {&kernel, output_law, 0.3, 0.05, n, fresh, base}; }
};

template <auto Kernel>
void oracle(benchmark::State& state) {
  const OracleFixture f;
  const auto p = f.problem();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p));
}

template <auto Kernel>
void ensemble(benchmark::State& state) {
  const EnsembleFixture f;
  const auto p = f.problem();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p));
}

template <auto Kernel>
void gains(benchmark::State& state) {
  const GainFixture f;
  const auto p = f.problem();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p, f.candidates));
}

}  // namespace

BENCHMARK(oracle<kernels::serial::min_map_error>)->Name("oracle/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(oracle<kernels::parallel::min_map_error>)->Name("oracle/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(ensemble<kernels::serial::ensemble_error_terms>)->Name("ensemble/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(ensemble<kernels::parallel::ensemble_error_terms>)
    ->Name("ensemble/parallel")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(gains<kernels::serial::candidate_gains>)->Name("gains/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(gains<kernels::parallel::candidate_gains>)->Name("gains/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
