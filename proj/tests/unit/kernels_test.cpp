#include <doctest.h>

#include <omp.h>

#include <cstring>
#include <numeric>
#include <random>

#include "islab/kernels.hpp"
#include "islab/models.hpp"

using namespace islab;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class ThreadCount {
 public:
  explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("oracle search is identical serially and in parallel") {
    const std::vector<double> mass{0.3, 0.25, 0.2, 0.15, 0.1};
    const auto kernel = ChannelModel::bsc(0.1).kernel(2).to_dense(Limits{});
    const kernels::OracleProblem p{mass, &kernel};
    const auto ref = kernels::serial::min_map_error(p);
    for (int threads : {1, 2, 3, 4}) {
      ThreadCount t(threads);
      const auto got = kernels::parallel::min_map_error(p);
      CHECK(std::memcmp(&got.error, &ref.error, sizeof(double)) == 0);
      CHECK(got.encoder_index == ref.encoder_index);
    }
  }

  TEST_CASE("ensemble terms are identical serially and in parallel") {
    const int n = 6;
    const auto kernel = ChannelModel::bsc(0.15).kernel(n);
    const auto pmf = SourceModel::iid({0.7, 0.3}).pmf(n);
    std::vector<double> self_info;
    std::vector<kernels::SparseRow> rows;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double p : pmf) {
      self_info.push_back(self_information(p, n));
      kernels::SparseRow row;
      double total = 0.0;
      for (std::uint64_t x = 0; x < 64; ++x) {
        if (unit(rng) < 0.3) {
          row.push_back({x, unit(rng)});
          total += row.back().second;
        }
      }
      if (row.empty()) row.push_back({0, total = 1.0});
      for (auto& e : row) e.second /= total;
      rows.push_back(row);
    }
    const std::vector<double> py(64, 1.0 / 64);
    for (double g : {0.01, 0.2}) {
      const kernels::EnsembleProblem p{self_info, rows, &kernel, py, g, n};
      const auto ref = kernels::serial::ensemble_error_terms(p);
      for (int threads : {1, 2, 4}) {
        ThreadCount t(threads);
        CHECK(bit_equal(kernels::parallel::ensemble_error_terms(p), ref));
      }
    }
  }

  TEST_CASE("candidate gains are identical serially and in parallel") {
    const int n = 8;
    const auto kernel = ChannelModel::bsc(0.05).kernel(n);
    const std::vector<double> py(256, 1.0 / 256);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> fresh(256), base(256);
    for (auto& f : fresh) f = unit(rng);
    for (auto& b : base) b = 0.01 * unit(rng);
    std::vector<std::uint64_t> candidates(256);
    std::iota(candidates.begin(), candidates.end(), 0);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const kernels::GainProblem p{&kernel, py, 0.3, 0.05, n, fresh, base};
    const auto ref = kernels::serial::candidate_gains(p, candidates);
    for (int threads : {1, 2, 3}) {
      ThreadCount t(threads);
      CHECK(bit_equal(kernels::parallel::candidate_gains(p, candidates), ref));
    }
  }

  TEST_CASE("map error of a single encoder") {
    const std::vector<double> mass{0.2, 0.4, 0.4};
    const auto kernel = ChannelModel::noiseless(2).kernel(1).to_dense(Limits{});
    const kernels::OracleProblem p{mass, &kernel};
    const std::vector<std::uint64_t> colliding{0, 0, 1};
    CHECK(kernels::map_error_of(p, colliding) == doctest::Approx(0.2).epsilon(1e-15));
    const auto best = kernels::serial::min_map_error(p);
    CHECK(best.error == doctest::Approx(0.2).epsilon(1e-15));
  }
}
