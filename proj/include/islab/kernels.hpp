#pragma once

// Hot loops of the coding module. Each kernel exists twice with identical
// signatures: `serial` is the reference implementation, `parallel` splits
// independent work items over OpenMP threads and reduces in a fixed order, so
// both return bit-identical results for any thread count.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "islab/common.hpp"
#include "islab/models.hpp"

namespace islab::kernels {

using SparseRow = std::vector<std::pair<std::uint64_t, double>>;

/// Exhaustive search over encoders of the supported source symbols, each
/// paired with its MAP decoder.
struct OracleProblem {
  std::span<const double> source_mass;  // supported symbols, in index order
  const Matrix* kernel = nullptr;       // dense |X_n| x |Y_n|
};

struct OracleResult {
  double error = 1.0;
  /// Encoder in radix |X_n|, first supported symbol most significant.
  std::uint64_t encoder_index = 0;
};

/// Exact ensemble error of the threshold-decoder random code.
struct EnsembleProblem {
  std::span<const double> self_info;      // B per supported symbol
  std::span<const SparseRow> input_rows;  // P(x | v) per supported symbol
  const BlockKernel* kernel = nullptr;
  std::span<const double> output_law;     // ensemble P_Y
  double gamma = 0.0;
  int n = 1;
};

/// Score of adding codeword x in the derandomized channel code:
/// sum over y in S(x) of fresh_weight[y] * W(y|x) - base[y].
struct GainProblem {
  const BlockKernel* kernel = nullptr;
  std::span<const double> output_law;
  double rate = 0.0;  // threshold statistic (1/n) ln M
  double gamma = 0.0;
  int n = 1;
  std::span<const double> fresh_weight;
  std::span<const double> base;
};

namespace serial {
OracleResult min_map_error(const OracleProblem& problem);
/// Per supported symbol: Pr{decoding error | V = v} averaged over codebooks.
std::vector<double> ensemble_error_terms(const EnsembleProblem& problem);
std::vector<double> candidate_gains(const GainProblem& problem, std::span<const std::uint64_t> candidates);
}  // namespace serial

namespace parallel {
OracleResult min_map_error(const OracleProblem& problem);
std::vector<double> ensemble_error_terms(const EnsembleProblem& problem);
std::vector<double> candidate_gains(const GainProblem& problem, std::span<const std::uint64_t> candidates);
}  // namespace parallel

/// MAP error of one encoder given as a digit vector; shared by both variants.
double map_error_of(const OracleProblem& problem, std::span<const std::uint64_t> codewords);

/// S membership for the threshold decoder.
inline bool in_decoding_set(double w, double p_y, double self_info, double gamma, int n) {
  return !density_at_most(information_density(w, p_y, n), self_info, gamma);
}

}  // namespace islab::kernels
