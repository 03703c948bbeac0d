#pragma once

// General sources, channels and channel-input laws with exact per-n access.
//
// Every law is indexed by a blocklength n and lives on a finite "block
// alphabet": letters^n for letter-structured families (iid sources, DMCs),
// or an arbitrary per-n alphabet for block and table families. Block symbols
// are plain indices; for letter-structured families the index is the
// sequence read as a radix-|letters| number, most significant letter first,
// so index order is lexicographic order.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "islab/common.hpp"
#include "islab/spectrum.hpp"

namespace islab {

class SourceModel {
 public:
  enum class Kind { Iid, UniformMessage, Mixed, Block, Table };

  static SourceModel iid(std::vector<double> pmf);
  /// Countable alphabet cut to finite support: symbols 0..K-1 keep their
  /// probabilities and one trailing sentinel symbol carries the remaining
  /// tail, where K is the first index with tail <= `tail`.
  static SourceModel truncated_countable(const std::function<double(std::uint64_t)>& pmf_of,
                                         double tail = 1e-12, std::uint64_t max_symbols = 1'000'000);
  /// Uniform on {0..M-1} for every n.
  static SourceModel uniform_messages(std::uint64_t count);
  /// Uniform on base^n messages.
  static SourceModel uniform_messages_power(std::uint64_t base);
  static SourceModel uniform_messages_table(std::map<int, std::uint64_t> counts);
  static SourceModel mixed(std::vector<double> weights, std::vector<SourceModel> components);
  /// The same pmf on a fixed per-n alphabet for every n.
  static SourceModel block(std::vector<double> pmf);
  static SourceModel table(std::map<int, std::vector<double>> pmfs);
  static SourceModel scheduled(std::function<std::vector<double>(int)> pmf_at);

  Kind kind() const { return kind_; }
  bool letter_structured() const;
  int letters() const;  // per-letter alphabet size; 0 when not letter-structured
  const std::vector<double>& letter_pmf() const { return pmf_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const SourceModel> components() const { return components_; }

  /// |V_n|, or nullopt when it exceeds `limit`.
  std::optional<std::uint64_t> block_size(int n, std::uint64_t limit) const;
  /// Dense pmf over the block alphabet; validated to sum to 1.
  std::vector<double> pmf(int n, const Limits& limits = {}) const;

  /// Uniform-message families only.
  std::uint64_t message_count(int n) const;
  /// (1/n) ln M_n, computed without round-tripping through M_n for the
  /// power family so that base^n messages give exactly ln(base).
  double message_rate(int n) const;

 private:
  enum class MessageSchedule { Constant, Power, Table };

  Kind kind_ = Kind::Iid;
  std::vector<double> pmf_;
  MessageSchedule schedule_ = MessageSchedule::Constant;
  std::uint64_t message_param_ = 0;
  std::map<int, std::uint64_t> message_table_;
  std::vector<double> weights_;
  std::vector<SourceModel> components_;
  std::map<int, std::vector<double>> pmf_table_;
  std::function<std::vector<double>(int)> pmf_at_;
};

/// W^n(y|x) evaluated on block indices without materializing |X^n| x |Y^n|
/// tables for product channels: each letter-structured component is split
/// into a high-half and low-half table.
class BlockKernel {
 public:
  static BlockKernel dense(Matrix m);
  static BlockKernel product(const std::vector<double>& weights, const std::vector<Matrix>& letter_kernels, int n,
                             const Limits& limits);

  std::uint64_t rows() const { return rows_; }
  std::uint64_t cols() const { return cols_; }
  double operator()(std::uint64_t x, std::uint64_t y) const;
  Matrix to_dense(const Limits& limits) const;

 private:
  struct Part {
    double weight;
    Matrix hi;
    Matrix lo;
  };

  std::uint64_t rows_ = 0;
  std::uint64_t cols_ = 0;
  bool dense_form_ = true;
  Matrix dense_;
  std::vector<Part> parts_;
  std::uint64_t lo_rows_ = 1;
  std::uint64_t lo_cols_ = 1;
};

class ChannelModel {
 public:
  enum class Kind { Dmc, Mixed, Block, Table };

  static ChannelModel dmc(Matrix w);
  static ChannelModel bsc(double crossover);
  static ChannelModel noiseless(int letters);
  /// Letter map x -> map[x] applied symbol by symbol.
  static ChannelModel deterministic(const std::vector<int>& map, int outputs);
  static ChannelModel mixed(std::vector<double> weights, std::vector<ChannelModel> components);
  /// One kernel on fixed per-n alphabets, used for every n.
  static ChannelModel block(Matrix kernel);
  static ChannelModel table(std::map<int, Matrix> kernels);

  Kind kind() const { return kind_; }
  bool letter_structured() const;
  /// All components are DMCs with identical letter dimensions.
  bool product_mixture() const;
  int input_letters() const;
  int output_letters() const;
  const Matrix& letter_kernel() const { return w_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const ChannelModel> components() const { return components_; }

  std::optional<std::uint64_t> input_size(int n, std::uint64_t limit) const;
  std::optional<std::uint64_t> output_size(int n, std::uint64_t limit) const;
  BlockKernel kernel(int n, const Limits& limits = {}) const;

 private:
  Kind kind_ = Kind::Dmc;
  Matrix w_;
  std::vector<double> weights_;
  std::vector<ChannelModel> components_;
  std::map<int, Matrix> table_;
};

class InputModel {
 public:
  enum class Kind { IndependentIid, IndependentTable, Encoder, ConditionalLetter, ConditionalBlock, ConditionalTable };

  static InputModel iid(std::vector<double> pmf);
  static InputModel uniform(int letters);
  static InputModel independent_table(std::function<std::vector<double>(int)> pmf_at);
  /// X^n = phi_n(V^n) with phi_n given per n on block indices.
  static InputModel encoder(std::function<std::vector<std::uint64_t>(int)> map_at);
  static InputModel encoder_block(std::vector<std::uint64_t> map);
  /// P(x^n | v^n) = prod P(x_i | v_i) for letter-structured sources.
  static InputModel conditional_letter(Matrix rows);
  static InputModel conditional_block(Matrix rows);
  static InputModel conditional_table(std::function<Matrix(int)> rows_at);

  Kind kind() const { return kind_; }
  bool independent() const { return kind_ == Kind::IndependentIid || kind_ == Kind::IndependentTable; }
  bool is_encoder() const { return kind_ == Kind::Encoder; }
  const std::vector<double>& letter_pmf() const { return pmf_; }

  /// P_{X^n}; independent kinds only.
  std::vector<double> marginal(int n, std::uint64_t input_size, const Limits& limits = {}) const;
  /// phi_n as a vector over source block symbols; encoder kind only.
  std::vector<std::uint64_t> encoder_map(int n, std::uint64_t source_size, std::uint64_t input_size) const;
  /// Dense |V_n| x |X_n| conditional law (every kind).
  Matrix conditional(int n, std::uint64_t source_size, std::uint64_t input_size, const Limits& limits = {}) const;

 private:
  Kind kind_ = Kind::IndependentIid;
  std::vector<double> pmf_;
  Matrix rows_;
  std::function<std::vector<double>(int)> pmf_at_;
  std::function<std::vector<std::uint64_t>(int)> map_at_;
  std::function<Matrix(int)> rows_at_;
};

/// (1/n) ln 1/p; +inf for p = 0.
double self_information(double p, int n);
/// (1/n) ln w / p_y; -inf for w = 0.
double information_density(double w, double p_y, int n);

/// Exact law of (1/n) ln 1/P_{V^n}(V^n). Mixed sources use type classes when
/// every component is iid, exhaustive enumeration when the block alphabet
/// fits the budget, and otherwise the upper mixture bracket.
Spectrum entropy_spectrum(const SourceModel& src, int n, const Limits& limits = {});

/// Exact law of (1/n) ln W^n(Y|X) / P_{Y^n}(Y) for an input independent of
/// the source.
Spectrum information_spectrum(const ChannelModel& ch, const InputModel& input, int n, const Limits& limits = {});

/// Output law P_{Y^n} induced by source, input law and channel.
std::vector<double> output_distribution(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                        int n, const Limits& limits = {});

/// Joint law of (A_n, B_n) under V^n -> X^n -> Y^n. Factorizes for
/// independent inputs; enumerates (v, x, y) otherwise.
JointSpectrum joint_density_spectrum(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                     int n, const Limits& limits = {});

/// Checks that source, input and channel block alphabets agree at n.
void check_consistent(const SourceModel& src, const InputModel& input, const ChannelModel& ch, int n,
                      const Limits& limits = {});

}  // namespace islab
