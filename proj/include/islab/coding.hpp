#pragma once

// Explicit joint source-channel codes, their exact error probabilities, the
// threshold-decoder random code and the exhaustive optimal-code oracle.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "islab/bounds.hpp"
#include "islab/models.hpp"

namespace islab {

/// Decoder output meaning "no unique candidate"; always counted as an error.
inline constexpr std::uint64_t kDecodeFailure = std::numeric_limits<std::uint64_t>::max();

struct JointCode {
  int n = 1;
  std::uint64_t source_size = 0;
  std::uint64_t input_size = 0;
  std::uint64_t output_size = 0;
  std::vector<std::uint64_t> encoder;  // source symbol -> input symbol
  std::vector<std::uint64_t> decoder;  // output symbol -> source symbol or kDecodeFailure

  void validate() const;
};

struct ErrorReport {
  double average_error = 0.0;
  double max_error = 0.0;  // over supported source symbols
  /// Pr{decoded != v | V = v} for every source symbol, supported or not.
  std::vector<double> per_symbol_errors;
};

ErrorReport exact_error(const JointCode& code, const SourceModel& src, const ChannelModel& ch,
                        const Limits& limits = {});

/// Decoder of the random-coding construction: y decodes to the unique v with
/// (codebook[v], y) in S(v), where S(v) is the set where the information
/// density (under the ensemble output law of `ensemble_input`) exceeds the
/// self-information of v plus gamma.
JointCode threshold_decoder(std::span<const std::uint64_t> codebook, const SourceModel& src, const ChannelModel& ch,
                            const InputModel& ensemble_input, double gamma, int n, const Limits& limits = {});

/// Exact expectation over codebooks drawn from `input` of the threshold
/// decoder's average error. Decode failures count as errors.
double ensemble_average_error(const SourceModel& src, const InputModel& input, const ChannelModel& ch, double gamma,
                              int n, const Limits& limits = {});

/// argmax_v P(v) W(y | encoder[v]); ties go to the smallest v.
JointCode map_decoder(std::span<const std::uint64_t> encoder, const SourceModel& src, const ChannelModel& ch, int n,
                      const Limits& limits = {});

struct OptimalCode {
  double error = 0.0;
  JointCode code;
};

/// Minimum average error over all encoders of the supported source symbols,
/// each with its MAP decoder. Requires |X_n|^|supp| <= limits.oracle.
OptimalCode brute_force_optimal_error(const SourceModel& src, const ChannelModel& ch, int n,
                                      const Limits& limits = {});

struct TwoStepResult {
  JointCode code;
  ErrorReport error;
  BoundReport separation;
  std::uint64_t messages = 0;
  bool lossless_source = false;
  /// Average error of the channel stage over its uniform messages.
  double channel_error = 0.0;
  /// Pr{A <= (1/n) ln M + gamma} + e^{-n gamma} for the channel stage.
  double channel_feinstein = 0.0;
};

/// Fixed-rate source code keeping the floor(e^{rate n}) most probable
/// sequences (ties lexicographic), followed by a channel code for the uniform
/// message set. The channel codebook is built greedily by conditional
/// expectations over the iid ensemble of `channel_input`, so its error never
/// exceeds the ensemble average; the most probable sequences get the most
/// reliable codewords.
TwoStepResult two_step_code(const SourceModel& src, const ChannelModel& ch, const InputModel& channel_input,
                            double rate, double gamma, int n, const Limits& limits = {}, std::uint64_t seed = 1);

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Codebook v -> x drawn from P(x | v) for every source symbol.
std::vector<std::uint64_t> sample_codebook(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                           int n, std::mt19937_64& rng, const Limits& limits = {});

/// Encoder of `code` as an input law (valid at code.n only).
InputModel encoder_input(const JointCode& code);
JointSpectrum induced_joint(const JointCode& code, const SourceModel& src, const ChannelModel& ch,
                            const Limits& limits = {});

/// Plain-text table: a header line, then one "E v x" line per source symbol
/// and one "D y v" (or "D y fail") line per output symbol.
void write_code(std::ostream& out, const JointCode& code);
JointCode read_code(std::istream& in);

/// Ternary source {alpha, (1-alpha)/2, (1-alpha)/2} over a noiseless binary
/// block channel with the best code: symbols 0 and 1 share a codeword and
/// its output decodes to 1. Average error alpha, maximum error 1.
struct AvgMaxGapInstance {
  SourceModel source;
  ChannelModel channel;
  JointCode code;
};

AvgMaxGapInstance avg_max_gap_instance(double alpha);
/// Same family with alpha varying in n, for n-grid diagnostics.
SourceModel avg_max_gap_source(std::function<double(int)> alpha_at);
InputModel avg_max_gap_encoder();
ChannelModel avg_max_gap_channel();

}  // namespace islab
