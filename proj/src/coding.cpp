#include "islab/coding.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "islab/kernels.hpp"

namespace islab {
namespace {

constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();

void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be positive and finite");
}

struct Alphabets {
  std::uint64_t source;
  std::uint64_t input;
  std::uint64_t output;
};

Alphabets alphabets(const SourceModel& src, const ChannelModel& ch, int n, const Limits& limits) {
  const auto vs = src.block_size(n, limits.enumeration);
  const auto xs = ch.input_size(n, kNoLimit);
  const auto ys = ch.output_size(n, kNoLimit);
  require_budget(vs, limits.enumeration, "source alphabet");
  if (!xs || !ys) throw BudgetExceeded("channel alphabets overflow 64-bit indices");
  return {*vs, *xs, *ys};
}

std::vector<std::size_t> supported(std::span<const double> pv) {
  std::vector<std::size_t> s;
  for (std::size_t v = 0; v < pv.size(); ++v) {
    if (pv[v] > 0.0) s.push_back(v);
  }
  return s;
}

std::vector<double> output_law(const BlockKernel& kernel, std::span<const double> px) {
  std::vector<double> py(kernel.cols(), 0.0);
  for (std::uint64_t x = 0; x < kernel.rows(); ++x) {
    if (px[x] == 0.0) continue;
    for (std::uint64_t y = 0; y < kernel.cols(); ++y) py[y] += px[x] * kernel(x, y);
  }
  return py;
}

std::uint64_t draw(std::span<const double> pmf, std::mt19937_64& rng) {
  const double u = unit_uniform(rng);
  double run = 0.0;
  std::uint64_t last = 0;
  for (std::uint64_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] == 0.0) continue;
    last = i;
    run += pmf[i];
    if (u < run) return i;
  }
  return last;
}

}  // namespace

void JointCode::validate() const {
  if (n < 1) throw ValidationError("code blocklength must be positive");
  if (encoder.size() != source_size) throw ValidationError("encoder does not cover the source alphabet");
  if (decoder.size() != output_size) throw ValidationError("decoder does not cover the output alphabet");
  for (auto x : encoder) {
    if (x >= input_size) throw ValidationError("encoder maps outside the input alphabet");
  }
  for (auto v : decoder) {
    if (v != kDecodeFailure && v >= source_size) throw ValidationError("decoder maps outside the source alphabet");
  }
}

ErrorReport exact_error(const JointCode& code, const SourceModel& src, const ChannelModel& ch, const Limits& limits) {
  code.validate();
  const auto pv = src.pmf(code.n, limits);
  const Alphabets a = alphabets(src, ch, code.n, limits);
  if (a.source != code.source_size || a.input != code.input_size || a.output != code.output_size) {
    throw ValidationError("code alphabets do not match the source and channel");
  }
  const auto supp = supported(pv);
  require_budget(checked_mul(supp.size(), a.output, limits.enumeration), limits.enumeration, "exact error evaluation");
  const BlockKernel kernel = ch.kernel(code.n, limits);

  const bool all_symbols = checked_mul(a.source, a.output, limits.enumeration).has_value();
  ErrorReport r;
  r.per_symbol_errors.assign(a.source, 0.0);
  for (std::uint64_t v = 0; v < a.source; ++v) {
    if (pv[v] == 0.0 && !all_symbols) continue;
    CompensatedSum e;
    const std::uint64_t x = code.encoder[v];
    for (std::uint64_t y = 0; y < a.output; ++y) {
      if (code.decoder[y] != v) e += kernel(x, y);
    }
    r.per_symbol_errors[v] = std::min(1.0, e.value());
  }
  CompensatedSum avg;
  for (auto v : supp) {
    avg += pv[v] * r.per_symbol_errors[v];
    r.max_error = std::max(r.max_error, r.per_symbol_errors[v]);
  }
  r.average_error = avg.value();
  return r;
}

JointCode threshold_decoder(std::span<const std::uint64_t> codebook, const SourceModel& src, const ChannelModel& ch,
                            const InputModel& ensemble_input, double gamma, int n, const Limits& limits) {
  require_gamma(gamma);
  const auto pv = src.pmf(n, limits);
  const Alphabets a = alphabets(src, ch, n, limits);
  if (codebook.size() != a.source) throw ValidationError("codebook does not cover the source alphabet");
  const auto supp = supported(pv);
  require_budget(checked_mul(supp.size(), a.output, limits.enumeration), limits.enumeration, "threshold decoder");
  const auto py = output_distribution(src, ensemble_input, ch, n, limits);
  const BlockKernel kernel = ch.kernel(n, limits);

  JointCode code;
  code.n = n;
  code.source_size = a.source;
  code.input_size = a.input;
  code.output_size = a.output;
  code.encoder.assign(codebook.begin(), codebook.end());
  code.decoder.assign(a.output, kDecodeFailure);
  std::vector<double> self_info(supp.size());
  for (std::size_t k = 0; k < supp.size(); ++k) self_info[k] = self_information(pv[supp[k]], n);
  for (std::uint64_t y = 0; y < a.output; ++y) {
    std::uint64_t found = kDecodeFailure;
    int hits = 0;
    for (std::size_t k = 0; k < supp.size() && hits < 2; ++k) {
      const double w = kernel(codebook[supp[k]], y);
      if (w > 0.0 && kernels::in_decoding_set(w, py[y], self_info[k], gamma, n)) {
        found = supp[k];
        ++hits;
      }
    }
    if (hits == 1) code.decoder[y] = found;
  }
  code.validate();
  return code;
}

double ensemble_average_error(const SourceModel& src, const InputModel& input, const ChannelModel& ch, double gamma,
                              int n, const Limits& limits) {
  require_gamma(gamma);
  const auto pv = src.pmf(n, limits);
  const Alphabets a = alphabets(src, ch, n, limits);
  const auto supp = supported(pv);

  std::vector<kernels::SparseRow> rows(supp.size());
  if (input.is_encoder()) {
    const auto map = input.encoder_map(n, a.source, a.input);
    for (std::size_t k = 0; k < supp.size(); ++k) rows[k] = {{map[supp[k]], 1.0}};
  } else if (input.independent()) {
    require_budget(a.input <= limits.enumeration ? std::optional(a.input) : std::nullopt, limits.enumeration,
                   "input alphabet");
    const auto px = input.marginal(n, a.input, limits);
    kernels::SparseRow row;
    for (std::uint64_t x = 0; x < a.input; ++x) {
      if (px[x] > 0.0) row.push_back({x, px[x]});
    }
    std::fill(rows.begin(), rows.end(), row);
  } else {
    const Matrix cond = input.conditional(n, a.source, a.input, limits);
    for (std::size_t k = 0; k < supp.size(); ++k) {
      for (std::uint64_t x = 0; x < a.input; ++x) {
        if (cond(supp[k], x) > 0.0) rows[k].push_back({x, cond(supp[k], x)});
      }
    }
  }
  std::uint64_t work = 0;
  for (const auto& r : rows) work += r.size();
  require_budget(checked_mul(work, a.output, limits.enumeration), limits.enumeration, "ensemble error");

  const auto py = output_distribution(src, input, ch, n, limits);
  const BlockKernel kernel = ch.kernel(n, limits);
  std::vector<double> self_info(supp.size());
  for (std::size_t k = 0; k < supp.size(); ++k) self_info[k] = self_information(pv[supp[k]], n);
  const kernels::EnsembleProblem problem{self_info, rows, &kernel, py, gamma, n};
  const auto terms = kernels::parallel::ensemble_error_terms(problem);
  CompensatedSum e;
  for (std::size_t k = 0; k < supp.size(); ++k) e += pv[supp[k]] * terms[k];
  return std::clamp(e.value(), 0.0, 1.0);
}

JointCode map_decoder(std::span<const std::uint64_t> encoder, const SourceModel& src, const ChannelModel& ch, int n,
                      const Limits& limits) {
  const auto pv = src.pmf(n, limits);
  const Alphabets a = alphabets(src, ch, n, limits);
  if (encoder.size() != a.source) throw ValidationError("encoder does not cover the source alphabet");
  const auto supp = supported(pv);
  require_budget(checked_mul(supp.size(), a.output, limits.enumeration), limits.enumeration, "MAP decoder");
  const BlockKernel kernel = ch.kernel(n, limits);
  JointCode code;
  code.n = n;
  code.source_size = a.source;
  code.input_size = a.input;
  code.output_size = a.output;
  code.encoder.assign(encoder.begin(), encoder.end());
  code.decoder.assign(a.output, 0);
  for (std::uint64_t y = 0; y < a.output; ++y) {
    double best = 0.0;
    std::uint64_t arg = 0;
    for (auto v : supp) {
      const double score = pv[v] * kernel(encoder[v], y);
      if (score > best) {
        best = score;
        arg = v;
      }
    }
    code.decoder[y] = arg;
  }
  code.validate();
  return code;
}

OptimalCode brute_force_optimal_error(const SourceModel& src, const ChannelModel& ch, int n, const Limits& limits) {
  const auto pv = src.pmf(n, limits);
  const Alphabets a = alphabets(src, ch, n, limits);
  const auto supp = supported(pv);
  require_budget(checked_pow(a.input, static_cast<int>(supp.size()), limits.oracle), limits.oracle,
                 "optimal-code search");
  const Matrix kernel = ch.kernel(n, limits).to_dense(limits);
  std::vector<double> mass(supp.size());
  for (std::size_t k = 0; k < supp.size(); ++k) mass[k] = pv[supp[k]];
  const kernels::OracleProblem problem{mass, &kernel};
  const auto best = kernels::parallel::min_map_error(problem);

  std::vector<std::uint64_t> encoder(a.source, 0);
  std::uint64_t index = best.encoder_index;
  for (std::size_t k = supp.size(); k-- > 0;) {
    encoder[supp[k]] = index % a.input;
    index /= a.input;
  }
  OptimalCode out;
  out.code = map_decoder(encoder, src, ch, n, limits);
  out.error = exact_error(out.code, src, ch, limits).average_error;
  return out;
}

TwoStepResult two_step_code(const SourceModel& src, const ChannelModel& ch, const InputModel& channel_input,
                            double rate, double gamma, int n, const Limits& limits, std::uint64_t seed) {
  require_gamma(gamma);
  if (!std::isfinite(rate)) throw ValidationError("two_step_code: rate must be finite");
  if (!channel_input.independent()) throw ValidationError("two_step_code: channel input must not depend on the source");
  const auto pv = src.pmf(n, limits);
  const Alphabets a = alphabets(src, ch, n, limits);
  require_budget(checked_mul(a.input, a.output, limits.enumeration), limits.enumeration, "two-step channel stage");

  // Source stage: most probable sequences first, ties by index.
  auto order = supported(pv);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pv[x] > pv[y]; });
  TwoStepResult result;
  const double log_budget = rate * static_cast<double>(n);
  std::uint64_t m = order.size();
  if (log_budget < std::log(static_cast<double>(order.size()))) {
    const double bound = std::floor(std::exp(log_budget) * (1.0 + 1e-12));
    m = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::min(bound, static_cast<double>(order.size()))));
  }
  result.lossless_source = m == order.size();
  result.messages = m;

  // Channel stage: greedy derandomization of the iid threshold-decoder code.
  const auto px = channel_input.marginal(n, a.input, limits);
  const BlockKernel kernel = ch.kernel(n, limits);
  const auto py = output_law(kernel, px);
  const double message_rate = std::log(static_cast<double>(m)) / static_cast<double>(n);
  std::vector<double> cover(a.output, 0.0);
  std::vector<double> reward(a.output, 0.0);
  for (std::uint64_t x = 0; x < a.input; ++x) {
    if (px[x] == 0.0) continue;
    for (std::uint64_t y = 0; y < a.output; ++y) {
      const double w = kernel(x, y);
      if (w > 0.0 && kernels::in_decoding_set(w, py[y], message_rate, gamma, n)) {
        cover[y] += px[x];
        reward[y] += px[x] * w;
      }
    }
  }

  std::vector<std::uint64_t> candidates;
  for (std::uint64_t x = 0; x < a.input; ++x) {
    if (px[x] > 0.0) candidates.push_back(x);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[rng() % i]);

  std::vector<int> covering(a.output, 0);
  std::vector<double> covered_mass(a.output, 0.0);
  std::vector<double> fresh(a.output);
  std::vector<double> base(a.output);
  std::vector<std::uint64_t> codewords;
  std::size_t cursor = 0;
  constexpr std::size_t kChunk = 64;
  for (std::uint64_t step = 0; step < m; ++step) {
    const double unfixed = static_cast<double>(m - step);
    CompensatedSum avg_gain;
    for (std::uint64_t y = 0; y < a.output; ++y) {
      const double miss = 1.0 - cover[y];
      const double keep_rest = std::pow(miss, unfixed - 1.0);
      const double keep_others = unfixed >= 2.0 ? (unfixed - 1.0) * reward[y] * std::pow(miss, unfixed - 2.0) : 0.0;
      fresh[y] = covering[y] == 0 ? keep_rest : 0.0;
      base[y] = (covering[y] == 1 ? covered_mass[y] * keep_rest : 0.0) + (covering[y] == 0 ? keep_others : 0.0);
      avg_gain += fresh[y] * reward[y] - base[y] * cover[y];
    }
    const kernels::GainProblem problem{&kernel, py, message_rate, gamma, n, fresh, base};
    double best_gain = -std::numeric_limits<double>::infinity();
    std::uint64_t best_x = candidates.front();
    std::size_t scanned = 0;
    while (scanned < candidates.size()) {
      std::vector<std::uint64_t> chunk;
      for (std::size_t k = 0; k < kChunk && scanned + k < candidates.size(); ++k) {
        chunk.push_back(candidates[(cursor + scanned + k) % candidates.size()]);
      }
      const auto gains = kernels::parallel::candidate_gains(problem, chunk);
      for (std::size_t k = 0; k < chunk.size(); ++k) {
        if (gains[k] > best_gain) {
          best_gain = gains[k];
          best_x = chunk[k];
        }
      }
      scanned += chunk.size();
      if (best_gain >= avg_gain.value()) break;
    }
    cursor = (cursor + scanned) % candidates.size();
    codewords.push_back(best_x);
    for (std::uint64_t y = 0; y < a.output; ++y) {
      const double w = kernel(best_x, y);
      if (w > 0.0 && kernels::in_decoding_set(w, py[y], message_rate, gamma, n)) {
        ++covering[y];
        covered_mass[y] += w;
      }
    }
  }

  // Decode messages, then give the most reliable codewords to the most
  // probable sequences.
  std::vector<std::uint64_t> message_of(a.output, kDecodeFailure);
  for (std::uint64_t y = 0; y < a.output; ++y) {
    if (covering[y] != 1) continue;
    for (std::uint64_t k = 0; k < m; ++k) {
      const double w = kernel(codewords[k], y);
      if (w > 0.0 && kernels::in_decoding_set(w, py[y], message_rate, gamma, n)) {
        message_of[y] = k;
        break;
      }
    }
  }
  std::vector<double> message_error(m, 0.0);
  for (std::uint64_t k = 0; k < m; ++k) {
    CompensatedSum e;
    for (std::uint64_t y = 0; y < a.output; ++y) {
      if (message_of[y] != k) e += kernel(codewords[k], y);
    }
    message_error[k] = e.value();
  }
  std::vector<std::uint64_t> by_reliability(m);
  std::iota(by_reliability.begin(), by_reliability.end(), 0);
  std::stable_sort(by_reliability.begin(), by_reliability.end(),
                   [&](std::uint64_t x, std::uint64_t y) { return message_error[x] < message_error[y]; });
  CompensatedSum channel_error;
  for (double e : message_error) channel_error += e;
  result.channel_error = channel_error.value() / static_cast<double>(m);

  std::vector<std::uint64_t> source_of(m);
  JointCode& code = result.code;
  code.n = n;
  code.source_size = a.source;
  code.input_size = a.input;
  code.output_size = a.output;
  code.encoder.assign(a.source, codewords[by_reliability.front()]);
  for (std::uint64_t i = 0; i < m; ++i) {
    source_of[by_reliability[i]] = order[i];
    code.encoder[order[i]] = codewords[by_reliability[i]];
  }
  code.decoder.assign(a.output, kDecodeFailure);
  for (std::uint64_t y = 0; y < a.output; ++y) {
    if (message_of[y] != kDecodeFailure) code.decoder[y] = source_of[message_of[y]];
  }
  code.validate();

  result.error = exact_error(code, src, ch, limits);
  const Spectrum info = information_spectrum(ch, channel_input, n, limits);
  result.separation = separation_bound(entropy_spectrum(src, n, limits), info, rate, gamma);
  result.channel_feinstein = info.cdf(message_rate + gamma) + std::exp(-static_cast<double>(n) * gamma);
  return result;
}

std::vector<std::uint64_t> sample_codebook(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                           int n, std::mt19937_64& rng, const Limits& limits) {
  const Alphabets a = alphabets(src, ch, n, limits);
  std::vector<std::uint64_t> codebook(a.source);
  if (input.is_encoder()) return input.encoder_map(n, a.source, a.input);
  if (input.independent()) {
    const auto px = input.marginal(n, a.input, limits);
    for (auto& x : codebook) x = draw(px, rng);
    return codebook;
  }
  const Matrix cond = input.conditional(n, a.source, a.input, limits);
  for (std::uint64_t v = 0; v < a.source; ++v) codebook[v] = draw(cond.row(v), rng);
  return codebook;
}

InputModel encoder_input(const JointCode& code) {
  code.validate();
  return InputModel::encoder([map = code.encoder, n = code.n](int at) {
    if (at != n) throw ValidationError("code is defined at n=" + std::to_string(n) + " only");
    return map;
  });
}

JointSpectrum induced_joint(const JointCode& code, const SourceModel& src, const ChannelModel& ch,
                            const Limits& limits) {
  return joint_density_spectrum(src, encoder_input(code), ch, code.n, limits);
}

void write_code(std::ostream& out, const JointCode& code) {
  code.validate();
  out << "# joint-code n=" << code.n << " source=" << code.source_size << " input=" << code.input_size
      << " output=" << code.output_size << "\n";
  for (std::uint64_t v = 0; v < code.source_size; ++v) out << "E " << v << " " << code.encoder[v] << "\n";
  for (std::uint64_t y = 0; y < code.output_size; ++y) {
    out << "D " << y << " ";
    if (code.decoder[y] == kDecodeFailure) {
      out << "fail";
    } else {
      out << code.decoder[y];
    }
    out << "\n";
  }
}

JointCode read_code(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("code table: missing header");
  JointCode code;
  if (std::sscanf(line.c_str(), "# joint-code n=%d source=%" SCNu64 " input=%" SCNu64 " output=%" SCNu64, &code.n, &code.source_size,
                  &code.input_size, &code.output_size) != 4) {
    throw ValidationError("code table: malformed header");
  }
  code.encoder.assign(code.source_size, kDecodeFailure);
  code.decoder.assign(code.output_size, kDecodeFailure);
  std::vector<bool> decoder_seen(code.output_size, false);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string tag, target;
    std::uint64_t key = 0;
    if (!(row >> tag >> key >> target)) throw ValidationError("code table line " + std::to_string(line_no) + ": malformed");
    if (tag == "E" && key < code.source_size) {
      code.encoder[key] = std::stoull(target);
    } else if (tag == "D" && key < code.output_size) {
      code.decoder[key] = target == "fail" ? kDecodeFailure : std::stoull(target);
      decoder_seen[key] = true;
    } else {
      throw ValidationError("code table line " + std::to_string(line_no) + ": unknown entry");
    }
  }
  if (std::find(code.encoder.begin(), code.encoder.end(), kDecodeFailure) != code.encoder.end() ||
      std::find(decoder_seen.begin(), decoder_seen.end(), false) != decoder_seen.end()) {
    throw ValidationError("code table is incomplete");
  }
  code.validate();
  return code;
}

// ---------------------------------------------------------------- example

namespace {

std::vector<double> avg_max_gap_pmf(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  return {alpha, (1.0 - alpha) / 2.0, (1.0 - alpha) / 2.0};
}

}  // namespace

ChannelModel avg_max_gap_channel() { return ChannelModel::block(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}})); }

InputModel avg_max_gap_encoder() { return InputModel::encoder_block({0, 0, 1}); }

SourceModel avg_max_gap_source(std::function<double(int)> alpha_at) {
  return SourceModel::scheduled([f = std::move(alpha_at)](int n) { return avg_max_gap_pmf(f(n)); });
}

AvgMaxGapInstance avg_max_gap_instance(double alpha) {
  AvgMaxGapInstance inst{SourceModel::block(avg_max_gap_pmf(alpha)), avg_max_gap_channel(), JointCode{}};
  inst.code.n = 1;
  inst.code.source_size = 3;
  inst.code.input_size = 2;
  inst.code.output_size = 2;
  inst.code.encoder = {0, 0, 1};
  inst.code.decoder = {1, 2};
  return inst;
}

}  // namespace islab
