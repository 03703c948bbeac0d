#pragma once

// Per-work-item bodies shared by the serial and parallel kernels.

#include <algorithm>

#include "islab/kernels.hpp"

namespace islab::kernels::detail {

inline void decode_encoder(std::uint64_t index, std::uint64_t radix, std::span<std::uint64_t> codewords) {
  for (std::size_t k = codewords.size(); k-- > 0;) {
    codewords[k] = index % radix;
    index /= radix;
  }
}

inline std::uint64_t encoder_count(const OracleProblem& p) {
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < p.source_mass.size(); ++k) total *= p.kernel->rows;
  return total;
}

// Rows of the ensemble computation for supported symbol v:
// joint[y] = sum_x P(x|v) W(y|x), hit[y] = same restricted to S(v),
// cover[y] = sum_x P(x|v) 1{(x,y) in S(v)}.
inline void ensemble_rows(const EnsembleProblem& p, std::size_t v, double* joint, double* hit, double* cover) {
  const std::uint64_t ys = p.kernel->cols();
  for (std::uint64_t y = 0; y < ys; ++y) {
    CompensatedSum j, h, c;
    for (const auto& [x, px] : p.input_rows[v]) {
      const double w = (*p.kernel)(x, y);
      if (w == 0.0) continue;
      j += px * w;
      if (in_decoding_set(w, p.output_law[y], p.self_info[v], p.gamma, p.n)) {
        h += px * w;
        c += px;
      }
    }
    joint[y] = j.value();
    hit[y] = h.value();
    cover[y] = c.value();
  }
}

// others[v] = prod_{v' != v} (1 - cover[v'][y]) for one output y.
inline void exclusive_products(const Matrix& cover, std::uint64_t y, std::span<double> scratch, Matrix& others) {
  const std::size_t m = cover.rows;
  double run = 1.0;
  for (std::size_t v = 0; v < m; ++v) {
    scratch[v] = run;
    run *= 1.0 - cover(v, y);
  }
  run = 1.0;
  for (std::size_t v = m; v-- > 0;) {
    others(v, y) = scratch[v] * run;
    run *= 1.0 - cover(v, y);
  }
}

inline double ensemble_term(const Matrix& joint, const Matrix& hit, const Matrix& others, std::size_t v) {
  CompensatedSum e;
  for (std::size_t y = 0; y < joint.cols; ++y) e += joint(v, y) - hit(v, y) * others(v, y);
  return std::max(0.0, e.value());
}

inline double gain_of(const GainProblem& p, std::uint64_t x) {
  CompensatedSum g;
  const std::uint64_t ys = p.kernel->cols();
  for (std::uint64_t y = 0; y < ys; ++y) {
    const double w = (*p.kernel)(x, y);
    if (w == 0.0 || !in_decoding_set(w, p.output_law[y], p.rate, p.gamma, p.n)) continue;
    g += p.fresh_weight[y] * w - p.base[y];
  }
  return g.value();
}

inline bool better(const OracleResult& a, const OracleResult& b) {
  return a.error < b.error || (a.error == b.error && a.encoder_index < b.encoder_index);
}

}  // namespace islab::kernels::detail
