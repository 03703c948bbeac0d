#include "kernels_detail.hpp"

namespace islab::kernels {

double map_error_of(const OracleProblem& problem, std::span<const std::uint64_t> codewords) {
  const Matrix& k = *problem.kernel;
  CompensatedSum err;
  for (std::size_t y = 0; y < k.cols; ++y) {
    double sum = 0.0;
    double best = 0.0;
    for (std::size_t v = 0; v < codewords.size(); ++v) {
      const double joint = problem.source_mass[v] * k(codewords[v], y);
      sum += joint;
      best = std::max(best, joint);
    }
    err += sum - best;
  }
  return err.value();
}

namespace serial {

OracleResult min_map_error(const OracleProblem& problem) {
  const std::uint64_t total = detail::encoder_count(problem);
  std::vector<std::uint64_t> codewords(problem.source_mass.size());
  OracleResult best{2.0, 0};
  for (std::uint64_t e = 0; e < total; ++e) {
    detail::decode_encoder(e, problem.kernel->rows, codewords);
    const OracleResult cand{map_error_of(problem, codewords), e};
    if (detail::better(cand, best)) best = cand;
  }
  return best;
}

std::vector<double> ensemble_error_terms(const EnsembleProblem& problem) {
  const std::size_t m = problem.input_rows.size();
  const std::uint64_t ys = problem.kernel->cols();
  Matrix joint(m, ys), hit(m, ys), cover(m, ys), others(m, ys);
  for (std::size_t v = 0; v < m; ++v) {
    detail::ensemble_rows(problem, v, &joint.data[v * ys], &hit.data[v * ys], &cover.data[v * ys]);
  }
  std::vector<double> scratch(m);
  for (std::uint64_t y = 0; y < ys; ++y) detail::exclusive_products(cover, y, scratch, others);
  std::vector<double> terms(m);
  for (std::size_t v = 0; v < m; ++v) terms[v] = detail::ensemble_term(joint, hit, others, v);
  return terms;
}

std::vector<double> candidate_gains(const GainProblem& problem, std::span<const std::uint64_t> candidates) {
  std::vector<double> gains(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) gains[i] = detail::gain_of(problem, candidates[i]);
  return gains;
}

}  // namespace serial
}  // namespace islab::kernels
