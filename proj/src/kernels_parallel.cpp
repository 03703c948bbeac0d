#include "kernels_detail.hpp"

namespace islab::kernels::parallel {

OracleResult min_map_error(const OracleProblem& problem) {
  const auto total = static_cast<std::int64_t>(detail::encoder_count(problem));
  OracleResult best{2.0, 0};
#pragma omp parallel
  {
    std::vector<std::uint64_t> codewords(problem.source_mass.size());
    OracleResult local{2.0, 0};
#pragma omp for schedule(static)
    for (std::int64_t e = 0; e < total; ++e) {
      detail::decode_encoder(static_cast<std::uint64_t>(e), problem.kernel->rows, codewords);
      const OracleResult cand{map_error_of(problem, codewords), static_cast<std::uint64_t>(e)};
      if (detail::better(cand, local)) local = cand;
    }
#pragma omp critical
    if (detail::better(local, best)) best = local;
  }
  return best;
}

std::vector<double> ensemble_error_terms(const EnsembleProblem& problem) {
  const auto m = static_cast<std::int64_t>(problem.input_rows.size());
  const std::uint64_t ys = problem.kernel->cols();
  Matrix joint(m, ys), hit(m, ys), cover(m, ys), others(m, ys);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t v = 0; v < m; ++v) {
    const auto off = static_cast<std::size_t>(v) * ys;
    detail::ensemble_rows(problem, static_cast<std::size_t>(v), &joint.data[off], &hit.data[off], &cover.data[off]);
  }
#pragma omp parallel
  {
    std::vector<double> scratch(static_cast<std::size_t>(m));
#pragma omp for schedule(static)
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(ys); ++y) {
      detail::exclusive_products(cover, static_cast<std::uint64_t>(y), scratch, others);
    }
  }
  std::vector<double> terms(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < m; ++v) {
    terms[static_cast<std::size_t>(v)] = detail::ensemble_term(joint, hit, others, static_cast<std::size_t>(v));
  }
  return terms;
}

std::vector<double> candidate_gains(const GainProblem& problem, std::span<const std::uint64_t> candidates) {
  std::vector<double> gains(candidates.size());
  const auto count = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    gains[static_cast<std::size_t>(i)] = detail::gain_of(problem, candidates[static_cast<std::size_t>(i)]);
  }
  return gains;
}

}  // namespace islab::kernels::parallel
