#include "islab/common.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace islab {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("matrix has no rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols) throw ValidationError("matrix rows have unequal lengths");
    std::copy(rows[r].begin(), rows[r].end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
  }
  return m;
}

void validate_pmf(std::span<const double> pmf, const std::string& what) {
  if (pmf.empty()) throw ValidationError(what + ": empty distribution");
  CompensatedSum total;
  for (double p : pmf) {
    if (!std::isfinite(p) || p < 0.0) {
      std::ostringstream os;
      os << what << ": invalid probability " << p;
      throw ValidationError(os.str());
    }
    total += p;
  }
  if (std::abs(total.value() - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": probabilities sum to " << total.value();
    throw ValidationError(os.str());
  }
}

void validate_stochastic(const Matrix& m, const std::string& what) {
  if (m.rows == 0 || m.cols == 0) throw ValidationError(what + ": empty kernel");
  for (std::size_t r = 0; r < m.rows; ++r) validate_pmf(m.row(r), what + " row " + std::to_string(r));
}

std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t limit) {
  if (a == 0 || b == 0) return 0;
  if (a > limit / b) return std::nullopt;
  const std::uint64_t p = a * b;
  if (p > limit) return std::nullopt;
  return p;
}

std::optional<std::uint64_t> checked_pow(std::uint64_t base, int exp, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    auto next = checked_mul(r, base, limit);
    if (!next) return std::nullopt;
    r = *next;
  }
  if (r > limit) return std::nullopt;
  return r;
}

void require_budget(std::optional<std::uint64_t> count, std::uint64_t limit, const std::string& what) {
  if (!count || *count > limit) {
    std::ostringstream os;
    os << what << " exceeds the enumeration budget of " << limit;
    throw BudgetExceeded(os.str());
  }
}

std::vector<int> digits_of(std::uint64_t index, int base, int length) {
  std::vector<int> d(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i) {
    d[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return d;
}

std::optional<std::uint64_t> composition_count(int parts, int total, std::uint64_t limit) {
  // C(total + parts - 1, parts - 1), built incrementally so intermediate
  // values stay exact.
  if (parts <= 0) return 0;
  const int k = parts - 1;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(total + i);
    auto scaled = checked_mul(c, num, std::numeric_limits<std::uint64_t>::max());
    if (!scaled) return std::nullopt;
    c = *scaled / static_cast<std::uint64_t>(i);
    if (c > limit) return std::nullopt;
  }
  return c;
}

double log_multinomial(std::span<const int> counts) {
  int n = 0;
  double r = 0.0;
  for (int c : counts) {
    n += c;
    r -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return r + std::lgamma(static_cast<double>(n) + 1.0);
}

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace islab
