#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace islab {

/// Malformed input: bad probabilities, inconsistent alphabets, invalid schedules.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exact computation would exceed its configured enumeration budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumeration budgets. Every exact computation checks the relevant count
/// before allocating; exceeding it throws BudgetExceeded.
struct Limits {
  std::uint64_t enumeration = 1'000'000;  // joint outcomes (v, x, y) or table entries
  std::uint64_t oracle = 10'000'000;      // encoders x per-encoder work in the optimal-code search
  std::uint64_t types = 5'000'000;        // type classes in product / mixture spectra
};

inline constexpr double kProbabilityTolerance = 1e-12;

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Dense row-major matrix of probabilities.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// Throws ValidationError unless `pmf` is nonnegative, finite and sums to 1.
void validate_pmf(std::span<const double> pmf, const std::string& what);
/// Every row must be a pmf.
void validate_stochastic(const Matrix& m, const std::string& what);

/// base^exp, or nullopt when the result exceeds `limit`.
std::optional<std::uint64_t> checked_pow(std::uint64_t base, int exp, std::uint64_t limit);
/// a * b, or nullopt when the product exceeds `limit`.
std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t limit);

/// Throws BudgetExceeded with a message naming `what` when count > limit.
void require_budget(std::optional<std::uint64_t> count, std::uint64_t limit, const std::string& what);

/// Digits of `index` in radix `base`, most significant first. Sequence
/// indices are ordered lexicographically this way.
std::vector<int> digits_of(std::uint64_t index, int base, int length);

/// Number of compositions of `total` into `parts` nonnegative parts, or
/// nullopt past `limit`.
std::optional<std::uint64_t> composition_count(int parts, int total, std::uint64_t limit);

/// Visit every composition of `total` into `parts` nonnegative parts in
/// lexicographic order.
template <typename F>
void for_each_composition(int parts, int total, F&& visit) {
  std::vector<int> counts(static_cast<std::size_t>(parts), 0);
  if (parts == 0) return;
  counts.back() = total;
  if (parts == 1) {
    visit(std::span<const int>(counts));
    return;
  }
  // counts[0..parts-2] free, last one takes the remainder.
  while (true) {
    visit(std::span<const int>(counts));
    int i = parts - 2;
    while (i >= 0) {
      if (counts.back() > 0) {
        ++counts[static_cast<std::size_t>(i)];
        --counts.back();
        break;
      }
      counts.back() += counts[static_cast<std::size_t>(i)];
      counts[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) return;
  }
}

/// ln(n! / prod counts!)
double log_multinomial(std::span<const int> counts);

/// ln(sum exp(x)) with -inf entries ignored; -inf when all are -inf.
double log_sum_exp(std::span<const double> xs);

}  // namespace islab
