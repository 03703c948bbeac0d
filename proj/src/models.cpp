#include "islab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace islab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();

void require_blocklength(int n) {
  if (n < 1) throw ValidationError("blocklength must be positive");
}

std::uint64_t size_or_throw(std::optional<std::uint64_t> s, const std::string& what) {
  if (!s) throw BudgetExceeded(what + " overflows 64-bit indices");
  return *s;
}

// pmf^{(x) n} in lexicographic index order.
std::vector<double> product_pmf(std::span<const double> letter, int n, std::uint64_t limit) {
  require_budget(checked_pow(letter.size(), n, limit), limit, "product distribution");
  std::vector<double> out{1.0};
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(out.size() * letter.size());
    for (std::size_t a = 0; a < out.size(); ++a) {
      for (std::size_t b = 0; b < letter.size(); ++b) next[a * letter.size() + b] = out[a] * letter[b];
    }
    out = std::move(next);
  }
  return out;
}

Matrix kron_power(const Matrix& m, int len, std::uint64_t limit) {
  auto rows = checked_pow(m.rows, len, limit);
  auto cols = checked_pow(m.cols, len, limit);
  require_budget(rows && cols ? checked_mul(*rows, *cols, limit) : std::nullopt, limit, "product kernel table");
  Matrix out(1, 1, 1.0);
  for (int i = 0; i < len; ++i) {
    Matrix next(out.rows * m.rows, out.cols * m.cols);
    for (std::size_t r = 0; r < out.rows; ++r) {
      for (std::size_t c = 0; c < out.cols; ++c) {
        const double base = out(r, c);
        if (base == 0.0) continue;
        for (std::size_t a = 0; a < m.rows; ++a) {
          for (std::size_t b = 0; b < m.cols; ++b) next(r * m.rows + a, c * m.cols + b) = base * m(a, b);
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<Atom> self_information_atoms(std::span<const double> pmf, int n) {
  std::vector<Atom> atoms;
  atoms.reserve(pmf.size());
  for (double p : pmf) {
    if (p > 0.0) atoms.push_back({self_information(p, n), p});
  }
  return atoms;
}

// Exact spectrum of a statistic that depends only on the joint type of n
// draws over `cells`, under a mixture of product laws. component_log[j][c] is
// ln of the per-cell probability under component j (-inf allowed). The
// statistic receives the type counts and, per component, ln w_j + sum_c
// t_c ln q_j(c).
template <typename F>
Spectrum mixture_type_spectrum(std::span<const double> weights, const std::vector<std::vector<double>>& component_log,
                               int n, const Limits& limits, F&& statistic) {
  const int cells = static_cast<int>(component_log.front().size());
  require_budget(composition_count(cells, n, limits.types), limits.types, "mixture type classes");
  std::vector<double> log_w(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) log_w[j] = std::log(weights[j]);
  std::vector<double> comp(weights.size());
  std::vector<Atom> out;
  for_each_composition(cells, n, [&](std::span<const int> t) {
    for (std::size_t j = 0; j < weights.size(); ++j) {
      double s = log_w[j];
      for (std::size_t c = 0; c < t.size() && s != -kInf; ++c) {
        if (t[c] > 0) s += t[c] * component_log[j][c];
      }
      comp[j] = s;
    }
    const double log_seq = log_sum_exp(comp);
    if (log_seq == -kInf) return;
    out.push_back({statistic(t, std::span<const double>(comp)), std::exp(log_multinomial(t) + log_seq)});
  });
  return Spectrum::normalized(std::move(out), n, 0.0);
}

// Leaves of a (possibly nested) mixture of iid sources; false if any leaf is
// not iid or the alphabets differ.
bool flatten_iid_mixture(const SourceModel& src, double weight, std::vector<double>& weights,
                         std::vector<const std::vector<double>*>& pmfs) {
  if (src.kind() == SourceModel::Kind::Iid) {
    if (!pmfs.empty() && pmfs.front()->size() != src.letter_pmf().size()) return false;
    weights.push_back(weight);
    pmfs.push_back(&src.letter_pmf());
    return true;
  }
  if (src.kind() != SourceModel::Kind::Mixed) return false;
  for (std::size_t j = 0; j < src.components().size(); ++j) {
    if (!flatten_iid_mixture(src.components()[j], weight * src.weights()[j], weights, pmfs)) return false;
  }
  return true;
}

Spectrum mixed_iid_entropy_spectrum(std::span<const double> weights, const std::vector<const std::vector<double>*>& pmfs,
                                    int n, const Limits& limits) {
  const std::size_t k = pmfs.front()->size();
  std::vector<std::size_t> support;
  for (std::size_t a = 0; a < k; ++a) {
    if (std::any_of(pmfs.begin(), pmfs.end(), [a](const auto* p) { return (*p)[a] > 0.0; })) support.push_back(a);
  }
  std::vector<std::vector<double>> component_log(pmfs.size(), std::vector<double>(support.size()));
  for (std::size_t j = 0; j < pmfs.size(); ++j) {
    for (std::size_t c = 0; c < support.size(); ++c) {
      const double p = (*pmfs[j])[support[c]];
      component_log[j][c] = p > 0.0 ? std::log(p) : -kInf;
    }
  }
  const double dn = static_cast<double>(n);
  return mixture_type_spectrum(weights, component_log, n, limits,
                               [dn](std::span<const int>, std::span<const double> comp) {
                                 return -log_sum_exp(comp) / dn;
                               });
}

}  // namespace

// ---------------------------------------------------------------- sources

SourceModel SourceModel::iid(std::vector<double> pmf) {
  validate_pmf(pmf, "iid source");
  SourceModel s;
  s.kind_ = Kind::Iid;
  s.pmf_ = std::move(pmf);
  return s;
}

SourceModel SourceModel::truncated_countable(const std::function<double(std::uint64_t)>& pmf_of, double tail,
                                             std::uint64_t max_symbols) {
  if (!(tail > 0.0 && tail < 1.0)) throw ValidationError("countable source: tail must lie in (0, 1)");
  std::vector<double> pmf;
  CompensatedSum kept;
  for (std::uint64_t k = 0;; ++k) {
    if (k >= max_symbols) throw BudgetExceeded("countable source: tail not reached within the symbol limit");
    const double p = pmf_of(k);
    if (!std::isfinite(p) || p < 0.0) throw ValidationError("countable source: invalid probability");
    pmf.push_back(p);
    kept += p;
    if (1.0 - kept.value() <= tail) break;
  }
  const double rest = 1.0 - kept.value();
  if (rest > 0.0) pmf.push_back(rest);
  return iid(std::move(pmf));
}

SourceModel SourceModel::uniform_messages(std::uint64_t count) {
  if (count == 0) throw ValidationError("message set must be nonempty");
  SourceModel s;
  s.kind_ = Kind::UniformMessage;
  s.schedule_ = MessageSchedule::Constant;
  s.message_param_ = count;
  return s;
}

SourceModel SourceModel::uniform_messages_power(std::uint64_t base) {
  if (base == 0) throw ValidationError("message base must be positive");
  SourceModel s;
  s.kind_ = Kind::UniformMessage;
  s.schedule_ = MessageSchedule::Power;
  s.message_param_ = base;
  return s;
}

SourceModel SourceModel::uniform_messages_table(std::map<int, std::uint64_t> counts) {
  if (counts.empty()) throw ValidationError("message table is empty");
  for (const auto& [n, m] : counts) {
    if (n < 1 || m == 0) throw ValidationError("message table entries must have n >= 1 and M >= 1");
  }
  SourceModel s;
  s.kind_ = Kind::UniformMessage;
  s.schedule_ = MessageSchedule::Table;
  s.message_table_ = std::move(counts);
  return s;
}

SourceModel SourceModel::mixed(std::vector<double> weights, std::vector<SourceModel> components) {
  if (components.empty() || weights.size() != components.size()) {
    throw ValidationError("mixed source: weights and components must be nonempty and of equal length");
  }
  validate_pmf(weights, "mixed source weights");
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("mixed source: weights must be positive");
  }
  SourceModel s;
  s.kind_ = Kind::Mixed;
  s.weights_ = std::move(weights);
  s.components_ = std::move(components);
  const bool letters = std::all_of(s.components_.begin(), s.components_.end(),
                                   [](const SourceModel& c) { return c.letter_structured(); });
  if (letters) {
    for (const auto& c : s.components_) {
      if (c.letters() != s.components_.front().letters()) {
        throw ValidationError("mixed source: components have different alphabets");
      }
    }
  }
  return s;
}

SourceModel SourceModel::block(std::vector<double> pmf) {
  validate_pmf(pmf, "block source");
  SourceModel s;
  s.kind_ = Kind::Block;
  s.pmf_ = std::move(pmf);
  return s;
}

SourceModel SourceModel::table(std::map<int, std::vector<double>> pmfs) {
  if (pmfs.empty()) throw ValidationError("source table is empty");
  for (const auto& [n, p] : pmfs) {
    if (n < 1) throw ValidationError("source table blocklengths must be positive");
    validate_pmf(p, "source table n=" + std::to_string(n));
  }
  SourceModel s;
  s.kind_ = Kind::Table;
  s.pmf_table_ = std::move(pmfs);
  return s;
}

SourceModel SourceModel::scheduled(std::function<std::vector<double>(int)> pmf_at) {
  if (!pmf_at) throw ValidationError("scheduled source needs a generator");
  SourceModel s;
  s.kind_ = Kind::Table;
  s.pmf_at_ = std::move(pmf_at);
  return s;
}

bool SourceModel::letter_structured() const {
  if (kind_ == Kind::Iid) return true;
  if (kind_ != Kind::Mixed) return false;
  return std::all_of(components_.begin(), components_.end(),
                     [](const SourceModel& c) { return c.letter_structured(); });
}

int SourceModel::letters() const {
  if (kind_ == Kind::Iid) return static_cast<int>(pmf_.size());
  if (letter_structured()) return components_.front().letters();
  return 0;
}

std::optional<std::uint64_t> SourceModel::block_size(int n, std::uint64_t limit) const {
  require_blocklength(n);
  std::uint64_t size = 0;
  switch (kind_) {
    case Kind::Iid:
      return checked_pow(pmf_.size(), n, limit);
    case Kind::UniformMessage:
      if (schedule_ == MessageSchedule::Power) return checked_pow(message_param_, n, limit);
      size = message_count(n);
      break;
    case Kind::Mixed:
      return components_.front().block_size(n, limit);
    case Kind::Block:
      size = pmf_.size();
      break;
    case Kind::Table:
      if (pmf_at_) {
        size = pmf_at_(n).size();
      } else {
        auto it = pmf_table_.find(n);
        if (it == pmf_table_.end()) throw ValidationError("source table has no entry for n=" + std::to_string(n));
        size = it->second.size();
      }
      break;
  }
  if (size > limit) return std::nullopt;
  return size;
}

std::vector<double> SourceModel::pmf(int n, const Limits& limits) const {
  require_blocklength(n);
  switch (kind_) {
    case Kind::Iid:
      return product_pmf(pmf_, n, limits.enumeration);
    case Kind::UniformMessage: {
      const auto m = block_size(n, limits.enumeration);
      require_budget(m, limits.enumeration, "message set");
      return std::vector<double>(*m, 1.0 / static_cast<double>(*m));
    }
    case Kind::Mixed: {
      std::vector<double> out;
      for (std::size_t j = 0; j < components_.size(); ++j) {
        const auto p = components_[j].pmf(n, limits);
        if (j == 0) {
          out.assign(p.size(), 0.0);
        } else if (p.size() != out.size()) {
          throw ValidationError("mixed source: components have different block alphabets");
        }
        for (std::size_t v = 0; v < p.size(); ++v) out[v] += weights_[j] * p[v];
      }
      return out;
    }
    case Kind::Block:
      require_budget(pmf_.size(), limits.enumeration, "block source");
      return pmf_;
    case Kind::Table: {
      std::vector<double> p;
      if (pmf_at_) {
        p = pmf_at_(n);
        validate_pmf(p, "scheduled source n=" + std::to_string(n));
      } else {
        auto it = pmf_table_.find(n);
        if (it == pmf_table_.end()) throw ValidationError("source table has no entry for n=" + std::to_string(n));
        p = it->second;
      }
      require_budget(p.size(), limits.enumeration, "source table");
      return p;
    }
  }
  return {};
}

std::uint64_t SourceModel::message_count(int n) const {
  require_blocklength(n);
  if (kind_ != Kind::UniformMessage) throw ValidationError("message_count: not a uniform-message source");
  switch (schedule_) {
    case MessageSchedule::Constant:
      return message_param_;
    case MessageSchedule::Power:
      return size_or_throw(checked_pow(message_param_, n, kNoLimit), "message count");
    case MessageSchedule::Table: {
      auto it = message_table_.find(n);
      if (it == message_table_.end()) throw ValidationError("message table has no entry for n=" + std::to_string(n));
      return it->second;
    }
  }
  return 0;
}

double SourceModel::message_rate(int n) const {
  if (kind_ == Kind::UniformMessage && schedule_ == MessageSchedule::Power) {
    return std::log(static_cast<double>(message_param_));
  }
  return std::log(static_cast<double>(message_count(n))) / static_cast<double>(n);
}

// ---------------------------------------------------------------- kernels

BlockKernel BlockKernel::dense(Matrix m) {
  validate_stochastic(m, "block kernel");
  BlockKernel k;
  k.rows_ = m.rows;
  k.cols_ = m.cols;
  k.dense_form_ = true;
  k.dense_ = std::move(m);
  return k;
}

BlockKernel BlockKernel::product(const std::vector<double>& weights, const std::vector<Matrix>& letter_kernels, int n,
                                 const Limits& limits) {
  require_blocklength(n);
  if (letter_kernels.empty() || weights.size() != letter_kernels.size()) {
    throw ValidationError("product kernel: weights and kernels must be nonempty and of equal length");
  }
  const Matrix& first = letter_kernels.front();
  BlockKernel k;
  k.dense_form_ = false;
  k.rows_ = size_or_throw(checked_pow(first.rows, n, kNoLimit), "channel input alphabet");
  k.cols_ = size_or_throw(checked_pow(first.cols, n, kNoLimit), "channel output alphabet");
  const int lo_len = n / 2;
  const int hi_len = n - lo_len;
  k.lo_rows_ = *checked_pow(first.rows, lo_len, kNoLimit);
  k.lo_cols_ = *checked_pow(first.cols, lo_len, kNoLimit);
  for (std::size_t j = 0; j < letter_kernels.size(); ++j) {
    const Matrix& w = letter_kernels[j];
    if (w.rows != first.rows || w.cols != first.cols) throw ValidationError("product kernel: dimension mismatch");
    k.parts_.push_back({weights[j], kron_power(w, hi_len, limits.enumeration), kron_power(w, lo_len, limits.enumeration)});
  }
  return k;
}

double BlockKernel::operator()(std::uint64_t x, std::uint64_t y) const {
  if (dense_form_) return dense_(x, y);
  const std::uint64_t xh = x / lo_rows_;
  const std::uint64_t xl = x % lo_rows_;
  const std::uint64_t yh = y / lo_cols_;
  const std::uint64_t yl = y % lo_cols_;
  double s = 0.0;
  for (const Part& p : parts_) {
    const double h = p.hi(xh, yh);
    if (h != 0.0) s += p.weight * h * p.lo(xl, yl);
  }
  return s;
}

Matrix BlockKernel::to_dense(const Limits& limits) const {
  if (dense_form_) return dense_;
  require_budget(checked_mul(rows_, cols_, limits.enumeration), limits.enumeration, "dense channel kernel");
  Matrix m(rows_, cols_);
  for (std::uint64_t x = 0; x < rows_; ++x) {
    for (std::uint64_t y = 0; y < cols_; ++y) m(x, y) = (*this)(x, y);
  }
  return m;
}

// ---------------------------------------------------------------- channels

ChannelModel ChannelModel::dmc(Matrix w) {
  validate_stochastic(w, "DMC");
  ChannelModel c;
  c.kind_ = Kind::Dmc;
  c.w_ = std::move(w);
  return c;
}

ChannelModel ChannelModel::bsc(double crossover) {
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw ValidationError("BSC crossover must lie in [0, 1]");
  return dmc(Matrix::from_rows({{1.0 - crossover, crossover}, {crossover, 1.0 - crossover}}));
}

ChannelModel ChannelModel::noiseless(int letters) {
  if (letters < 1) throw ValidationError("noiseless channel needs at least one letter");
  Matrix m(static_cast<std::size_t>(letters), static_cast<std::size_t>(letters));
  for (std::size_t i = 0; i < m.rows; ++i) m(i, i) = 1.0;
  return dmc(std::move(m));
}

ChannelModel ChannelModel::deterministic(const std::vector<int>& map, int outputs) {
  if (map.empty() || outputs < 1) throw ValidationError("deterministic channel: empty map");
  Matrix m(map.size(), static_cast<std::size_t>(outputs));
  for (std::size_t x = 0; x < map.size(); ++x) {
    if (map[x] < 0 || map[x] >= outputs) throw ValidationError("deterministic channel: output out of range");
    m(x, static_cast<std::size_t>(map[x])) = 1.0;
  }
  return dmc(std::move(m));
}

ChannelModel ChannelModel::mixed(std::vector<double> weights, std::vector<ChannelModel> components) {
  if (components.empty() || weights.size() != components.size()) {
    throw ValidationError("mixed channel: weights and components must be nonempty and of equal length");
  }
  validate_pmf(weights, "mixed channel weights");
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("mixed channel: weights must be positive");
  }
  ChannelModel c;
  c.kind_ = Kind::Mixed;
  c.weights_ = std::move(weights);
  c.components_ = std::move(components);
  return c;
}

ChannelModel ChannelModel::block(Matrix kernel) {
  validate_stochastic(kernel, "block channel");
  ChannelModel c;
  c.kind_ = Kind::Block;
  c.w_ = std::move(kernel);
  return c;
}

ChannelModel ChannelModel::table(std::map<int, Matrix> kernels) {
  if (kernels.empty()) throw ValidationError("channel table is empty");
  for (const auto& [n, m] : kernels) {
    if (n < 1) throw ValidationError("channel table blocklengths must be positive");
    validate_stochastic(m, "channel table n=" + std::to_string(n));
  }
  ChannelModel c;
  c.kind_ = Kind::Table;
  c.table_ = std::move(kernels);
  return c;
}

bool ChannelModel::product_mixture() const {
  if (kind_ != Kind::Mixed) return false;
  const auto& first = components_.front();
  return std::all_of(components_.begin(), components_.end(), [&](const ChannelModel& c) {
    return c.kind_ == Kind::Dmc && c.w_.rows == first.w_.rows && c.w_.cols == first.w_.cols;
  });
}

bool ChannelModel::letter_structured() const { return kind_ == Kind::Dmc || product_mixture(); }

int ChannelModel::input_letters() const {
  if (kind_ == Kind::Dmc) return static_cast<int>(w_.rows);
  if (product_mixture()) return components_.front().input_letters();
  return 0;
}

int ChannelModel::output_letters() const {
  if (kind_ == Kind::Dmc) return static_cast<int>(w_.cols);
  if (product_mixture()) return components_.front().output_letters();
  return 0;
}

std::optional<std::uint64_t> ChannelModel::input_size(int n, std::uint64_t limit) const {
  require_blocklength(n);
  std::uint64_t size = 0;
  switch (kind_) {
    case Kind::Dmc:
      return checked_pow(w_.rows, n, limit);
    case Kind::Mixed:
      return components_.front().input_size(n, limit);
    case Kind::Block:
      size = w_.rows;
      break;
    case Kind::Table: {
      auto it = table_.find(n);
      if (it == table_.end()) throw ValidationError("channel table has no entry for n=" + std::to_string(n));
      size = it->second.rows;
      break;
    }
  }
  if (size > limit) return std::nullopt;
  return size;
}

std::optional<std::uint64_t> ChannelModel::output_size(int n, std::uint64_t limit) const {
  require_blocklength(n);
  std::uint64_t size = 0;
  switch (kind_) {
    case Kind::Dmc:
      return checked_pow(w_.cols, n, limit);
    case Kind::Mixed:
      return components_.front().output_size(n, limit);
    case Kind::Block:
      size = w_.cols;
      break;
    case Kind::Table: {
      auto it = table_.find(n);
      if (it == table_.end()) throw ValidationError("channel table has no entry for n=" + std::to_string(n));
      size = it->second.cols;
      break;
    }
  }
  if (size > limit) return std::nullopt;
  return size;
}

BlockKernel ChannelModel::kernel(int n, const Limits& limits) const {
  require_blocklength(n);
  switch (kind_) {
    case Kind::Dmc:
      return BlockKernel::product({1.0}, {w_}, n, limits);
    case Kind::Mixed: {
      if (product_mixture()) {
        std::vector<Matrix> ws;
        for (const auto& c : components_) ws.push_back(c.w_);
        return BlockKernel::product(weights_, ws, n, limits);
      }
      Matrix sum;
      for (std::size_t j = 0; j < components_.size(); ++j) {
        const Matrix m = components_[j].kernel(n, limits).to_dense(limits);
        if (j == 0) {
          sum = Matrix(m.rows, m.cols);
        } else if (m.rows != sum.rows || m.cols != sum.cols) {
          throw ValidationError("mixed channel: components have different block alphabets");
        }
        for (std::size_t i = 0; i < m.data.size(); ++i) sum.data[i] += weights_[j] * m.data[i];
      }
      return BlockKernel::dense(std::move(sum));
    }
    case Kind::Block:
      return BlockKernel::dense(w_);
    case Kind::Table: {
      auto it = table_.find(n);
      if (it == table_.end()) throw ValidationError("channel table has no entry for n=" + std::to_string(n));
      return BlockKernel::dense(it->second);
    }
  }
  return BlockKernel::dense(w_);
}

// ---------------------------------------------------------------- inputs

InputModel InputModel::iid(std::vector<double> pmf) {
  validate_pmf(pmf, "iid input");
  InputModel in;
  in.kind_ = Kind::IndependentIid;
  in.pmf_ = std::move(pmf);
  return in;
}

InputModel InputModel::uniform(int letters) {
  if (letters < 1) throw ValidationError("uniform input needs at least one letter");
  return iid(std::vector<double>(static_cast<std::size_t>(letters), 1.0 / letters));
}

InputModel InputModel::independent_table(std::function<std::vector<double>(int)> pmf_at) {
  if (!pmf_at) throw ValidationError("input table needs a generator");
  InputModel in;
  in.kind_ = Kind::IndependentTable;
  in.pmf_at_ = std::move(pmf_at);
  return in;
}

InputModel InputModel::encoder(std::function<std::vector<std::uint64_t>(int)> map_at) {
  if (!map_at) throw ValidationError("encoder input needs a generator");
  InputModel in;
  in.kind_ = Kind::Encoder;
  in.map_at_ = std::move(map_at);
  return in;
}

InputModel InputModel::encoder_block(std::vector<std::uint64_t> map) {
  if (map.empty()) throw ValidationError("encoder map is empty");
  return encoder([m = std::move(map)](int) { return m; });
}

InputModel InputModel::conditional_letter(Matrix rows) {
  validate_stochastic(rows, "conditional input");
  InputModel in;
  in.kind_ = Kind::ConditionalLetter;
  in.rows_ = std::move(rows);
  return in;
}

InputModel InputModel::conditional_block(Matrix rows) {
  validate_stochastic(rows, "conditional input");
  InputModel in;
  in.kind_ = Kind::ConditionalBlock;
  in.rows_ = std::move(rows);
  return in;
}

InputModel InputModel::conditional_table(std::function<Matrix(int)> rows_at) {
  if (!rows_at) throw ValidationError("conditional input table needs a generator");
  InputModel in;
  in.kind_ = Kind::ConditionalTable;
  in.rows_at_ = std::move(rows_at);
  return in;
}

std::vector<double> InputModel::marginal(int n, std::uint64_t input_size, const Limits& limits) const {
  require_blocklength(n);
  std::vector<double> p;
  if (kind_ == Kind::IndependentIid) {
    if (checked_pow(pmf_.size(), n, kNoLimit) != input_size) {
      throw ValidationError("input alphabet does not match the channel input alphabet");
    }
    p = product_pmf(pmf_, n, limits.enumeration);
  } else if (kind_ == Kind::IndependentTable) {
    p = pmf_at_(n);
    validate_pmf(p, "input table n=" + std::to_string(n));
    if (p.size() != input_size) throw ValidationError("input alphabet does not match the channel input alphabet");
  } else {
    throw ValidationError("marginal: input law depends on the source");
  }
  return p;
}

std::vector<std::uint64_t> InputModel::encoder_map(int n, std::uint64_t source_size, std::uint64_t input_size) const {
  if (kind_ != Kind::Encoder) throw ValidationError("encoder_map: input is not an encoder");
  auto map = map_at_(n);
  if (map.size() != source_size) throw ValidationError("encoder map does not cover the source alphabet");
  for (auto x : map) {
    if (x >= input_size) throw ValidationError("encoder maps outside the channel input alphabet");
  }
  return map;
}

Matrix InputModel::conditional(int n, std::uint64_t source_size, std::uint64_t input_size, const Limits& limits) const {
  require_blocklength(n);
  require_budget(checked_mul(source_size, input_size, limits.enumeration), limits.enumeration,
                 "conditional input table");
  Matrix out(source_size, input_size);
  switch (kind_) {
    case Kind::IndependentIid:
    case Kind::IndependentTable: {
      const auto p = marginal(n, input_size, limits);
      for (std::size_t v = 0; v < out.rows; ++v) std::copy(p.begin(), p.end(), out.data.begin() + v * out.cols);
      return out;
    }
    case Kind::Encoder: {
      const auto map = encoder_map(n, source_size, input_size);
      for (std::size_t v = 0; v < map.size(); ++v) out(v, map[v]) = 1.0;
      return out;
    }
    case Kind::ConditionalLetter: {
      if (checked_pow(rows_.rows, n, kNoLimit) != source_size || checked_pow(rows_.cols, n, kNoLimit) != input_size) {
        throw ValidationError("conditional input does not match the source and channel alphabets");
      }
      return kron_power(rows_, n, limits.enumeration);
    }
    case Kind::ConditionalBlock:
    case Kind::ConditionalTable: {
      Matrix m = kind_ == Kind::ConditionalBlock ? rows_ : rows_at_(n);
      if (kind_ == Kind::ConditionalTable) validate_stochastic(m, "conditional input n=" + std::to_string(n));
      if (m.rows != source_size || m.cols != input_size) {
        throw ValidationError("conditional input does not match the source and channel alphabets");
      }
      return m;
    }
  }
  return out;
}

// ---------------------------------------------------------------- spectra

double self_information(double p, int n) {
  if (!(p > 0.0)) return kInf;
  return -std::log(p) / static_cast<double>(n);
}

double information_density(double w, double p_y, int n) {
  if (!(w > 0.0)) return -kInf;
  if (!(p_y > 0.0)) return kInf;
  return (std::log(w) - std::log(p_y)) / static_cast<double>(n);
}

Spectrum entropy_spectrum(const SourceModel& src, int n, const Limits& limits) {
  require_blocklength(n);
  switch (src.kind()) {
    case SourceModel::Kind::Iid:
      return convolve_iid(Spectrum(self_information_atoms(src.letter_pmf(), 1), 1), n, limits);
    case SourceModel::Kind::UniformMessage:
      return Spectrum::point_mass(src.message_rate(n), n);
    case SourceModel::Kind::Mixed: {
      std::vector<double> weights;
      std::vector<const std::vector<double>*> pmfs;
      if (flatten_iid_mixture(src, 1.0, weights, pmfs)) {
        std::size_t support = 0;
        for (std::size_t a = 0; a < pmfs.front()->size(); ++a) {
          if (std::any_of(pmfs.begin(), pmfs.end(), [a](const auto* p) { return (*p)[a] > 0.0; })) ++support;
        }
        if (composition_count(static_cast<int>(support), n, limits.types)) {
          return mixed_iid_entropy_spectrum(weights, pmfs, n, limits);
        }
      }
      if (src.block_size(n, limits.enumeration)) {
        return Spectrum(self_information_atoms(src.pmf(n, limits), n), n);
      }
      std::vector<WeightedSpectrum> parts;
      for (std::size_t j = 0; j < src.components().size(); ++j) {
        parts.push_back({src.weights()[j], entropy_spectrum(src.components()[j], n, limits)});
      }
      return mixture_sandwich(parts, n).upper;
    }
    case SourceModel::Kind::Block:
    case SourceModel::Kind::Table:
      return Spectrum(self_information_atoms(src.pmf(n, limits), n), n);
  }
  throw ValidationError("entropy_spectrum: unknown source kind");
}

namespace {

Spectrum dmc_information_spectrum(const Matrix& w, std::span<const double> px, int n, const Limits& limits) {
  if (px.size() != w.rows) throw ValidationError("input alphabet does not match the channel input alphabet");
  std::vector<double> py(w.cols, 0.0);
  for (std::size_t y = 0; y < w.cols; ++y) {
    CompensatedSum s;
    for (std::size_t x = 0; x < w.rows; ++x) s += px[x] * w(x, y);
    py[y] = s.value();
  }
  std::vector<Atom> atoms;
  for (std::size_t x = 0; x < w.rows; ++x) {
    if (px[x] == 0.0) continue;
    for (std::size_t y = 0; y < w.cols; ++y) {
      if (w(x, y) > 0.0) atoms.push_back({information_density(w(x, y), py[y], 1), px[x] * w(x, y)});
    }
  }
  return convolve_iid(Spectrum::normalized(std::move(atoms), 1, 0.0), n, limits);
}

// Mixture of DMCs with an iid input, by joint types over (x, y) cells.
Spectrum mixed_dmc_information_spectrum(const ChannelModel& ch, std::span<const double> px, int n,
                                        const Limits& limits) {
  const auto comps = ch.components();
  const std::size_t kx = ch.input_letters();
  const std::size_t ky = ch.output_letters();
  if (px.size() != kx) throw ValidationError("input alphabet does not match the channel input alphabet");
  struct Cell {
    std::size_t x, y;
  };
  std::vector<Cell> cells;
  for (std::size_t x = 0; x < kx; ++x) {
    if (px[x] == 0.0) continue;
    for (std::size_t y = 0; y < ky; ++y) {
      if (std::any_of(comps.begin(), comps.end(), [&](const ChannelModel& c) { return c.letter_kernel()(x, y) > 0.0; })) {
        cells.push_back({x, y});
      }
    }
  }
  const std::size_t m = comps.size();
  std::vector<std::vector<double>> cell_log(m, std::vector<double>(cells.size()));
  std::vector<std::vector<double>> kernel_log(m, std::vector<double>(cells.size()));
  std::vector<std::vector<double>> out_log(m, std::vector<double>(ky));
  for (std::size_t j = 0; j < m; ++j) {
    const Matrix& w = comps[j].letter_kernel();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double wv = w(cells[c].x, cells[c].y);
      kernel_log[j][c] = wv > 0.0 ? std::log(wv) : -kInf;
      cell_log[j][c] = wv > 0.0 ? std::log(px[cells[c].x] * wv) : -kInf;
    }
    for (std::size_t y = 0; y < ky; ++y) {
      CompensatedSum s;
      for (std::size_t x = 0; x < kx; ++x) s += px[x] * w(x, y);
      out_log[j][y] = s.value() > 0.0 ? std::log(s.value()) : -kInf;
    }
  }
  std::vector<double> log_w(m);
  for (std::size_t j = 0; j < m; ++j) log_w[j] = std::log(ch.weights()[j]);
  const double dn = static_cast<double>(n);
  std::vector<double> num(m);
  std::vector<double> den(m);
  std::vector<int> ny(ky);
  return mixture_type_spectrum(ch.weights(), cell_log, n, limits, [&](std::span<const int> t, std::span<const double>) {
    std::fill(ny.begin(), ny.end(), 0);
    for (std::size_t c = 0; c < cells.size(); ++c) ny[cells[c].y] += t[c];
    for (std::size_t j = 0; j < m; ++j) {
      double a = log_w[j];
      for (std::size_t c = 0; c < cells.size() && a != -kInf; ++c) {
        if (t[c] > 0) a += t[c] * kernel_log[j][c];
      }
      num[j] = a;
      double b = log_w[j];
      for (std::size_t y = 0; y < ky && b != -kInf; ++y) {
        if (ny[y] > 0) b += ny[y] * out_log[j][y];
      }
      den[j] = b;
    }
    return (log_sum_exp(num) - log_sum_exp(den)) / dn;
  });
}

std::vector<double> output_law(const BlockKernel& kernel, std::span<const double> px) {
  std::vector<double> py(kernel.cols(), 0.0);
  for (std::uint64_t x = 0; x < kernel.rows(); ++x) {
    if (px[x] == 0.0) continue;
    for (std::uint64_t y = 0; y < kernel.cols(); ++y) py[y] += px[x] * kernel(x, y);
  }
  return py;
}

}  // namespace

Spectrum information_spectrum(const ChannelModel& ch, const InputModel& input, int n, const Limits& limits) {
  require_blocklength(n);
  if (!input.independent()) throw ValidationError("information_spectrum: input must not depend on the source");
  if (input.kind() == InputModel::Kind::IndependentIid) {
    if (ch.kind() == ChannelModel::Kind::Dmc) {
      return dmc_information_spectrum(ch.letter_kernel(), input.letter_pmf(), n, limits);
    }
    if (ch.product_mixture()) {
      std::size_t cells = 0;
      for (std::size_t x = 0; x < static_cast<std::size_t>(ch.input_letters()); ++x) {
        if (input.letter_pmf().size() != static_cast<std::size_t>(ch.input_letters())) break;
        if (input.letter_pmf()[x] == 0.0) continue;
        for (std::size_t y = 0; y < static_cast<std::size_t>(ch.output_letters()); ++y) {
          const auto comps = ch.components();
          if (std::any_of(comps.begin(), comps.end(),
                          [&](const ChannelModel& c) { return c.letter_kernel()(x, y) > 0.0; })) {
            ++cells;
          }
        }
      }
      if (composition_count(static_cast<int>(cells), n, limits.types)) {
        return mixed_dmc_information_spectrum(ch, input.letter_pmf(), n, limits);
      }
    }
  }
  const auto xs = ch.input_size(n, limits.enumeration);
  const auto ys = ch.output_size(n, limits.enumeration);
  require_budget(xs && ys ? checked_mul(*xs, *ys, limits.enumeration) : std::nullopt, limits.enumeration,
                 "information spectrum enumeration");
  const auto px = input.marginal(n, *xs, limits);
  const BlockKernel kernel = ch.kernel(n, limits);
  const auto py = output_law(kernel, px);
  std::vector<Atom> atoms;
  for (std::uint64_t x = 0; x < *xs; ++x) {
    if (px[x] == 0.0) continue;
    for (std::uint64_t y = 0; y < *ys; ++y) {
      const double w = kernel(x, y);
      if (w > 0.0) atoms.push_back({information_density(w, py[y], n), px[x] * w});
    }
  }
  return Spectrum::normalized(std::move(atoms), n, 0.0);
}

void check_consistent(const SourceModel& src, const InputModel& input, const ChannelModel& ch, int n,
                      const Limits& limits) {
  require_blocklength(n);
  const auto vs = src.block_size(n, kNoLimit);
  const auto xs = ch.input_size(n, kNoLimit);
  const auto ys = ch.output_size(n, kNoLimit);
  if (!vs || !xs || !ys) throw BudgetExceeded("block alphabets overflow 64-bit indices");
  if (input.kind() == InputModel::Kind::IndependentIid &&
      checked_pow(input.letter_pmf().size(), n, kNoLimit) != xs) {
    throw ValidationError("input alphabet does not match the channel input alphabet");
  }
  if (input.is_encoder() && *vs <= limits.enumeration) (void)input.encoder_map(n, *vs, *xs);
}

std::vector<double> output_distribution(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                        int n, const Limits& limits) {
  require_blocklength(n);
  const auto xs = ch.input_size(n, limits.enumeration);
  const auto ys = ch.output_size(n, limits.enumeration);
  require_budget(xs && ys ? checked_mul(*xs, *ys, limits.enumeration) : std::nullopt, limits.enumeration,
                 "output distribution");
  const BlockKernel kernel = ch.kernel(n, limits);
  if (input.independent()) return output_law(kernel, input.marginal(n, *xs, limits));
  const auto pv = src.pmf(n, limits);
  std::vector<double> px(*xs, 0.0);
  if (input.is_encoder()) {
    const auto map = input.encoder_map(n, pv.size(), *xs);
    for (std::size_t v = 0; v < pv.size(); ++v) px[map[v]] += pv[v];
  } else {
    const Matrix cond = input.conditional(n, pv.size(), *xs, limits);
    for (std::size_t v = 0; v < pv.size(); ++v) {
      if (pv[v] == 0.0) continue;
      for (std::size_t x = 0; x < *xs; ++x) px[x] += pv[v] * cond(v, x);
    }
  }
  return output_law(kernel, px);
}

JointSpectrum joint_density_spectrum(const SourceModel& src, const InputModel& input, const ChannelModel& ch, int n,
                                     const Limits& limits) {
  require_blocklength(n);
  if (input.independent()) {
    return JointSpectrum::independent(information_spectrum(ch, input, n, limits), entropy_spectrum(src, n, limits));
  }
  const auto pv = src.pmf(n, limits);
  const auto xs = ch.input_size(n, limits.enumeration);
  const auto ys = ch.output_size(n, limits.enumeration);
  if (!xs || !ys) throw BudgetExceeded("joint spectrum: channel alphabets exceed the enumeration budget");
  const std::uint64_t support = static_cast<std::uint64_t>(std::count_if(pv.begin(), pv.end(), [](double p) { return p > 0.0; }));
  const std::uint64_t per_v = input.is_encoder() ? 1 : *xs;
  auto count = checked_mul(support, per_v, limits.enumeration);
  require_budget(count ? checked_mul(*count, *ys, limits.enumeration) : std::nullopt, limits.enumeration,
                 "joint spectrum enumeration");

  const BlockKernel kernel = ch.kernel(n, limits);
  std::vector<JointAtom> atoms;
  if (input.is_encoder()) {
    const auto map = input.encoder_map(n, pv.size(), *xs);
    std::vector<double> px(*xs, 0.0);
    for (std::size_t v = 0; v < pv.size(); ++v) px[map[v]] += pv[v];
    const auto py = output_law(kernel, px);
    for (std::size_t v = 0; v < pv.size(); ++v) {
      if (pv[v] == 0.0) continue;
      const double b = self_information(pv[v], n);
      for (std::uint64_t y = 0; y < *ys; ++y) {
        const double w = kernel(map[v], y);
        if (w > 0.0) atoms.push_back({information_density(w, py[y], n), b, pv[v] * w});
      }
    }
  } else {
    const Matrix cond = input.conditional(n, pv.size(), *xs, limits);
    std::vector<double> px(*xs, 0.0);
    for (std::size_t v = 0; v < pv.size(); ++v) {
      for (std::size_t x = 0; x < *xs; ++x) px[x] += pv[v] * cond(v, x);
    }
    const auto py = output_law(kernel, px);
    for (std::size_t v = 0; v < pv.size(); ++v) {
      if (pv[v] == 0.0) continue;
      const double b = self_information(pv[v], n);
      for (std::size_t x = 0; x < *xs; ++x) {
        const double pvx = pv[v] * cond(v, x);
        if (pvx == 0.0) continue;
        for (std::uint64_t y = 0; y < *ys; ++y) {
          const double w = kernel(x, y);
          if (w > 0.0) atoms.push_back({information_density(w, py[y], n), b, pvx * w});
        }
      }
    }
  }
  // Masses come from products of validated laws; renormalize roundoff.
  CompensatedSum total;
  for (const auto& a : atoms) total += a.mass;
  for (auto& a : atoms) a.mass /= total.value();
  return JointSpectrum::from_atoms(std::move(atoms), n);
}

}  // namespace islab
