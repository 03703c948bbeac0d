#include "islab/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace islab {
namespace {

constexpr double kMonotoneSlack = 1e-12;

void require_grid(std::span<const int> n_grid) {
  if (n_grid.empty()) throw ValidationError("n grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ValidationError("n grid entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ValidationError("n grid must be strictly increasing");
  }
}

bool nonincreasing(std::span<const double> xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1] + kMonotoneSlack) return false;
  }
  return true;
}

// Pr{|Z - center| <= radius}
double mass_near(const Spectrum& s, double center, double radius) {
  return s.cdf(center + radius) - s.prob_less(center - radius);
}

void finish(ConditionTrace& trace, double level, const VerdictPolicy& policy, bool boundary_rule) {
  std::vector<double> values;
  for (const auto& t : trace.per_n_terms) values.push_back(t.value);
  trace.verdict = classify_terms(values, level, policy);
  if (boundary_rule && !trace.per_n_terms.empty() && trace.per_n_terms.back().boundary_mass >= policy.boundary_mass) {
    trace.verdict = Verdict::Inconclusive;
    trace.boundary_flag = true;
    std::ostringstream os;
    os.precision(6);
    os << "boundary: " << trace.per_n_terms.back().boundary_mass
       << " of the mass lies within gamma of the decision boundary at the final n";
    trace.notes.push_back(os.str());
  }
}

ConditionTrace density_trace(Condition condition, const SourceModel& src, const InputModel& input,
                             const ChannelModel& ch, const GammaSchedule& gamma, std::span<const int> n_grid,
                             bool converse, const Limits& limits) {
  require_grid(n_grid);
  const auto gammas = gamma_values(gamma, n_grid);
  ConditionTrace trace;
  trace.condition = condition;
  trace.n_grid.assign(n_grid.begin(), n_grid.end());
  if (!gammas.vanishing) trace.notes.push_back("constant gamma schedule does not vanish");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const JointSpectrum joint = joint_density_spectrum(src, input, ch, n_grid[i], limits);
    const double g = gammas.values[i];
    ConditionTerm t;
    t.n = n_grid[i];
    t.gamma = g;
    const double upper = joint.prob_a_at_most_b_plus(g);
    const double lower = joint.prob_a_at_most_b_plus(-g);
    t.value = converse ? lower : upper;
    t.boundary_mass = std::max(0.0, upper - lower);
    trace.per_n_terms.push_back(t);
  }
  return trace;
}

ConditionTrace sum_trace(Condition condition, const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                         const ThresholdSchedule& rate, const GammaSchedule& gamma, std::span<const int> n_grid,
                         double sign, const Limits& limits) {
  require_grid(n_grid);
  const auto gammas = gamma_values(gamma, n_grid);
  ConditionTrace trace;
  trace.condition = condition;
  trace.n_grid.assign(n_grid.begin(), n_grid.end());
  if (!gammas.vanishing) trace.notes.push_back("constant gamma schedule does not vanish");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const JointSpectrum joint = joint_density_spectrum(src, input, ch, n_grid[i], limits);
    const Spectrum a = joint.marginal_a();
    const Spectrum b = joint.marginal_b();
    const double c = rate.at(i, n_grid[i]);
    const double g = gammas.values[i];
    ConditionTerm t;
    t.n = n_grid[i];
    t.gamma = g;
    t.threshold = c;
    t.term_source = b.ccdf(c);
    t.term_channel = a.cdf(c + sign * g);
    t.value = *t.term_source + *t.term_channel;
    t.boundary_mass = std::max(mass_near(a, c, g), mass_near(b, c, g));
    trace.per_n_terms.push_back(t);
  }
  return trace;
}

}  // namespace

std::string to_string(Condition c) {
  switch (c) {
    case Condition::Direct:
      return "direct";
    case Condition::Converse:
      return "converse";
    case Condition::StrictDomination:
      return "strict_domination";
    case Condition::Domination:
      return "domination";
    case Condition::ProductDomination:
      return "product_domination";
    case Condition::EpsDirect:
      return "eps_direct";
    case Condition::EpsConverse:
      return "eps_converse";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::SatisfiedOnGrid:
      return "satisfied-on-grid";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

ThresholdSchedule ThresholdSchedule::constant(double c) {
  if (!std::isfinite(c)) throw ValidationError("threshold must be finite");
  ThresholdSchedule s;
  s.kind_ = Kind::Constant;
  s.low_ = s.high_ = c;
  return s;
}

ThresholdSchedule ThresholdSchedule::explicit_values(std::vector<double> values) {
  if (values.empty()) throw ValidationError("explicit threshold schedule is empty");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("threshold must be finite");
  }
  ThresholdSchedule s;
  s.kind_ = Kind::Explicit;
  s.values_ = std::move(values);
  return s;
}

ThresholdSchedule ThresholdSchedule::alternating(double low, double high) {
  if (!std::isfinite(low) || !std::isfinite(high)) throw ValidationError("threshold must be finite");
  ThresholdSchedule s;
  s.kind_ = Kind::Alternating;
  s.low_ = low;
  s.high_ = high;
  return s;
}

double ThresholdSchedule::at(std::size_t index, int n) const {
  switch (kind_) {
    case Kind::Constant:
      return low_;
    case Kind::Explicit:
      if (index >= values_.size()) throw ValidationError("explicit threshold schedule shorter than the grid");
      return values_[index];
    case Kind::Alternating:
      return (std::bit_width(static_cast<unsigned>(n)) - 1) % 2 == 0 ? low_ : high_;
  }
  return low_;
}

std::string ThresholdSchedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Constant:
      os << "constant(" << low_ << ")";
      break;
    case Kind::Explicit:
      os << "explicit(" << values_.size() << " values)";
      break;
    case Kind::Alternating:
      os << "alternating(" << low_ << "," << high_ << ")";
      break;
  }
  return os.str();
}

Verdict classify_terms(std::span<const double> values, double level, const VerdictPolicy& policy) {
  if (values.empty()) return Verdict::Inconclusive;
  const std::size_t start = values.size() / 2;
  const auto tail = values.subspan(start);
  const double bar = level + policy.tolerance;
  if (values.back() < bar && nonincreasing(tail)) return Verdict::SatisfiedOnGrid;
  if (*std::min_element(tail.begin(), tail.end()) >= bar) return Verdict::Violated;
  return Verdict::Inconclusive;
}

ConditionTrace check_direct(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                            const GammaSchedule& gamma, std::span<const int> n_grid, const Limits& limits,
                            const VerdictPolicy& policy) {
  auto trace = density_trace(Condition::Direct, src, input, ch, gamma, n_grid, false, limits);
  finish(trace, 0.0, policy, true);
  return trace;
}

ConditionTrace check_converse(const SourceModel& src, const InputModel& encoder, const ChannelModel& ch,
                              const GammaSchedule& gamma, std::span<const int> n_grid, const Limits& limits,
                              const VerdictPolicy& policy) {
  if (!encoder.is_encoder()) throw ValidationError("check_converse: input must be induced by an encoder");
  auto trace = density_trace(Condition::Converse, src, encoder, ch, gamma, n_grid, true, limits);
  finish(trace, 0.0, policy, false);
  return trace;
}

ConditionTrace check_strict_domination(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                       const ThresholdSchedule& rate, const GammaSchedule& gamma,
                                       std::span<const int> n_grid, const Limits& limits,
                                       const VerdictPolicy& policy) {
  auto trace = sum_trace(Condition::StrictDomination, src, input, ch, rate, gamma, n_grid, 1.0, limits);
  finish(trace, 0.0, policy, true);
  return trace;
}

ConditionTrace check_domination(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                const ThresholdSchedule& rate, const GammaSchedule& gamma,
                                std::span<const int> n_grid, const Limits& limits, const VerdictPolicy& policy) {
  auto trace = sum_trace(Condition::Domination, src, input, ch, rate, gamma, n_grid, -1.0, limits);
  finish(trace, 0.0, policy, true);
  return trace;
}

ConditionTrace check_product_domination(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                        const ThresholdSchedule& rate, const GammaSchedule& gamma,
                                        std::span<const int> n_grid, const std::optional<ThresholdSchedule>& reference,
                                        const Limits& limits, const VerdictPolicy& policy) {
  require_grid(n_grid);
  const auto gammas = gamma_values(gamma, n_grid);
  ConditionTrace trace;
  trace.condition = Condition::ProductDomination;
  trace.n_grid.assign(n_grid.begin(), n_grid.end());
  if (!gammas.vanishing) trace.notes.push_back("constant gamma schedule does not vanish");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const JointSpectrum joint = joint_density_spectrum(src, input, ch, n_grid[i], limits);
    const Spectrum a = joint.marginal_a();
    const Spectrum b = joint.marginal_b();
    const double d = rate.at(i, n_grid[i]);
    const double g = gammas.values[i];
    ConditionTerm t;
    t.n = n_grid[i];
    t.gamma = g;
    t.threshold = d;
    t.term_source = b.ccdf(d);
    t.term_channel = a.cdf(d - g);
    t.value = *t.term_source * *t.term_channel;
    t.boundary_mass = std::max(mass_near(a, d, g), mass_near(b, d, g));
    if (reference) {
      const double c = reference->at(i, n_grid[i]);
      t.implication_holds = t.value <= b.ccdf(c) + a.cdf(c - g) + kMonotoneSlack;
    }
    trace.per_n_terms.push_back(t);
  }
  finish(trace, 0.0, policy, false);
  return trace;
}

ConditionTrace check_eps(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                         const GammaSchedule& gamma, std::span<const int> n_grid, double eps, bool converse,
                         const Limits& limits, const VerdictPolicy& policy) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("eps must lie in [0, 1)");
  if (converse && !input.is_encoder()) throw ValidationError("check_eps: converse side needs an encoder input");
  auto trace = density_trace(converse ? Condition::EpsConverse : Condition::EpsDirect, src, input, ch, gamma, n_grid,
                             converse, limits);
  trace.eps = eps;
  finish(trace, eps, policy, !converse);
  return trace;
}

// ---------------------------------------------------------------- rates

std::string to_string(RateQuantity q) {
  switch (q) {
    case RateQuantity::Rf:
      return "Rf";
    case RateQuantity::UnderlineRf:
      return "underline_Rf";
    case RateQuantity::CLower:
      return "C_lower";
    case RateQuantity::OverlineCLower:
      return "overline_C_lower";
    case RateQuantity::HBar:
      return "H_bar";
    case RateQuantity::HUnderline:
      return "H_underline";
    case RateQuantity::IUnderline:
      return "I_underline";
    case RateQuantity::IOverline:
      return "I_overline";
  }
  return "?";
}

namespace {

std::vector<Spectrum> source_spectra(const SourceModel& src, std::span<const int> n_grid, const Limits& limits) {
  std::vector<Spectrum> out;
  for (int n : n_grid) out.push_back(entropy_spectrum(src, n, limits));
  return out;
}

std::vector<Spectrum> channel_spectra(const ChannelModel& ch, const InputModel& input, std::span<const int> n_grid,
                                      const Limits& limits) {
  std::vector<Spectrum> out;
  for (int n : n_grid) out.push_back(information_spectrum(ch, input, n, limits));
  return out;
}

RateReport make_report(RateQuantity q, LimitEstimate est) {
  RateReport r;
  r.quantity = q;
  r.value = est.corrected_estimate;
  r.estimate = std::move(est);
  return r;
}

std::vector<double> stability_terms(std::span<const Spectrum> spectra, double delta) {
  std::vector<double> out;
  for (const Spectrum& s : spectra) {
    const double mean = s.mean();
    if (!std::isfinite(mean)) {
      out.push_back(1.0);
    } else if (mean == 0.0) {
      out.push_back(s.prob_less(0.0) + s.prob_greater(0.0));
    } else {
      const double lo = mean * (1.0 - delta);
      const double hi = mean * (1.0 + delta);
      out.push_back(s.prob_less(std::min(lo, hi)) + s.prob_greater(std::max(lo, hi)));
    }
  }
  return out;
}

void fill_stability(ConverseDiagnostics& d, std::span<const Spectrum> spectra) {
  for (double delta : {0.1, 0.05}) d.stability.push_back({delta, stability_terms(spectra, delta)});
  const auto& main = d.stability.front().per_n;
  d.information_stable = nonincreasing(main) && main.back() < 0.05;
}

}  // namespace

std::vector<RateReport> rate_functionals(const SourceModel& src, std::span<const int> n_grid, double eps,
                                         const Limits& limits) {
  require_grid(n_grid);
  const auto spectra = source_spectra(src, n_grid, limits);
  std::vector<RateReport> out;
  out.push_back(make_report(RateQuantity::HBar, estimate_plim(spectra, LimitMode::PLimsup, eps)));
  out.push_back(make_report(RateQuantity::HUnderline, estimate_plim(spectra, LimitMode::PLiminf, eps)));
  out.push_back(make_report(RateQuantity::Rf, estimate_plim(spectra, LimitMode::PLimsup, eps)));
  out.push_back(make_report(RateQuantity::UnderlineRf, estimate_plim(spectra, LimitMode::OptimisticLimsup, eps)));
  return out;
}

std::vector<RateReport> rate_functionals(const ChannelModel& ch, std::span<const CandidateInput> candidates,
                                         std::span<const int> n_grid, double eps, const Limits& limits) {
  require_grid(n_grid);
  if (candidates.empty()) throw ValidationError("rate_functionals: no candidate inputs");
  std::vector<std::string> labels;
  for (const auto& c : candidates) labels.push_back(c.label);
  std::vector<RateReport> out;
  std::optional<RateReport> best_lower;
  std::optional<RateReport> best_optimistic;
  for (const auto& cand : candidates) {
    const auto spectra = channel_spectra(ch, cand.input, n_grid, limits);
    auto lower = make_report(RateQuantity::IUnderline, estimate_plim(spectra, LimitMode::PLiminf, eps));
    auto upper = make_report(RateQuantity::IOverline, estimate_plim(spectra, LimitMode::PLimsup, eps));
    auto optimistic = make_report(RateQuantity::OverlineCLower, estimate_plim(spectra, LimitMode::OptimisticLiminf, eps));
    lower.input = upper.input = optimistic.input = cand.label;
    if (!best_lower || lower.value > best_lower->value) best_lower = lower;
    if (!best_optimistic || optimistic.value > best_optimistic->value) best_optimistic = optimistic;
    out.push_back(std::move(lower));
    out.push_back(std::move(upper));
  }
  best_lower->quantity = RateQuantity::CLower;
  out.push_back(*best_lower);
  out.push_back(*best_optimistic);
  for (auto& r : out) r.inputs_searched = labels;
  return out;
}

const RateReport& find_rate(std::span<const RateReport> reports, RateQuantity q) {
  for (const auto& r : reports) {
    if (r.quantity == q) return r;
  }
  throw ValidationError("rate report missing: " + to_string(q));
}

ConverseDiagnostics converse_property_diagnostics(const SourceModel& src, std::span<const int> n_grid, double eps,
                                                  const Limits& limits) {
  require_grid(n_grid);
  const auto spectra = source_spectra(src, n_grid, limits);
  const auto upper = estimate_plim(spectra, LimitMode::PLimsup, eps);
  const auto lower = estimate_plim(spectra, LimitMode::PLiminf, eps);
  const auto optimistic = estimate_plim(spectra, LimitMode::OptimisticLimsup, eps);
  ConverseDiagnostics d;
  d.n_grid.assign(n_grid.begin(), n_grid.end());
  d.strong_gap = upper.corrected_estimate - lower.corrected_estimate;
  d.strong_converse = std::abs(d.strong_gap) < d.tolerance;
  d.semi_strong_gap = std::abs(upper.corrected_estimate - optimistic.corrected_estimate);
  d.semi_strong = d.semi_strong_gap < d.tolerance;
  fill_stability(d, spectra);
  return d;
}

ConverseDiagnostics converse_property_diagnostics(const ChannelModel& ch, const InputModel& input,
                                                  std::span<const int> n_grid, double eps, const Limits& limits) {
  require_grid(n_grid);
  const auto spectra = channel_spectra(ch, input, n_grid, limits);
  const auto upper = estimate_plim(spectra, LimitMode::PLimsup, eps);
  const auto lower = estimate_plim(spectra, LimitMode::PLiminf, eps);
  const auto optimistic = estimate_plim(spectra, LimitMode::OptimisticLiminf, eps);
  ConverseDiagnostics d;
  d.n_grid.assign(n_grid.begin(), n_grid.end());
  d.strong_gap = upper.corrected_estimate - lower.corrected_estimate;
  d.strong_converse = std::abs(d.strong_gap) < d.tolerance;
  d.semi_strong_gap = std::abs(lower.corrected_estimate - optimistic.corrected_estimate);
  d.semi_strong = d.semi_strong_gap < d.tolerance;
  fill_stability(d, spectra);
  return d;
}

SeparationVerdict separation_verdict(const SourceModel& src, const ChannelModel& ch,
                                     std::span<const CandidateInput> candidates, std::span<const int> n_grid,
                                     const SeparationOptions& options, const Limits& limits) {
  SeparationVerdict v;
  v.rates = rate_functionals(src, n_grid, options.eps, limits);
  const auto channel = rate_functionals(ch, candidates, n_grid, options.eps, limits);
  v.rates.insert(v.rates.end(), channel.begin(), channel.end());
  v.rf = find_rate(v.rates, RateQuantity::Rf).value;
  v.underline_rf = find_rate(v.rates, RateQuantity::UnderlineRf).value;
  const auto& c_lower = find_rate(v.rates, RateQuantity::CLower);
  v.c_lower = c_lower.value;
  v.overline_c_lower = find_rate(v.rates, RateQuantity::OverlineCLower).value;
  v.best_input = c_lower.input;
  v.sufficient = v.rf < v.c_lower;
  v.underline_margin = v.underline_rf - v.c_lower;
  v.overline_margin = v.rf - v.overline_c_lower;
  v.necessary_violated = v.underline_margin > options.tolerance || v.overline_margin > options.tolerance;

  if (v.sufficient) {
    const auto it = std::find_if(candidates.begin(), candidates.end(),
                                 [&](const CandidateInput& c) { return c.label == v.best_input; });
    std::vector<int> grid = options.witness_grid;
    if (grid.empty()) {
      for (int n : {4, 6, 8, 10}) {
        const auto xs = ch.input_size(n, limits.enumeration);
        const auto ys = ch.output_size(n, limits.enumeration);
        if (src.block_size(n, limits.enumeration) && xs && ys && checked_mul(*xs, *ys, limits.enumeration)) {
          grid.push_back(n);
        }
      }
    }
    const double rate = 0.5 * (v.rf + v.c_lower);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double g = options.gamma.at(i, grid[i]);
      const auto two_step = two_step_code(src, ch, it->input, rate, g, grid[i], limits, options.seed);
      v.witness.push_back({grid[i], rate, g, two_step.error.average_error, two_step.separation.bound_value});
    }
    std::vector<double> errors;
    for (const auto& w : v.witness) errors.push_back(w.error);
    v.witness_decreasing = !errors.empty() && nonincreasing(errors);
  }
  return v;
}

}  // namespace islab
