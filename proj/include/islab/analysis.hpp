#pragma once

// Finite-n evaluation of transmissibility conditions, rate and capacity
// functionals, and converse-property diagnostics over blocklength grids.
//
// Every condition is a limit statement; on a finite grid the verdict is one
// of satisfied-on-grid, violated or inconclusive and never a claim about
// n -> infinity.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "islab/bounds.hpp"
#include "islab/coding.hpp"
#include "islab/models.hpp"
#include "islab/spectrum.hpp"

namespace islab {

enum class Condition { Direct, Converse, StrictDomination, Domination, ProductDomination, EpsDirect, EpsConverse };
enum class Verdict { SatisfiedOnGrid, Violated, Inconclusive };

std::string to_string(Condition c);
std::string to_string(Verdict v);

/// Rate threshold sequence c_n (or d_n).
class ThresholdSchedule {
 public:
  enum class Kind { Constant, Explicit, Alternating };

  static ThresholdSchedule constant(double c);
  static ThresholdSchedule explicit_values(std::vector<double> values);
  /// `low` when floor(log2 n) is even, `high` otherwise.
  static ThresholdSchedule alternating(double low, double high);

  Kind kind() const { return kind_; }
  double at(std::size_t index, int n) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Constant;
  double low_ = 0.0;
  double high_ = 0.0;
  std::vector<double> values_;
};

struct VerdictPolicy {
  /// Satisfied: final term < level + tolerance and the last half of the grid
  /// is nonincreasing. Violated: every term in the last half is >= level +
  /// tolerance.
  double tolerance = 0.05;
  /// Direct and sum-form checks are forced to inconclusive when at least
  /// this much mass sits within gamma of the decision boundary at the final n.
  double boundary_mass = 0.5;
};

struct ConditionTerm {
  int n = 0;
  double gamma = 0.0;
  std::optional<double> threshold;     // c_n or d_n
  std::optional<double> term_source;   // Pr{B >= c_n}
  std::optional<double> term_channel;  // Pr{A <= c_n +- gamma_n}
  double value = 0.0;                  // the probability the verdict is based on
  double boundary_mass = 0.0;
  /// Product form with a reference sum-form schedule: kappa*mu <= alpha + beta.
  std::optional<bool> implication_holds;
};

struct ConditionTrace {
  Condition condition = Condition::Direct;
  std::vector<int> n_grid;
  std::vector<ConditionTerm> per_n_terms;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<double> eps;
  bool boundary_flag = false;
  std::vector<std::string> notes;
};

Verdict classify_terms(std::span<const double> values, double level, const VerdictPolicy& policy);

/// Pr{A_n <= B_n + gamma_n} per n.
ConditionTrace check_direct(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                            const GammaSchedule& gamma, std::span<const int> n_grid, const Limits& limits = {},
                            const VerdictPolicy& policy = {});

/// Pr{A_n <= B_n - gamma_n} per n for an encoder-induced input.
ConditionTrace check_converse(const SourceModel& src, const InputModel& encoder, const ChannelModel& ch,
                              const GammaSchedule& gamma, std::span<const int> n_grid, const Limits& limits = {},
                              const VerdictPolicy& policy = {});

/// Pr{B_n >= c_n} + Pr{A_n <= c_n + gamma_n}.
ConditionTrace check_strict_domination(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                       const ThresholdSchedule& rate, const GammaSchedule& gamma,
                                       std::span<const int> n_grid, const Limits& limits = {},
                                       const VerdictPolicy& policy = {});

/// Pr{B_n >= c_n} + Pr{A_n <= c_n - gamma_n}.
ConditionTrace check_domination(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                const ThresholdSchedule& rate, const GammaSchedule& gamma,
                                std::span<const int> n_grid, const Limits& limits = {},
                                const VerdictPolicy& policy = {});

/// Pr{B_n >= d_n} * Pr{A_n <= d_n - gamma_n}. With `reference`, each term also
/// records whether it is at most the domination sum at c_n.
ConditionTrace check_product_domination(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                                        const ThresholdSchedule& rate, const GammaSchedule& gamma,
                                        std::span<const int> n_grid,
                                        const std::optional<ThresholdSchedule>& reference = std::nullopt,
                                        const Limits& limits = {}, const VerdictPolicy& policy = {});

/// Direct (or converse) terms judged against level eps instead of 0.
ConditionTrace check_eps(const SourceModel& src, const InputModel& input, const ChannelModel& ch,
                         const GammaSchedule& gamma, std::span<const int> n_grid, double eps, bool converse,
                         const Limits& limits = {}, const VerdictPolicy& policy = {});

// ---------------------------------------------------------------- rates

enum class RateQuantity { Rf, UnderlineRf, CLower, OverlineCLower, HBar, HUnderline, IUnderline, IOverline };

std::string to_string(RateQuantity q);

struct RateReport {
  RateQuantity quantity = RateQuantity::Rf;
  LimitEstimate estimate;
  /// Drift-corrected estimate; the raw one is estimate.estimate.
  double value = 0.0;
  std::vector<std::string> inputs_searched;
  std::string input;  // candidate the value was attained at (channel quantities)
};

struct CandidateInput {
  std::string label;
  InputModel input;
};

/// H_bar, H_underline, R_f (= H_bar) and the optimistic R_f (the smallest
/// upper tail threshold over the grid).
std::vector<RateReport> rate_functionals(const SourceModel& src, std::span<const int> n_grid, double eps = 1e-3,
                                         const Limits& limits = {});

/// Per candidate I_underline and I_overline, then C_lower (max of
/// I_underline) and the optimistic capacity (max over candidates of the
/// largest lower tail threshold over the grid). The supremum over all inputs
/// is approximated by the candidates.
std::vector<RateReport> rate_functionals(const ChannelModel& ch, std::span<const CandidateInput> candidates,
                                         std::span<const int> n_grid, double eps = 1e-3, const Limits& limits = {});

const RateReport& find_rate(std::span<const RateReport> reports, RateQuantity q);

struct StabilityTrace {
  double delta = 0.0;
  std::vector<double> per_n;  // Pr{|Z / E Z - 1| > delta}
};

struct ConverseDiagnostics {
  std::vector<int> n_grid;
  double tolerance = 0.02;
  double strong_gap = 0.0;
  bool strong_converse = false;
  /// Pessimistic vs optimistic estimate agreement; heuristic.
  double semi_strong_gap = 0.0;
  bool semi_strong = false;
  std::vector<StabilityTrace> stability;
  bool information_stable = false;
};

ConverseDiagnostics converse_property_diagnostics(const SourceModel& src, std::span<const int> n_grid,
                                                  double eps = 1e-3, const Limits& limits = {});
ConverseDiagnostics converse_property_diagnostics(const ChannelModel& ch, const InputModel& input,
                                                  std::span<const int> n_grid, double eps = 1e-3,
                                                  const Limits& limits = {});

struct WitnessPoint {
  int n = 0;
  double rate = 0.0;
  double gamma = 0.0;
  double error = 0.0;
  double bound = 0.0;
};

struct SeparationOptions {
  double eps = 1e-3;
  double tolerance = 0.02;
  GammaSchedule gamma = GammaSchedule::power(1.0, 0.5);
  /// Blocklengths for the two-step witness code; empty picks the enumerable
  /// ones among {4, 6, 8, 10}.
  std::vector<int> witness_grid;
  std::uint64_t seed = 1;
};

struct SeparationVerdict {
  double rf = 0.0;
  double underline_rf = 0.0;
  double c_lower = 0.0;
  double overline_c_lower = 0.0;
  std::string best_input;
  bool sufficient = false;  // R_f < C_lower
  std::vector<WitnessPoint> witness;
  bool witness_decreasing = false;
  double underline_margin = 0.0;  // underline R_f - C_lower
  double overline_margin = 0.0;   // R_f - overline C_lower
  bool necessary_violated = false;
  std::vector<RateReport> rates;
};

SeparationVerdict separation_verdict(const SourceModel& src, const ChannelModel& ch,
                                     std::span<const CandidateInput> candidates, std::span<const int> n_grid,
                                     const SeparationOptions& options = {}, const Limits& limits = {});

}  // namespace islab
