#pragma once

// Achievability and converse bounds for joint source-channel coding and the
// vanishing slack sequences they are evaluated with.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "islab/models.hpp"
#include "islab/spectrum.hpp"

namespace islab {

class GammaSchedule {
 public:
  enum class Kind { Power, Constant, Explicit };

  /// gamma_n = scale * n^(-exponent); requires scale > 0, 0 < exponent < 1.
  static GammaSchedule power(double scale, double exponent);
  static GammaSchedule constant(double gamma);
  /// One value per grid point, in grid order.
  static GammaSchedule explicit_values(std::vector<double> values);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double exponent() const { return exponent_; }
  std::span<const double> values() const { return values_; }
  /// gamma at grid position `index` with blocklength n.
  double at(std::size_t index, int n) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Power;
  double scale_ = 1.0;
  double exponent_ = 0.5;
  std::vector<double> values_;
};

struct GammaValues {
  std::vector<double> values;
  /// False for constant schedules, which do not tend to zero.
  bool vanishing = true;
  /// Power schedules: first integer n with n * gamma_n >= 10.
  std::optional<int> bound_active_n;
};

GammaValues gamma_values(const GammaSchedule& schedule, std::span<const int> n_grid);

enum class BoundKind { FeinsteinUpper, VerduHanLower, SeparationUpper };

std::string to_string(BoundKind kind);

struct SeparationTerms {
  double rate;          // c
  double source_term;   // Pr{B_n >= c}
  double channel_term;  // Pr{A_n <= c + gamma}
};

struct BoundReport {
  BoundKind kind = BoundKind::FeinsteinUpper;
  int n = 1;
  double gamma = 0.0;
  double spectral_term = 0.0;
  double exponential_term = 0.0;  // e^{-n gamma}
  double bound_value = 0.0;
  double unclamped_value = 0.0;
  double clamped_value = 0.0;  // bound_value restricted to [0, 1]
  std::optional<SeparationTerms> components;
};

/// Pr{A <= B + gamma} + e^{-n gamma}: upper bound on the ensemble-average
/// error of the threshold-decoder random code.
BoundReport feinstein_bound(const JointSpectrum& joint, double gamma);

/// max(0, Pr{A <= B - gamma} - e^{-n gamma}): lower bound on the error of any
/// code whose encoder induces this joint law.
BoundReport verdu_han_bound(const JointSpectrum& joint, double gamma);

/// Pr{B >= c} + Pr{A <= c + gamma} + e^{-n gamma} for fixed-rate source
/// coding at rate c followed by channel coding.
BoundReport separation_bound(const Spectrum& entropy, const Spectrum& information, double rate, double gamma);
BoundReport separation_bound(const SourceModel& src, const ChannelModel& ch, const InputModel& input, double rate,
                             double gamma, int n, const Limits& limits = {});

}  // namespace islab
