#include "islab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace islab {
namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be positive and finite");
}

double exponential_term(int n, double gamma) { return std::exp(-static_cast<double>(n) * gamma); }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

GammaSchedule GammaSchedule::power(double scale, double exponent) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("power schedule: scale must be positive");
  if (!(exponent > 0.0 && exponent < 1.0)) throw ValidationError("power schedule: exponent must lie in (0, 1)");
  GammaSchedule s;
  s.kind_ = Kind::Power;
  s.scale_ = scale;
  s.exponent_ = exponent;
  return s;
}

GammaSchedule GammaSchedule::constant(double gamma) {
  require_gamma(gamma);
  GammaSchedule s;
  s.kind_ = Kind::Constant;
  s.scale_ = gamma;
  return s;
}

GammaSchedule GammaSchedule::explicit_values(std::vector<double> values) {
  if (values.empty()) throw ValidationError("explicit schedule is empty");
  for (double g : values) require_gamma(g);
  GammaSchedule s;
  s.kind_ = Kind::Explicit;
  s.values_ = std::move(values);
  return s;
}

double GammaSchedule::at(std::size_t index, int n) const {
  if (n < 1) throw ValidationError("blocklength must be positive");
  switch (kind_) {
    case Kind::Power:
      return scale_ * std::pow(static_cast<double>(n), -exponent_);
    case Kind::Constant:
      return scale_;
    case Kind::Explicit:
      if (index >= values_.size()) throw ValidationError("explicit schedule shorter than the grid");
      return values_[index];
  }
  return scale_;
}

std::string GammaSchedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Power:
      os << "power(" << scale_ << "," << exponent_ << ")";
      break;
    case Kind::Constant:
      os << "constant(" << scale_ << ")";
      break;
    case Kind::Explicit:
      os << "explicit(" << values_.size() << " values)";
      break;
  }
  return os.str();
}

GammaValues gamma_values(const GammaSchedule& schedule, std::span<const int> n_grid) {
  if (schedule.kind() == GammaSchedule::Kind::Explicit && schedule.values().size() != n_grid.size()) {
    throw ValidationError("explicit schedule length does not match the grid");
  }
  GammaValues out;
  for (std::size_t i = 0; i < n_grid.size(); ++i) out.values.push_back(schedule.at(i, n_grid[i]));
  out.vanishing = schedule.kind() != GammaSchedule::Kind::Constant;
  if (schedule.kind() == GammaSchedule::Kind::Power) {
    // n * gamma_n = scale * n^(1 - exponent) is increasing; solve, then fix rounding.
    const double guess = std::pow(10.0 / schedule.scale(), 1.0 / (1.0 - schedule.exponent()));
    if (guess < 2e9) {
      int n = std::max(1, static_cast<int>(std::floor(guess)) - 1);
      while (static_cast<double>(n) * schedule.at(0, n) < 10.0) ++n;
      out.bound_active_n = n;
    }
  }
  return out;
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::FeinsteinUpper:
      return "feinstein_upper";
    case BoundKind::VerduHanLower:
      return "verdu_han_lower";
    case BoundKind::SeparationUpper:
      return "separation_upper";
  }
  return "?";
}

BoundReport feinstein_bound(const JointSpectrum& joint, double gamma) {
  require_gamma(gamma);
  BoundReport r;
  r.kind = BoundKind::FeinsteinUpper;
  r.n = joint.n();
  r.gamma = gamma;
  r.spectral_term = joint.prob_a_at_most_b_plus(gamma);
  r.exponential_term = exponential_term(r.n, gamma);
  r.bound_value = r.spectral_term + r.exponential_term;
  r.unclamped_value = r.bound_value;
  r.clamped_value = clamp01(r.bound_value);
  return r;
}

BoundReport verdu_han_bound(const JointSpectrum& joint, double gamma) {
  require_gamma(gamma);
  BoundReport r;
  r.kind = BoundKind::VerduHanLower;
  r.n = joint.n();
  r.gamma = gamma;
  r.spectral_term = joint.prob_a_at_most_b_plus(-gamma);
  r.exponential_term = exponential_term(r.n, gamma);
  r.unclamped_value = r.spectral_term - r.exponential_term;
  r.bound_value = std::max(0.0, r.unclamped_value);
  r.clamped_value = clamp01(r.bound_value);
  return r;
}

BoundReport separation_bound(const Spectrum& entropy, const Spectrum& information, double rate, double gamma) {
  require_gamma(gamma);
  if (entropy.n() != information.n()) throw ValidationError("separation_bound: blocklength mismatch");
  if (!std::isfinite(rate)) throw ValidationError("separation_bound: rate must be finite");
  BoundReport r;
  r.kind = BoundKind::SeparationUpper;
  r.n = entropy.n();
  r.gamma = gamma;
  SeparationTerms t{rate, entropy.ccdf(rate), information.cdf(rate + gamma)};
  r.spectral_term = t.source_term + t.channel_term;
  r.exponential_term = exponential_term(r.n, gamma);
  r.bound_value = t.source_term + t.channel_term + r.exponential_term;
  r.unclamped_value = r.bound_value;
  r.clamped_value = clamp01(r.bound_value);
  r.components = t;
  return r;
}

BoundReport separation_bound(const SourceModel& src, const ChannelModel& ch, const InputModel& input, double rate,
                             double gamma, int n, const Limits& limits) {
  require_gamma(gamma);
  return separation_bound(entropy_spectrum(src, n, limits), information_spectrum(ch, input, n, limits), rate, gamma);
}

}  // namespace islab
