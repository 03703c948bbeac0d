#pragma once

// Exact discrete distributions of normalized information statistics
// (entropy spectra, information-density spectra) and finite-n estimators of
// their limits in probability.
//
// Conventions: all logarithms are natural (nats). An outcome whose
// statistic is +infinity (a zero-probability event under the reference
// law) is kept as explicit mass at a +inf sentinel instead of being dropped.

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "islab/common.hpp"

namespace islab {

struct Atom {
  double value;  // nats per symbol
  double mass;
};

class Spectrum {
 public:
  static constexpr double kMergeTolerance = 1e-12;

  /// Sorts, merges values closer than kMergeTolerance, drops zero masses
  /// and routes +inf values into the sentinel. Throws ValidationError when
  /// the total mass is not 1 within kProbabilityTolerance.
  Spectrum(std::vector<Atom> atoms, int n);

  /// Same, but rescales the finite masses to 1 - pos_inf_mass first. Used
  /// by constructions whose masses come from log-domain arithmetic.
  static Spectrum normalized(std::vector<Atom> atoms, int n, double pos_inf_mass);

  static Spectrum point_mass(double value, int n);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double pos_inf_mass() const { return pos_inf_; }
  int n() const { return n_; }

  double cdf(double t) const;           // Pr{Z <= t}
  double ccdf(double t) const;          // Pr{Z >= t}, +inf included
  double prob_less(double t) const;     // Pr{Z < t}
  double prob_greater(double t) const;  // Pr{Z > t}, +inf included
  double mass_at(double t) const;
  /// Left-continuous inverse of the cdf: inf{t : cdf(t) >= p}.
  double quantile(double p) const;
  double mean() const;

  Spectrum shifted(double delta) const;

  /// inf{a : Pr{Z >= a} <= eps}: the largest atom whose upper tail still
  /// exceeds eps (+inf if the sentinel alone does).
  double upper_threshold(double eps) const;
  /// sup{b : Pr{Z < b} <= eps}: the smallest atom whose lower tail
  /// (inclusive) exceeds eps.
  double lower_threshold(double eps) const;

  void check_invariants() const;

 private:
  Spectrum() = default;
  void finalize(std::vector<Atom> atoms, bool rescale, double pos_inf_seed);

  std::vector<Atom> atoms_;
  std::vector<double> prefix_;  // prefix_[i]: mass of atoms_[0, i)
  std::vector<double> suffix_;  // suffix_[i]: mass of atoms_[i, end)
  double pos_inf_ = 0.0;
  int n_ = 1;
};

/// Exact law of (1/n) * sum of n iid copies of a per-letter statistic.
/// Enumerates type classes over the per-letter atoms.
Spectrum convolve_iid(const Spectrum& per_letter, int n, const Limits& limits = {});

struct WeightedSpectrum {
  double weight;
  Spectrum spectrum;
};

struct SpectrumBracket {
  Spectrum lower;
  Spectrum upper;
};

/// Stochastic bracket for the entropy spectrum of a mixture whose components
/// have the given entropy spectra. `upper` shifts component i by
/// (1/n)ln(1/w_i) (from w_i P_i <= P_mix). `lower` shifts every component
/// down by delta = (1/n)ln(1/tail) and moves `tail` mass from the top of the
/// mixture to 0 (from Pr_i{P_mix >= e^{-nt}, P_i < e^{-n(t+delta)}} <= e^{-n delta}).
SpectrumBracket mixture_sandwich(std::span<const WeightedSpectrum> components, int n,
                                 double tail = 1e-9);

// ---------------------------------------------------------------- joint

struct JointAtom {
  double a;  // information density (nats per symbol)
  double b;  // self-information (nats per symbol)
  double mass;
};

/// a <= b + shift with the sentinel rules: a = +inf never satisfies, b = +inf
/// always does (checked in that order).
inline bool density_at_most(double a, double b, double shift) {
  if (a == std::numeric_limits<double>::infinity()) return false;
  if (b == std::numeric_limits<double>::infinity()) return true;
  return a <= b + shift;
}

/// Joint law of (A_n, B_n). Either an explicit atom list or the product of
/// two independent marginals; the product form is never materialized
/// unless atoms() is called.
class JointSpectrum {
 public:
  static JointSpectrum independent(Spectrum a, Spectrum b);
  static JointSpectrum from_atoms(std::vector<JointAtom> atoms, int n);

  int n() const { return n_; }
  bool is_independent() const { return factored_; }

  /// Pr{A <= B + shift}; shift may be negative.
  double prob_a_at_most_b_plus(double shift) const;

  Spectrum marginal_a() const;
  Spectrum marginal_b() const;
  std::vector<JointAtom> atoms() const;

 private:
  JointSpectrum() = default;

  int n_ = 1;
  bool factored_ = false;
  std::vector<JointAtom> atoms_;
  std::vector<Spectrum> factors_;  // {A, B} when factored_
};

// ---------------------------------------------------------------- limits

enum class LimitMode { PLimsup, PLiminf, OptimisticLimsup, OptimisticLiminf };

std::string to_string(LimitMode mode);

struct LimitEstimate {
  static constexpr double kStabilizationTolerance = 1e-3;

  std::vector<int> n_grid;
  std::vector<double> per_n_threshold;
  double estimate = 0.0;
  LimitMode mode = LimitMode::PLimsup;
  double eps = 1e-3;
  bool converged = false;

  // Finite-n drift model t_n = t + drift / sqrt(n), fitted by least squares
  // over the whole grid. corrected[i] = t_i - drift / sqrt(n_i); the
  // corrected estimate applies the same reduction (last point, or min / max
  // for the optimistic modes) to the corrected thresholds. Heuristic.
  double drift = 0.0;
  std::vector<double> corrected;
  double corrected_estimate = 0.0;
};

/// Per-n tail thresholds of a sequence of spectra and their limit estimate.
/// p-limsup uses upper_threshold(eps), p-liminf lower_threshold(eps); the
/// pessimistic modes report the last grid point, the optimistic modes the
/// min (limsup) or max (liminf) over the grid.
LimitEstimate estimate_plim(std::span<const Spectrum> spectra, LimitMode mode, double eps);

}  // namespace islab
