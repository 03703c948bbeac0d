#include "islab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace islab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_value(double x, double y) {
  if (x == y) return true;
  return std::abs(x - y) <= Spectrum::kMergeTolerance;
}

}  // namespace

Spectrum::Spectrum(std::vector<Atom> atoms, int n) : n_(n) { finalize(std::move(atoms), false, 0.0); }

Spectrum Spectrum::normalized(std::vector<Atom> atoms, int n, double pos_inf_mass) {
  Spectrum s;
  s.n_ = n;
  s.finalize(std::move(atoms), true, pos_inf_mass);
  return s;
}

Spectrum Spectrum::point_mass(double value, int n) { return Spectrum({{value, 1.0}}, n); }

void Spectrum::finalize(std::vector<Atom> atoms, bool rescale, double pos_inf_seed) {
  if (n_ < 1) throw ValidationError("spectrum blocklength must be positive");
  CompensatedSum inf_mass;
  inf_mass += pos_inf_seed;
  std::vector<Atom> finite;
  finite.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw ValidationError("spectrum atom has invalid mass");
    if (a.mass == 0.0) continue;
    if (std::isnan(a.value) || a.value == -kInf) throw ValidationError("spectrum atom has invalid value");
    if (a.value == kInf) {
      inf_mass += a.mass;
    } else {
      finite.push_back(a);
    }
  }
  std::sort(finite.begin(), finite.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });

  atoms_.clear();
  std::size_t i = 0;
  while (i < finite.size()) {
    const double v = finite[i].value;
    CompensatedSum m;
    while (i < finite.size() && same_value(finite[i].value, v)) m += finite[i++].mass;
    atoms_.push_back({v, m.value()});
  }
  pos_inf_ = inf_mass.value();

  if (rescale) {
    CompensatedSum total;
    for (const Atom& a : atoms_) total += a.mass;
    const double target = 1.0 - pos_inf_;
    if (total.value() > 0.0) {
      const double scale = target / total.value();
      for (Atom& a : atoms_) a.mass *= scale;
    }
  }

  prefix_.assign(atoms_.size() + 1, 0.0);
  CompensatedSum run;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    run += atoms_[k].mass;
    prefix_[k + 1] = run.value();
  }
  suffix_.assign(atoms_.size() + 1, 0.0);
  CompensatedSum back;
  for (std::size_t k = atoms_.size(); k-- > 0;) {
    back += atoms_[k].mass;
    suffix_[k] = back.value();
  }
  check_invariants();
}

void Spectrum::check_invariants() const {
  const double total = prefix_.back() + pos_inf_;
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "spectrum mass sums to " << total;
    throw ValidationError(os.str());
  }
  for (std::size_t k = 1; k < atoms_.size(); ++k) {
    if (!(atoms_[k].value - atoms_[k - 1].value > kMergeTolerance)) {
      throw ValidationError("spectrum atoms not strictly increasing");
    }
  }
}

double Spectrum::cdf(double t) const {
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                             [](double x, const Atom& a) { return x < a.value; });
  return prefix_[static_cast<std::size_t>(it - atoms_.begin())];
}

double Spectrum::prob_less(double t) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                             [](const Atom& a, double x) { return a.value < x; });
  return prefix_[static_cast<std::size_t>(it - atoms_.begin())];
}

double Spectrum::ccdf(double t) const {
  if (t == kInf) return pos_inf_;
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                             [](const Atom& a, double x) { return a.value < x; });
  return suffix_[static_cast<std::size_t>(it - atoms_.begin())] + pos_inf_;
}

double Spectrum::prob_greater(double t) const {
  if (t == kInf) return 0.0;
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                             [](double x, const Atom& a) { return x < a.value; });
  return suffix_[static_cast<std::size_t>(it - atoms_.begin())] + pos_inf_;
}

double Spectrum::mass_at(double t) const {
  if (t == kInf) return pos_inf_;
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                             [](const Atom& a, double x) { return a.value < x; });
  if (it != atoms_.end() && it->value == t) return it->mass;
  return 0.0;
}

double Spectrum::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile level outside [0, 1]");
  auto it = std::lower_bound(prefix_.begin() + 1, prefix_.end(), p);
  if (it == prefix_.end()) return kInf;
  return atoms_[static_cast<std::size_t>(it - prefix_.begin()) - 1].value;
}

double Spectrum::mean() const {
  if (pos_inf_ > 0.0) return kInf;
  CompensatedSum s;
  for (const Atom& a : atoms_) s += a.value * a.mass;
  return s.value();
}

Spectrum Spectrum::shifted(double delta) const {
  std::vector<Atom> out(atoms_.begin(), atoms_.end());
  for (Atom& a : out) a.value += delta;
  out.push_back({kInf, pos_inf_});
  return Spectrum(std::move(out), n_);
}

double Spectrum::upper_threshold(double eps) const {
  if (pos_inf_ > eps) return kInf;
  // suffix_ is nonincreasing; find the last index whose tail exceeds eps.
  std::size_t lo = 0;
  std::size_t hi = atoms_.size();  // invariant: tail(lo) > eps
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (suffix_[mid] + pos_inf_ > eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return atoms_[lo].value;
}

double Spectrum::lower_threshold(double eps) const {
  auto it = std::upper_bound(prefix_.begin() + 1, prefix_.end(), eps);
  if (it == prefix_.end()) return kInf;
  return atoms_[static_cast<std::size_t>(it - prefix_.begin()) - 1].value;
}

Spectrum convolve_iid(const Spectrum& per_letter, int n, const Limits& limits) {
  if (n < 1) throw ValidationError("convolve_iid: blocklength must be positive");
  if (per_letter.n() != 1) throw ValidationError("convolve_iid: per-letter spectrum must have n = 1");
  per_letter.check_invariants();

  const double q = per_letter.pos_inf_mass();
  const double pos_inf = q > 0.0 ? -std::expm1(static_cast<double>(n) * std::log1p(-q)) : 0.0;
  const auto atoms = per_letter.atoms();
  if (atoms.empty()) return Spectrum({{kInf, 1.0}}, n);

  const int k = static_cast<int>(atoms.size());
  require_budget(composition_count(k, n, limits.types), limits.types, "convolve_iid type classes");

  std::vector<double> log_mass(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) log_mass[j] = std::log(atoms[j].mass);

  std::vector<Atom> out;
  const double dn = static_cast<double>(n);
  for_each_composition(k, n, [&](std::span<const int> t) {
    double lm = log_multinomial(t);
    double value = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] == 0) continue;
      lm += t[j] * log_mass[j];
      value += (t[j] / dn) * atoms[j].value;
    }
    out.push_back({value, std::exp(lm)});
  });
  return Spectrum::normalized(std::move(out), n, pos_inf);
}

SpectrumBracket mixture_sandwich(std::span<const WeightedSpectrum> components, int n, double tail) {
  if (components.empty()) throw ValidationError("mixture_sandwich: no components");
  if (!(tail > 0.0 && tail < 1.0)) throw ValidationError("mixture_sandwich: tail must lie in (0, 1)");
  CompensatedSum wsum;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw ValidationError("mixture_sandwich: weights must be positive");
    if (c.spectrum.n() != n) throw ValidationError("mixture_sandwich: component blocklength mismatch");
    wsum += c.weight;
  }
  if (std::abs(wsum.value() - 1.0) > kProbabilityTolerance) {
    throw ValidationError("mixture_sandwich: weights do not sum to 1");
  }
  if (components.size() == 1) return {components[0].spectrum, components[0].spectrum};

  const double dn = static_cast<double>(n);
  std::vector<Atom> upper;
  std::vector<Atom> shifted_down;
  double inf_mass = 0.0;
  const double delta = std::log(1.0 / tail) / dn;
  for (const auto& c : components) {
    const double up = std::log(1.0 / c.weight) / dn;
    for (const Atom& a : c.spectrum.atoms()) {
      upper.push_back({a.value + up, c.weight * a.mass});
      shifted_down.push_back({a.value - delta, c.weight * a.mass});
    }
    inf_mass += c.weight * c.spectrum.pos_inf_mass();
  }
  upper.push_back({kInf, inf_mass});

  // Lower: remove `tail` mass from the top (sentinel first), then place it at 0.
  std::sort(shifted_down.begin(), shifted_down.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
  double to_remove = tail;
  const double inf_removed = std::min(inf_mass, to_remove);
  inf_mass -= inf_removed;
  to_remove -= inf_removed;
  for (auto it = shifted_down.rbegin(); it != shifted_down.rend() && to_remove > 0.0; ++it) {
    const double take = std::min(it->mass, to_remove);
    it->mass -= take;
    to_remove -= take;
  }
  shifted_down.push_back({0.0, tail - to_remove});
  shifted_down.push_back({kInf, inf_mass});
  return {Spectrum(std::move(shifted_down), n), Spectrum(std::move(upper), n)};
}

// ---------------------------------------------------------------- joint

JointSpectrum JointSpectrum::independent(Spectrum a, Spectrum b) {
  if (a.n() != b.n()) throw ValidationError("joint spectrum: marginal blocklength mismatch");
  JointSpectrum j;
  j.n_ = a.n();
  j.factored_ = true;
  j.factors_.push_back(std::move(a));
  j.factors_.push_back(std::move(b));
  return j;
}

JointSpectrum JointSpectrum::from_atoms(std::vector<JointAtom> atoms, int n) {
  if (n < 1) throw ValidationError("joint spectrum blocklength must be positive");
  std::vector<JointAtom> kept;
  kept.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw ValidationError("joint atom has invalid mass");
    if (a.mass == 0.0) continue;
    if (std::isnan(a.a) || std::isnan(a.b) || a.a == -kInf || a.b == -kInf) {
      throw ValidationError("joint atom has invalid value");
    }
    kept.push_back(a);
  }
  std::sort(kept.begin(), kept.end(), [](const JointAtom& x, const JointAtom& y) {
    return x.a < y.a || (x.a == y.a && x.b < y.b);
  });
  JointSpectrum j;
  j.n_ = n;
  CompensatedSum total;
  std::size_t i = 0;
  while (i < kept.size()) {
    // Group by a first, then merge equal b inside the group.
    std::size_t end = i;
    while (end < kept.size() && same_value(kept[end].a, kept[i].a)) ++end;
    std::sort(kept.begin() + static_cast<std::ptrdiff_t>(i), kept.begin() + static_cast<std::ptrdiff_t>(end),
              [](const JointAtom& x, const JointAtom& y) { return x.b < y.b; });
    std::size_t k = i;
    while (k < end) {
      const double bv = kept[k].b;
      CompensatedSum m;
      while (k < end && same_value(kept[k].b, bv)) m += kept[k++].mass;
      j.atoms_.push_back({kept[i].a, bv, m.value()});
      total += m.value();
    }
    i = end;
  }
  if (std::abs(total.value() - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "joint spectrum mass sums to " << total.value();
    throw ValidationError(os.str());
  }
  return j;
}

double JointSpectrum::prob_a_at_most_b_plus(double shift) const {
  CompensatedSum p;
  if (factored_) {
    const Spectrum& a = factors_[0];
    const Spectrum& b = factors_[1];
    for (const Atom& bb : b.atoms()) p += bb.mass * a.cdf(bb.value + shift);
    p += b.pos_inf_mass() * (1.0 - a.pos_inf_mass());
    return p.value();
  }
  for (const auto& at : atoms_) {
    if (density_at_most(at.a, at.b, shift)) p += at.mass;
  }
  return p.value();
}

Spectrum JointSpectrum::marginal_a() const {
  if (factored_) return factors_[0];
  std::vector<Atom> m;
  m.reserve(atoms_.size());
  for (const auto& at : atoms_) m.push_back({at.a, at.mass});
  return Spectrum(std::move(m), n_);
}

Spectrum JointSpectrum::marginal_b() const {
  if (factored_) return factors_[1];
  std::vector<Atom> m;
  m.reserve(atoms_.size());
  for (const auto& at : atoms_) m.push_back({at.b, at.mass});
  return Spectrum(std::move(m), n_);
}

std::vector<JointAtom> JointSpectrum::atoms() const {
  if (!factored_) return atoms_;
  std::vector<Atom> a(factors_[0].atoms().begin(), factors_[0].atoms().end());
  std::vector<Atom> b(factors_[1].atoms().begin(), factors_[1].atoms().end());
  if (factors_[0].pos_inf_mass() > 0.0) a.push_back({kInf, factors_[0].pos_inf_mass()});
  if (factors_[1].pos_inf_mass() > 0.0) b.push_back({kInf, factors_[1].pos_inf_mass()});
  std::vector<JointAtom> out;
  out.reserve(a.size() * b.size());
  for (const Atom& x : a) {
    for (const Atom& y : b) out.push_back({x.value, y.value, x.mass * y.mass});
  }
  return out;
}

// ---------------------------------------------------------------- limits

std::string to_string(LimitMode mode) {
  switch (mode) {
    case LimitMode::PLimsup:
      return "p-limsup";
    case LimitMode::PLiminf:
      return "p-liminf";
    case LimitMode::OptimisticLimsup:
      return "optimistic-limsup";
    case LimitMode::OptimisticLiminf:
      return "optimistic-liminf";
  }
  return "?";
}

namespace {

double reduce(std::span<const double> xs, LimitMode mode) {
  switch (mode) {
    case LimitMode::PLimsup:
    case LimitMode::PLiminf:
      return xs.back();
    case LimitMode::OptimisticLimsup:
      return *std::min_element(xs.begin(), xs.end());
    case LimitMode::OptimisticLiminf:
      return *std::max_element(xs.begin(), xs.end());
  }
  return xs.back();
}

}  // namespace

LimitEstimate estimate_plim(std::span<const Spectrum> spectra, LimitMode mode, double eps) {
  if (spectra.size() < 3) throw ValidationError("estimate_plim: need at least 3 blocklengths");
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("estimate_plim: eps must lie in (0, 0.5)");
  LimitEstimate est;
  est.mode = mode;
  est.eps = eps;
  const bool upper = mode == LimitMode::PLimsup || mode == LimitMode::OptimisticLimsup;
  for (const Spectrum& s : spectra) {
    if (!est.n_grid.empty() && s.n() <= est.n_grid.back()) {
      throw ValidationError("estimate_plim: blocklengths must be strictly increasing");
    }
    est.n_grid.push_back(s.n());
    est.per_n_threshold.push_back(upper ? s.upper_threshold(eps) : s.lower_threshold(eps));
  }
  const auto& t = est.per_n_threshold;
  est.estimate = reduce(t, mode);

  const std::size_t m = t.size();
  const double lo = std::min({t[m - 1], t[m - 2], t[m - 3]});
  const double hi = std::max({t[m - 1], t[m - 2], t[m - 3]});
  est.converged = (lo == hi) || (hi - lo <= LimitEstimate::kStabilizationTolerance);

  const bool finite = std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
  est.corrected = t;
  if (finite) {
    std::vector<double> x(m);
    double xbar = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = 1.0 / std::sqrt(static_cast<double>(est.n_grid[i]));
      xbar += x[i];
    }
    xbar /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sxy += (x[i] - xbar) * (t[i] - t[m - 1]);
      sxx += (x[i] - xbar) * (x[i] - xbar);
    }
    est.drift = sxx > 0.0 ? sxy / sxx : 0.0;
    for (std::size_t i = 0; i < m; ++i) est.corrected[i] = t[i] - est.drift * x[i];
  }
  est.corrected_estimate = reduce(est.corrected, mode);
  return est;
}

}  // namespace islab
