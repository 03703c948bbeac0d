#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "islab/spectrum.hpp"
#include "support/oracle.hpp"

namespace testing {

/// Empty string when the spectrum matches the reference law atom by atom.
inline std::string law_mismatch(const islab::Spectrum& s, const oracle::Law& law, double mass_tol,
                                double value_tol = 1e-9) {
  std::ostringstream why;
  if (s.size() != law.atoms.size()) {
    why << "atom count " << s.size() << " vs " << law.atoms.size();
    return why.str();
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& a = s.atoms()[i];
    const auto& [v, m] = law.atoms[i];
    if (std::abs(a.value - v) > value_tol || std::abs(a.mass - m) > mass_tol) {
      why.precision(17);
      why << "atom " << i << ": (" << a.value << ", " << a.mass << ") vs (" << v << ", " << m << ")";
      return why.str();
    }
  }
  if (std::abs(s.pos_inf_mass() - law.inf_mass) > mass_tol) return "sentinel mass differs";
  return {};
}

/// X is stochastically at least Y: Pr{X <= t} <= Pr{Y <= t} at every atom of
/// either law.
inline bool dominates(const islab::Spectrum& x, const islab::Spectrum& y, double slack = 1e-12) {
  for (const auto* s : {&x, &y}) {
    for (const auto& a : s->atoms()) {
      if (x.cdf(a.value) > y.cdf(a.value) + slack) return false;
    }
  }
  return true;
}

}  // namespace testing
