#include "islab/commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "islab/analysis.hpp"
#include "islab/bounds.hpp"
#include "islab/coding.hpp"

namespace islab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

class Csv {
 public:
  Csv(const Scenario& sc, const std::string& command, std::vector<std::string> header) : width_(header.size()) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, sc.hash);
    out_ << "# islab " << command << " scenario=" << sc.name << " hash=" << hash << '\n';
    row(header);
  }

  Csv& operator<<(const std::string& cell) {
    cells_.push_back(cell);
    return *this;
  }
  Csv& operator<<(const char* cell) { return *this << std::string(cell); }
  Csv& operator<<(double x) { return *this << format_number(x); }
  Csv& operator<<(int x) { return *this << std::to_string(x); }
  Csv& operator<<(std::uint64_t x) { return *this << std::to_string(x); }
  Csv& operator<<(bool b) { return *this << std::string(b ? "true" : "false"); }
  Csv& operator<<(const std::optional<double>& x) { return *this << (x ? format_number(*x) : std::string()); }

  void end_row() {
    if (cells_.size() != width_) throw std::logic_error("csv row width mismatch");
    row(cells_);
    cells_.clear();
  }

  std::string save(const std::string& dir, const std::string& file) const {
    const auto path = (std::filesystem::path(dir) / file).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << out_.str();
    if (!f) throw std::runtime_error("cannot write " + path);
    return path;
  }

 private:
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        out_ << '"';
        for (char c : cells[i]) out_ << (c == '"' ? std::string("\"\"") : std::string(1, c));
        out_ << '"';
      } else {
        out_ << cells[i];
      }
    }
    out_ << '\n';
  }

  std::size_t width_;
  std::ostringstream out_;
  std::vector<std::string> cells_;
};

std::string save_text(const std::string& dir, const std::string& file, const std::string& text) {
  const auto path = (std::filesystem::path(dir) / file).string();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  return path;
}

// gamma_n for a blocklength that may or may not lie on the scenario grid.
double gamma_for(const Scenario& sc, int n) {
  const auto it = std::find(sc.n_grid.begin(), sc.n_grid.end(), n);
  if (sc.gamma.kind() == GammaSchedule::Kind::Explicit) {
    if (it == sc.n_grid.end()) {
      throw ValidationError("explicit gamma schedule has no value for n = " + std::to_string(n));
    }
    return sc.gamma.at(static_cast<std::size_t>(it - sc.n_grid.begin()), n);
  }
  return sc.gamma.at(0, n);
}

std::size_t grid_index(const Scenario& sc, int n) {
  const auto it = std::find(sc.n_grid.begin(), sc.n_grid.end(), n);
  return it == sc.n_grid.end() ? 0 : static_cast<std::size_t>(it - sc.n_grid.begin());
}

const InputModel& channel_input(const Scenario& sc) {
  if (sc.input.independent()) return sc.input;
  if (!sc.candidates.empty()) return sc.candidates.front().input;
  throw ValidationError("this command needs an input independent of the source (input or candidate_inputs)");
}

// c_n as given, or the midpoint of the R_f and C_lower estimates.
ThresholdSchedule rate_schedule(const Scenario& sc) {
  if (sc.rate) return *sc.rate;
  if (sc.n_grid.size() < 3 || sc.candidates.empty()) {
    throw ValidationError("scenario needs a \"rate\" schedule (automatic rates need 3 blocklengths and an input)");
  }
  const auto src = rate_functionals(sc.source, sc.n_grid, sc.tail_eps, sc.limits);
  const auto ch = rate_functionals(sc.channel, sc.candidates, sc.n_grid, sc.tail_eps, sc.limits);
  return ThresholdSchedule::constant(0.5 * (find_rate(src, RateQuantity::Rf).value +
                                            find_rate(ch, RateQuantity::CLower).value));
}

Spectrum information_marginal(const Scenario& sc, int n) {
  if (sc.input.independent()) return information_spectrum(sc.channel, sc.input, n, sc.limits);
  return joint_density_spectrum(sc.source, sc.input, sc.channel, n, sc.limits).marginal_a();
}

void spectrum_rows(Csv& csv, const std::string& statistic, const Spectrum& s) {
  for (const auto& atom : s.atoms()) {
    csv << statistic << s.n() << atom.value << atom.mass;
    csv.end_row();
  }
  if (s.pos_inf_mass() > 0.0) {
    csv << statistic << s.n() << std::numeric_limits<double>::infinity() << s.pos_inf_mass();
    csv.end_row();
  }
}

std::vector<std::string> cmd_spectrum(const Scenario& sc, const CommandOptions& o) {
  Csv csv(sc, "spectrum", {"statistic", "n", "value", "mass"});
  for (int n : sc.n_grid) {
    spectrum_rows(csv, "entropy", entropy_spectrum(sc.source, n, sc.limits));
    spectrum_rows(csv, "information", information_marginal(sc, n));
  }
  return {csv.save(o.out_dir, "spectrum.csv")};
}

void bound_row(Csv& csv, const BoundReport& r) {
  csv << r.n << r.gamma << to_string(r.kind) << r.spectral_term << r.exponential_term << r.bound_value
      << r.clamped_value;
  if (r.components) {
    csv << r.components->rate << r.components->source_term << r.components->channel_term;
  } else {
    csv << "" << "" << "";
  }
  csv.end_row();
}

std::vector<std::string> cmd_bounds(const Scenario& sc, const CommandOptions& o) {
  Csv csv(sc, "bounds",
          {"n", "gamma", "kind", "spectral_term", "exponential_term", "bound_value", "clamped_value", "rate",
           "source_term", "channel_term"});
  std::optional<ThresholdSchedule> rate;
  if (sc.input.independent() && (sc.rate || sc.n_grid.size() >= 3)) rate = rate_schedule(sc);
  for (std::size_t i = 0; i < sc.n_grid.size(); ++i) {
    const int n = sc.n_grid[i];
    const auto joint = joint_density_spectrum(sc.source, sc.input, sc.channel, n, sc.limits);
    std::vector<double> gammas = sc.gamma_grid;
    if (gammas.empty()) gammas.push_back(sc.gamma.at(i, n));
    std::optional<Spectrum> entropy;
    std::optional<Spectrum> info;
    if (rate) {
      entropy = joint.marginal_b();
      info = joint.marginal_a();
    }
    for (double g : gammas) {
      bound_row(csv, feinstein_bound(joint, g));
      bound_row(csv, verdu_han_bound(joint, g));
      if (rate) bound_row(csv, separation_bound(*entropy, *info, rate->at(i, n), g));
    }
  }
  return {csv.save(o.out_dir, "bounds.csv")};
}

std::vector<std::string> cmd_code(const Scenario& sc, const CommandOptions& o) {
  std::vector<int> ns = sc.code_n;
  if (ns.empty()) ns.push_back(sc.n_grid.front());
  Csv csv(sc, "code",
          {"kind", "n", "sample", "rate", "gamma", "messages", "average_error", "max_error", "ensemble_error",
           "channel_error", "bound_kind", "bound_value"});
  std::vector<std::string> files;
  const bool two_step = sc.code_kind == "two_step" || sc.code_kind == "both";
  const bool threshold = sc.code_kind == "threshold" || sc.code_kind == "both";
  std::optional<ThresholdSchedule> rate;
  if (two_step) rate = rate_schedule(sc);
  for (int n : ns) {
    const double g = gamma_for(sc, n);
    if (two_step) {
      const double c = rate->at(grid_index(sc, n), n);
      const auto r = two_step_code(sc.source, sc.channel, channel_input(sc), c, g, n, sc.limits, sc.seed);
      csv << "two_step" << n << "" << c << g << r.messages << r.error.average_error << r.error.max_error << ""
          << r.channel_error << to_string(r.separation.kind) << r.separation.bound_value;
      csv.end_row();
      std::ostringstream table;
      write_code(table, r.code);
      files.push_back(save_text(o.out_dir, "code_two_step_n" + std::to_string(n) + ".txt", table.str()));
    }
    if (threshold) {
      const double ensemble = ensemble_average_error(sc.source, sc.input, sc.channel, g, n, sc.limits);
      const auto joint = joint_density_spectrum(sc.source, sc.input, sc.channel, n, sc.limits);
      const auto bound = feinstein_bound(joint, g);
      for (int s = 0; s < sc.samples; ++s) {
        std::mt19937_64 rng(sc.seed + static_cast<std::uint64_t>(s));
        const auto book = sample_codebook(sc.source, sc.input, sc.channel, n, rng, sc.limits);
        const auto code = threshold_decoder(book, sc.source, sc.channel, sc.input, g, n, sc.limits);
        const auto err = exact_error(code, sc.source, sc.channel, sc.limits);
        csv << "threshold" << n << s << "" << g << "" << err.average_error << err.max_error << ensemble << ""
            << to_string(bound.kind) << bound.bound_value;
        csv.end_row();
        if (s == 0) {
          std::ostringstream table;
          write_code(table, code);
          files.push_back(save_text(o.out_dir, "code_threshold_n" + std::to_string(n) + ".txt", table.str()));
        }
      }
    }
  }
  files.insert(files.begin(), csv.save(o.out_dir, "code.csv"));
  return files;
}

std::vector<std::string> cmd_oracle(const Scenario& sc, const CommandOptions& o) {
  std::vector<int> ns = sc.oracle_n;
  if (ns.empty()) ns.push_back(sc.n_grid.front());
  Csv csv(sc, "oracle", {"n", "optimal_error", "max_error", "gamma", "verdu_han_bound"});
  std::vector<std::string> files;
  for (int n : ns) {
    const auto best = brute_force_optimal_error(sc.source, sc.channel, n, sc.limits);
    const auto err = exact_error(best.code, sc.source, sc.channel, sc.limits);
    const double g = gamma_for(sc, n);
    const auto vh = verdu_han_bound(induced_joint(best.code, sc.source, sc.channel, sc.limits), g);
    csv << n << best.error << err.max_error << g << vh.bound_value;
    csv.end_row();
    std::ostringstream table;
    write_code(table, best.code);
    files.push_back(save_text(o.out_dir, "oracle_n" + std::to_string(n) + ".txt", table.str()));
  }
  files.insert(files.begin(), csv.save(o.out_dir, "oracle.csv"));
  return files;
}

ConditionTrace run_check(const Scenario& sc, const std::string& name) {
  const auto& grid = sc.n_grid;
  if (name == "direct") return check_direct(sc.source, sc.input, sc.channel, sc.gamma, grid, sc.limits);
  if (name == "converse") return check_converse(sc.source, sc.input, sc.channel, sc.gamma, grid, sc.limits);
  if (name == "eps_direct") {
    return check_eps(sc.source, sc.input, sc.channel, sc.gamma, grid, sc.eps_level, false, sc.limits);
  }
  if (name == "eps_converse") {
    return check_eps(sc.source, sc.input, sc.channel, sc.gamma, grid, sc.eps_level, true, sc.limits);
  }
  const auto rate = rate_schedule(sc);
  if (name == "strict_domination") {
    return check_strict_domination(sc.source, sc.input, sc.channel, rate, sc.gamma, grid, sc.limits);
  }
  if (name == "domination") return check_domination(sc.source, sc.input, sc.channel, rate, sc.gamma, grid, sc.limits);
  if (name == "product_domination") {
    if (sc.product_rate) {
      return check_product_domination(sc.source, sc.input, sc.channel, *sc.product_rate, sc.gamma, grid, rate,
                                      sc.limits);
    }
    return check_product_domination(sc.source, sc.input, sc.channel, rate, sc.gamma, grid, std::nullopt, sc.limits);
  }
  throw ValidationError("unknown condition " + name);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> cmd_check(const Scenario& sc, const CommandOptions& o) {
  std::vector<std::string> files;
  Csv summary(sc, "check", {"condition", "verdict", "eps", "boundary_flag", "final_value", "notes"});
  for (const auto& name : sc.checks) {
    const auto trace = run_check(sc, name);
    Csv csv(sc, "check", {"n", "gamma_n", "term_source", "term_channel", "sum", "verdict"});
    for (const auto& t : trace.per_n_terms) {
      csv << t.n << t.gamma << t.term_source << t.term_channel << t.value << to_string(trace.verdict);
      csv.end_row();
    }
    files.push_back(csv.save(o.out_dir, "check_" + name + ".csv"));
    summary << to_string(trace.condition) << to_string(trace.verdict) << trace.eps << trace.boundary_flag
            << trace.per_n_terms.back().value << join(trace.notes, "; ");
    summary.end_row();
  }
  files.insert(files.begin(), summary.save(o.out_dir, "checks.csv"));
  return files;
}

void diagnostics_rows(Csv& csv, const std::string& target, const ConverseDiagnostics& d) {
  auto row = [&](const std::string& property, const std::string& value) {
    csv << target << property << value;
    csv.end_row();
  };
  row("strong_gap", format_number(d.strong_gap));
  row("strong_converse", d.strong_converse ? "true" : "false");
  row("semi_strong_gap", format_number(d.semi_strong_gap));
  row("semi_strong", d.semi_strong ? "true" : "false");
  for (const auto& s : d.stability) {
    for (std::size_t i = 0; i < s.per_n.size(); ++i) {
      row("instability_delta_" + format_number(s.delta) + "_n_" + std::to_string(d.n_grid[i]),
          format_number(s.per_n[i]));
    }
  }
  row("information_stable", d.information_stable ? "true" : "false");
}

std::vector<std::string> cmd_rates(const Scenario& sc, const CommandOptions& o) {
  if (sc.n_grid.size() < 3) throw ValidationError("rates need at least 3 blocklengths in n_grid");
  auto reports = rate_functionals(sc.source, sc.n_grid, sc.tail_eps, sc.limits);
  if (!sc.candidates.empty()) {
    const auto ch = rate_functionals(sc.channel, sc.candidates, sc.n_grid, sc.tail_eps, sc.limits);
    reports.insert(reports.end(), ch.begin(), ch.end());
  }

  Csv rates(sc, "rates", {"quantity", "input", "mode", "eps", "estimate", "corrected", "drift", "converged"});
  Csv thresholds(sc, "rates", {"quantity", "input", "n", "threshold", "corrected"});
  for (const auto& r : reports) {
    rates << to_string(r.quantity) << r.input << to_string(r.estimate.mode) << r.estimate.eps << r.estimate.estimate
          << r.value << r.estimate.drift << r.estimate.converged;
    rates.end_row();
    for (std::size_t i = 0; i < r.estimate.n_grid.size(); ++i) {
      thresholds << to_string(r.quantity) << r.input << r.estimate.n_grid[i] << r.estimate.per_n_threshold[i]
                 << r.estimate.corrected[i];
      thresholds.end_row();
    }
  }

  Csv diag(sc, "rates", {"target", "property", "value"});
  diagnostics_rows(diag, "source", converse_property_diagnostics(sc.source, sc.n_grid, sc.tail_eps, sc.limits));
  for (const auto& c : sc.candidates) {
    diagnostics_rows(diag, "channel:" + c.label,
                     converse_property_diagnostics(sc.channel, c.input, sc.n_grid, sc.tail_eps, sc.limits));
  }

  std::vector<std::string> files = {rates.save(o.out_dir, "rates.csv"),
                                    thresholds.save(o.out_dir, "rate_thresholds.csv"),
                                    diag.save(o.out_dir, "diagnostics.csv")};

  if (!sc.candidates.empty()) {
    SeparationOptions opts;
    opts.eps = sc.tail_eps;
    opts.gamma = sc.gamma.kind() == GammaSchedule::Kind::Explicit ? GammaSchedule::power(1.0, 0.5) : sc.gamma;
    opts.seed = sc.seed;
    const auto v = separation_verdict(sc.source, sc.channel, sc.candidates, sc.n_grid, opts, sc.limits);
    Csv sep(sc, "rates", {"quantity", "value"});
    auto row = [&](const std::string& q, const std::string& value) {
      sep << q << value;
      sep.end_row();
    };
    row("rf", format_number(v.rf));
    row("underline_rf", format_number(v.underline_rf));
    row("c_lower", format_number(v.c_lower));
    row("overline_c_lower", format_number(v.overline_c_lower));
    row("best_input", v.best_input);
    row("sufficient", v.sufficient ? "true" : "false");
    row("underline_margin", format_number(v.underline_margin));
    row("overline_margin", format_number(v.overline_margin));
    row("necessary_violated", v.necessary_violated ? "true" : "false");
    row("witness_decreasing", v.witness_decreasing ? "true" : "false");
    files.push_back(sep.save(o.out_dir, "separation.csv"));

    Csv witness(sc, "rates", {"n", "rate", "gamma", "error", "bound"});
    for (const auto& w : v.witness) {
      witness << w.n << w.rate << w.gamma << w.error << w.bound;
      witness.end_row();
    }
    files.push_back(witness.save(o.out_dir, "witness.csv"));
  }
  return files;
}

std::vector<std::string> cmd_report(const Scenario& sc, const CommandOptions& o) {
  Csv index(sc, "report", {"command", "status", "file"});
  std::vector<std::string> files;
  auto record = [&](const std::string& command, const std::vector<std::string>& written) {
    for (const auto& f : written) {
      index << command << "ok" << std::filesystem::path(f).filename().string();
      index.end_row();
      files.push_back(f);
    }
  };
  auto skip = [&](const std::string& command, const std::string& why) {
    index << command << "skipped: " + why << "";
    index.end_row();
  };
  record("spectrum", cmd_spectrum(sc, o));
  record("bounds", cmd_bounds(sc, o));
  if (!sc.code_n.empty()) {
    record("code", cmd_code(sc, o));
  } else {
    skip("code", "scenario has no code entry");
  }
  if (!sc.oracle_n.empty()) {
    record("oracle", cmd_oracle(sc, o));
  } else {
    skip("oracle", "scenario has no oracle entry");
  }
  record("check", cmd_check(sc, o));
  if (sc.n_grid.size() >= 3) {
    record("rates", cmd_rates(sc, o));
  } else {
    skip("rates", "fewer than 3 blocklengths");
  }
  files.insert(files.begin(), index.save(o.out_dir, "report.csv"));
  return files;
}

}  // namespace

void apply_overrides(Scenario& sc, const CommandOptions& options) {
  if (options.n) {
    if (*options.n <= 0) throw ValidationError("--n must be positive");
    sc.n_grid = {*options.n};
    if (!sc.code_n.empty()) sc.code_n = {*options.n};
    if (!sc.oracle_n.empty()) sc.oracle_n = {*options.n};
    if (sc.gamma.kind() == GammaSchedule::Kind::Explicit) {
      throw ValidationError("--n cannot be combined with an explicit gamma schedule; pass --gamma as well");
    }
  }
  if (options.gamma) {
    sc.gamma = GammaSchedule::constant(*options.gamma);
    sc.gamma_grid = {*options.gamma};
  }
  if (options.eps) {
    if (!(*options.eps >= 0.0 && *options.eps < 1.0)) throw ValidationError("--eps must lie in [0, 1)");
    sc.eps_level = *options.eps;
  }
  if (options.budget) {
    if (*options.budget == 0) throw ValidationError("--budget must be positive");
    sc.limits.enumeration = *options.budget;
  }
  if (options.seed) sc.seed = *options.seed;
}

std::vector<std::string> run_command(const std::string& command, const Scenario& sc, const CommandOptions& options) {
  std::filesystem::create_directories(options.out_dir);
  if (command == "spectrum") return cmd_spectrum(sc, options);
  if (command == "bounds") return cmd_bounds(sc, options);
  if (command == "code") return cmd_code(sc, options);
  if (command == "oracle") return cmd_oracle(sc, options);
  if (command == "check") return cmd_check(sc, options);
  if (command == "rates") return cmd_rates(sc, options);
  if (command == "report") return cmd_report(sc, options);
  throw ValidationError("unknown command " + command);
}

}  // namespace islab
