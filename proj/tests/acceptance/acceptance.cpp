// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: islab_acceptance <islab-cli> <scenarios-dir> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "islab/analysis.hpp"
#include "islab/commands.hpp"
#include "support/compare.hpp"
#include "support/oracle.hpp"

using namespace islab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<double> kGammaGrid{0.05, 0.1, 0.3, 0.5, 1.0};

Matrix rows(const oracle::Kernel& k) { return Matrix::from_rows(k); }

oracle::Kernel binary_channel(double a, double b) { return {{1 - a, a}, {b, 1 - b}}; }

// ---------------------------------------------------------------- instances

struct FeinsteinInstance {
  std::string label;
  SourceModel src;
  InputModel input;
  ChannelModel ch;
  int n;
};

std::vector<FeinsteinInstance> feinstein_instances() {
  const std::vector<oracle::Pmf> sources{{0.5, 0.5}, {0.8, 0.2}, {0.5, 0.3, 0.2}, {0.7, 0.2, 0.1}};
  const std::vector<std::pair<std::string, oracle::Kernel>> channels{
      {"noiseless", binary_channel(0.0, 0.0)}, {"bsc0.1", binary_channel(0.1, 0.1)}, {"bsc0.3", binary_channel(0.3, 0.3)}};
  std::vector<FeinsteinInstance> out;
  for (const auto& pv : sources) {
    const bool ternary = pv.size() == 3;
    const oracle::Kernel cond = ternary ? oracle::Kernel{{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}}
                                        : oracle::Kernel{{0.9, 0.1}, {0.25, 0.75}};
    const std::vector<std::pair<std::string, InputModel>> inputs{
        {"iid(0.6,0.4)", InputModel::iid({0.6, 0.4})}, {"conditional", InputModel::conditional_letter(rows(cond))}};
    for (const auto& [cname, w] : channels) {
      for (const auto& [iname, input] : inputs) {
        for (int n = 1; n <= 6; ++n) {
          out.push_back({fmt("src=%zu-ary(%.2g) ch=%s in=%s n=%d", pv.size(), pv[0], cname.c_str(), iname.c_str(), n),
                         SourceModel::iid(pv), input, ChannelModel::dmc(rows(w)), n});
        }
      }
    }
  }
  return out;
}

struct ConverseInstance {
  std::string label;
  SourceModel src;
  ChannelModel ch;
  int n;
};

// Block sources with at most three supported symbols over products of one
// binary channel.
std::vector<ConverseInstance> converse_instances() {
  const std::vector<oracle::Pmf> sources{{1.0},          {0.5, 0.5},        {0.9, 0.1},         {1.0 / 3, 1.0 / 3, 1.0 / 3},
                                         {0.6, 0.3, 0.1}, {0.45, 0.45, 0.1}, {0.8, 0.15, 0.05}};
  const std::vector<double> flips{0.0, 0.1, 0.25, 0.5};
  std::vector<ConverseInstance> out;
  for (const auto& pv : sources) {
    for (double a : flips) {
      for (double b : flips) {
        for (int n = 1; n <= 3; ++n) {
          out.push_back({fmt("|V|=%zu p0=%.3g W=(%.2g,%.2g) n=%d", pv.size(), pv[0], a, b, n), SourceModel::block(pv),
                         ChannelModel::dmc(rows(binary_channel(a, b))), n});
        }
      }
    }
  }
  return out;
}

const Limits kWide{100'000'000, 100'000'000, 50'000'000};

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
  Outcome o;
  for (double alpha : {0.5, 0.2, 0.05, 0.01}) {
    const auto inst = avg_max_gap_instance(alpha);
    const auto r = exact_error(inst.code, inst.source, inst.channel);
    const bool ok = std::abs(r.average_error - alpha) <= 1e-12 && r.max_error == 1.0;
    o.pass = o.pass && ok;
    o.detail += fmt("a=%g avg=%.17g max=%.17g; ", alpha, r.average_error, r.max_error);
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  int count = 0;
  int violations = 0;
  double worst = -1.0;
  std::string first_bad;
  for (const auto& inst : feinstein_instances()) {
    const auto joint = joint_density_spectrum(inst.src, inst.input, inst.ch, inst.n, kWide);
    for (double g : kGammaGrid) {
      const double err = ensemble_average_error(inst.src, inst.input, inst.ch, g, inst.n, kWide);
      const auto bound = feinstein_bound(joint, g);
      ++count;
      worst = std::max(worst, err - bound.bound_value);
      if (err > bound.bound_value + 1e-12) {
        ++violations;
        if (first_bad.empty()) first_bad = inst.label + fmt(" g=%g", g);
      }
    }
  }
  o.pass = violations == 0 && count >= 300;
  o.detail = fmt("%d instances, %d violations, max(error-bound)=%.3g", count, violations, worst);
  if (!first_bad.empty()) o.detail += "; first: " + first_bad;
  return o;
}

Outcome criterion3() {
  Outcome o;
  int count = 0;
  int violations = 0;
  double tightest = 2.0;
  std::string first_bad;
  for (const auto& inst : converse_instances()) {
    const auto best = brute_force_optimal_error(inst.src, inst.ch, inst.n, kWide);
    const auto joint = induced_joint(best.code, inst.src, inst.ch, kWide);
    for (double g : kGammaGrid) {
      const auto bound = verdu_han_bound(joint, g);
      ++count;
      tightest = std::min(tightest, best.error - bound.bound_value);
      if (best.error < bound.bound_value - 1e-12) {
        ++violations;
        if (first_bad.empty()) first_bad = inst.label + fmt(" g=%g", g);
      }
    }
  }
  o.pass = violations == 0;
  o.detail = fmt("%d instances, %d violations, min(error-bound)=%.3g", count, violations, tightest);
  if (!first_bad.empty()) o.detail += "; first: " + first_bad;
  return o;
}

Spectrum from_law(const oracle::Law& law) {
  std::vector<Atom> atoms;
  for (const auto& [v, m] : law.atoms) atoms.push_back({v, m});
  return Spectrum(std::move(atoms), 1);
}

Outcome criterion4() {
  Outcome o;
  int cases = 0;
  auto run = [&](const std::string& label, const oracle::Law& letter, std::size_t alphabet,
                 const std::function<oracle::Law(int)>& reference) {
    const auto per_letter = from_law(letter);
    for (int n = 1; oracle::power(alphabet, n) <= 1'000'000; ++n) {
      const auto why = testing::law_mismatch(convolve_iid(per_letter, n, kWide), reference(n), 1e-10);
      ++cases;
      if (!why.empty()) {
        if (o.pass) o.detail += label + fmt(" n=%d: ", n) + why + "; ";
        o.pass = false;
      }
    }
  };
  const std::vector<oracle::Pmf> sources{{0.5, 0.5}, {0.89, 0.11}, {0.6, 0.4}, {0.5, 0.3, 0.2}, {0.7, 0.2, 0.1, 0.0},
                                         {0.4, 0.3, 0.2, 0.1}};
  for (const auto& pv : sources) {
    run(fmt("entropy |A|=%zu p0=%g", pv.size(), pv[0]), oracle::entropy_law(pv, 1), pv.size(),
        [&](int n) { return oracle::entropy_law(pv, n); });
  }
  const std::vector<std::pair<oracle::Pmf, oracle::Kernel>> channels{
      {{0.5, 0.5}, binary_channel(0.05, 0.05)},
      {{0.7, 0.3}, binary_channel(0.1, 0.3)},
      {{0.5, 0.5}, binary_channel(0.0, 0.0)},
      {{0.4, 0.6}, {{0.8, 0.1, 0.1}, {0.1, 0.1, 0.8}}}};
  for (const auto& [px, w] : channels) {
    const std::size_t pairs = w.size() * w.front().size();
    run(fmt("information |X|=%zu |Y|=%zu", w.size(), w.front().size()), oracle::information_law(px, w, 1), pairs,
        [&](int n) {
          return oracle::information_law(oracle::product_pmf(px, n), oracle::product_kernel(w, n), n);
        });
  }
  o.detail = fmt("%d (source|channel, n) cases", cases) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion5() {
  Outcome o;
  const std::vector<int> grid{500, 1000, 2000};
  const auto mix = SourceModel::mixed({0.5, 0.5}, {SourceModel::iid({0.89, 0.11}), SourceModel::iid({0.6, 0.4})});
  const auto rates = rate_functionals(mix, grid);
  const auto& rf = find_rate(rates, RateQuantity::Rf);
  const auto& lower = find_rate(rates, RateQuantity::HUnderline);
  const auto& optimistic = find_rate(rates, RateQuantity::UnderlineRf);
  const auto diag = converse_property_diagnostics(mix, grid);
  const bool rf_ok = std::abs(rf.value - 0.67301) <= 0.02;
  const bool lower_ok = std::abs(lower.value - 0.34651) <= 0.02;
  o.pass = rf_ok && lower_ok && diag.strong_gap >= 0.30 && !diag.strong_converse && diag.semi_strong;
  o.detail = fmt("R_f=%.5f (raw %.5f), lower-rate=%.5f (raw %.5f), optimistic R_f=%.5f, strong gap=%.4f, "
                 "semi-strong=%s",
                 rf.value, rf.estimate.estimate, lower.value, lower.estimate.estimate, optimistic.value, diag.strong_gap,
                 diag.semi_strong ? "pass" : "fail");
  return o;
}

bool nonincreasing(const ConditionTrace& t) {
  for (std::size_t i = 1; i < t.per_n_terms.size(); ++i) {
    if (t.per_n_terms[i].value > t.per_n_terms[i - 1].value) return false;
  }
  return true;
}

std::string values(const ConditionTrace& t) {
  std::string s;
  for (const auto& term : t.per_n_terms) s += fmt("%.4g ", term.value);
  return s;
}

Outcome criterion6() {
  Outcome o;
  const std::vector<int> grid{50, 100, 200, 400};
  const double rate = 0.4205685;
  const auto gamma = GammaSchedule::power(1.0, 0.75);
  const auto src = SourceModel::iid({0.89, 0.11});
  const auto ch = ChannelModel::bsc(0.05);
  const auto in = InputModel::uniform(2);
  const auto strict = check_strict_domination(src, in, ch, ThresholdSchedule::constant(rate), gamma, grid);
  const auto direct = check_direct(src, in, ch, gamma, grid);
  const bool strict_ok = nonincreasing(strict) && strict.per_n_terms.back().value < 0.05;
  const bool direct_ok = nonincreasing(direct) && direct.per_n_terms.back().value < 0.05;

  const int n = 12;
  Limits limits;
  limits.enumeration = 50'000'000;
  const auto code = two_step_code(src, ch, in, rate, gamma.at(0, n), n, limits);
  const bool code_ok = code.error.average_error <= code.separation.bound_value;
  o.pass = strict_ok && direct_ok && code_ok;
  o.detail = "strict sums " + values(strict) + "| direct " + values(direct) +
             fmt("| n=12: M=%llu error=%.5f separation bound=%.5f", static_cast<unsigned long long>(code.messages),
                 code.error.average_error, code.separation.bound_value);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const std::vector<int> grid{50, 100, 200, 400};
  const auto src = SourceModel::iid({0.6, 0.4});
  const auto ch = ChannelModel::bsc(0.05);
  const auto direct = check_direct(src, InputModel::uniform(2), ch, GammaSchedule::power(1.0, 0.5), grid);
  const std::vector<CandidateInput> cands{{"uniform", InputModel::uniform(2)}};
  const auto verdict = separation_verdict(src, ch, cands, grid);
  const double last = direct.per_n_terms.back().value;
  o.pass = last > 0.9 && verdict.necessary_violated && verdict.overline_margin >= 0.15;
  o.detail = fmt("direct final=%.6f, R_f=%.5f, optimistic C=%.5f, margin=%.5f", last, verdict.rf,
                 verdict.overline_c_lower, verdict.overline_margin);
  return o;
}

Outcome criterion8() {
  Outcome o;
  // MAP minimality on every 2x2x2 instance of the grid.
  int map_cases = 0;
  double map_gap = 0.0;
  const std::vector<double> probs{0.0, 0.1, 0.25, 0.5, 0.7, 0.9, 1.0};
  for (double p : probs) {
    const oracle::Pmf pv{p, 1 - p};
    const auto src = SourceModel::block(pv);
    for (double a : probs) {
      for (double b : probs) {
        const auto w = binary_channel(a, b);
        const auto ch = ChannelModel::dmc(rows(w));
        for (std::size_t e = 0; e < 4; ++e) {
          const std::vector<std::uint64_t> enc{e >> 1, e & 1};
          const auto code = map_decoder(enc, src, ch, 1);
          const double got = exact_error(code, src, ch).average_error;
          const double ref = oracle::best_decoder_error(pv, w, {enc[0], enc[1]});
          map_gap = std::max(map_gap, std::abs(got - ref));
          ++map_cases;
        }
        const double opt = brute_force_optimal_error(src, ch, 1).error;
        map_gap = std::max(map_gap, std::abs(opt - oracle::optimal_error(pv, w)));
        ++map_cases;
      }
    }
  }
  const bool map_ok = map_gap <= 1e-12;

  // Spectral terms against gamma over both inequality suites.
  std::vector<double> fine = kGammaGrid;
  for (int i = 1; i <= 40; ++i) fine.push_back(0.025 * i);
  std::sort(fine.begin(), fine.end());
  fine.erase(std::unique(fine.begin(), fine.end()), fine.end());
  int mono_cases = 0;
  int mono_bad = 0;
  auto sweep = [&](const JointSpectrum& joint) {
    double prev_f = -1.0;
    double prev_v = 2.0;
    for (double g : fine) {
      const double f = feinstein_bound(joint, g).spectral_term;
      const double v = verdu_han_bound(joint, g).spectral_term;
      if (f < prev_f || v > prev_v) ++mono_bad;
      prev_f = f;
      prev_v = v;
    }
    ++mono_cases;
  };
  for (const auto& inst : feinstein_instances()) sweep(joint_density_spectrum(inst.src, inst.input, inst.ch, inst.n, kWide));
  for (const auto& inst : converse_instances()) {
    const auto best = brute_force_optimal_error(inst.src, inst.ch, inst.n, kWide);
    sweep(induced_joint(best.code, inst.src, inst.ch, kWide));
  }
  o.pass = map_ok && mono_bad == 0;
  o.detail = fmt("%d MAP comparisons, max gap %.3g; %d joint laws x %zu gammas, %d monotonicity breaks", map_cases,
                 map_gap, mono_cases, fine.size(), mono_bad);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shell_quoted(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs the tool once into `out`; returns the exit status, with stdout and
// stderr captured next to the output directory.
int run_cli(const std::string& cli, const std::string& command, const fs::path& scenario, const fs::path& out) {
  const std::string line = shell_quoted(cli) + " " + command + " --scenario " + shell_quoted(scenario) + " --out " + shell_quoted(out) +
                           " > " + shell_quoted(out.string() + ".stdout") + " 2> " + shell_quoted(out.string() + ".stderr");
  return std::system(line.c_str());
}

std::string first_difference(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names_a, names_b;
  if (fs::exists(a)) {
    for (const auto& e : fs::directory_iterator(a)) names_a.push_back(e.path().filename().string());
  }
  if (fs::exists(b)) {
    for (const auto& e : fs::directory_iterator(b)) names_b.push_back(e.path().filename().string());
  }
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  if (names_a != names_b) return "file sets differ";
  for (const auto& name : names_a) {
    if (slurp(a / name) != slurp(b / name)) return name + " differs";
  }
  for (const char* ext : {".stdout", ".stderr"}) {
    if (slurp(a.string() + ext) != slurp(b.string() + ext)) return std::string(ext + 1) + " differs";
  }
  return {};
}

Outcome criterion9(const std::string& cli, const fs::path& scenarios, const fs::path& scratch) {
  Outcome o;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(scenarios)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  int runs = 0;
  int failures = 0;
  for (const auto& scenario : files) {
    for (const auto& command : command_names()) {
      const auto out = scratch / scenario.stem() / command;
      const auto first = scratch / scenario.stem() / (command + ".first");
      for (const auto& p : {out, first}) {
        fs::remove_all(p);
        fs::remove(p.string() + ".stdout");
        fs::remove(p.string() + ".stderr");
      }
      fs::create_directories(out.parent_path());
      const int code_a = run_cli(cli, command, scenario, out);
      if (fs::exists(out)) fs::rename(out, first);
      fs::rename(out.string() + ".stdout", first.string() + ".stdout");
      fs::rename(out.string() + ".stderr", first.string() + ".stderr");
      const int code_b = run_cli(cli, command, scenario, out);
      ++runs;
      std::string why = code_a != code_b ? fmt("exit %d vs %d", code_a, code_b) : first_difference(first, out);
      if (!why.empty()) {
        ++failures;
        if (o.pass) o.detail += scenario.stem().string() + " " + command + ": " + why + "; ";
        o.pass = false;
      }
    }
  }
  o.pass = o.pass && runs > 0;
  o.detail = fmt("%d command x scenario pairs re-run, %d differ", runs, failures) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <islab-cli> <scenarios-dir> <scratch-dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scenarios = argv[2];
  const fs::path scratch = argv[3];
  fs::create_directories(scratch);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "average vs maximal error gap", 1, criterion1},
      {2, "random-coding upper bound suite", 60, criterion2},
      {3, "converse lower bound suite", 120, criterion3},
      {4, "iid convolution vs enumeration", 30, criterion4},
      {5, "mixture source rates and diagnostics", 60, criterion5},
      {6, "separation witness", 120, criterion6},
      {7, "necessary-condition margin", 60, criterion7},
      {8, "MAP optimality and gamma monotonicity", 30, criterion8},
      {9, "CLI determinism", 600, [&] { return criterion9(cli, scenarios, scratch); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("criterion %d %-40s %s  %.2fs (limit %gs)%s  %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                c.limit_s, in_time ? "" : " TIMEOUT", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
