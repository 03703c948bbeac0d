#include <doctest.h>

#include <cmath>

#include "islab/analysis.hpp"

using namespace islab;

namespace {

const std::vector<int> kGrid{50, 100, 200, 400};

SourceModel bern(double p) { return SourceModel::iid({1 - p, p}); }

SourceModel light_heavy_mixture(double light_weight) {
  return SourceModel::mixed({light_weight, 1 - light_weight}, {bern(0.11), bern(0.4)});
}

std::vector<double> values_of(const ConditionTrace& t) {
  std::vector<double> v;
  for (const auto& term : t.per_n_terms) v.push_back(term.value);
  return v;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] + 1e-12) return false;
  }
  return true;
}

void check_trace_shape(const ConditionTrace& t) {
  CHECK(t.per_n_terms.size() == t.n_grid.size());
  for (const auto& term : t.per_n_terms) {
    CHECK(term.value >= 0.0);
    CHECK(term.value <= 1.0);
  }
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("verdict policy") {
    const VerdictPolicy policy;
    const std::vector<double> falling{0.5, 0.3, 0.1, 0.01};
    CHECK(classify_terms(falling, 0.0, policy) == Verdict::SatisfiedOnGrid);
    const std::vector<double> high{0.9, 0.95, 0.97, 0.99};
    CHECK(classify_terms(high, 0.0, policy) == Verdict::Violated);
    const std::vector<double> bumpy{0.5, 0.01, 0.02, 0.04};
    CHECK(classify_terms(bumpy, 0.0, policy) == Verdict::Inconclusive);
    CHECK(classify_terms(high, 0.99, policy) == Verdict::Inconclusive);
    CHECK(to_string(Verdict::SatisfiedOnGrid) == "satisfied-on-grid");
  }

  TEST_CASE("direct terms fall when entropy is below capacity") {
    const auto t = check_direct(bern(0.11), InputModel::uniform(2), ChannelModel::bsc(0.05),
                                GammaSchedule::power(1.0, 0.5), kGrid);
    check_trace_shape(t);
    const auto v = values_of(t);
    CHECK(nonincreasing(v));
    CHECK(v.back() < 0.05);
    CHECK(t.verdict == Verdict::SatisfiedOnGrid);
  }

  TEST_CASE("direct terms approach one when entropy exceeds capacity") {
    const auto t = check_direct(bern(0.4), InputModel::uniform(2), ChannelModel::bsc(0.05),
                                GammaSchedule::power(1.0, 0.5), kGrid);
    CHECK(t.per_n_terms.back().value > 0.9);
    CHECK(t.verdict == Verdict::Violated);
  }

  TEST_CASE("uniform messages at capacity over a noiseless channel are flagged") {
    const std::vector<int> grid{4, 8, 16};
    const auto t = check_direct(SourceModel::uniform_messages_power(2), InputModel::uniform(2),
                                ChannelModel::noiseless(2), GammaSchedule::power(0.01, 0.5), grid);
    CHECK(t.per_n_terms.back().value == doctest::Approx(1.0));
    CHECK(t.boundary_flag);
    CHECK(t.verdict == Verdict::Inconclusive);
  }

  TEST_CASE("converse terms") {
    const std::vector<int> grid{1, 2, 3, 4};
    const auto gamma = GammaSchedule::power(1.0, 0.5);
    // Identity code for a uniform source over a noiseless channel.
    const auto identity = InputModel::encoder([](int n) {
      std::vector<std::uint64_t> map(std::uint64_t{1} << n);
      for (std::uint64_t i = 0; i < map.size(); ++i) map[i] = i;
      return map;
    });
    const auto id = check_converse(SourceModel::iid({0.5, 0.5}), identity, ChannelModel::noiseless(2), gamma, grid);
    for (const auto& term : id.per_n_terms) CHECK(term.value == 0.0);

    // Colliding encoder with alpha_n = 1/n.
    const std::vector<int> long_grid{2, 4, 8, 16, 32};
    const auto src = avg_max_gap_source([](int n) { return 1.0 / n; });
    const auto t = check_converse(src, avg_max_gap_encoder(), avg_max_gap_channel(), gamma, long_grid);
    const auto v = values_of(t);
    CHECK(nonincreasing(v));
    CHECK(v.back() < 0.05);

    // A constant codeword carries nothing.
    const auto constant = InputModel::encoder([](int n) { return std::vector<std::uint64_t>(std::uint64_t{1} << n, 0); });
    // gamma_n < ln 2 from n = 3 on, so the event is certain there.
    const std::vector<int> later{3, 4, 6, 8};
    const auto bad = check_converse(SourceModel::iid({0.5, 0.5}), constant, ChannelModel::noiseless(2), gamma, later);
    for (const auto& term : bad.per_n_terms) CHECK(term.value > 0.5);

    CHECK_THROWS_AS(check_converse(bern(0.1), InputModel::uniform(2), ChannelModel::bsc(0.1), gamma, grid),
                    ValidationError);
  }

  TEST_CASE("strict domination and domination on the separable instance") {
    const double h = -0.11 * std::log(0.11) - 0.89 * std::log(0.89);
    const double c = std::log(2.0) + 0.05 * std::log(0.05) + 0.95 * std::log(0.95);
    const auto mid = ThresholdSchedule::constant(0.5 * (h + c));
    const auto gamma = GammaSchedule::power(1.0, 0.75);
    const auto strict = check_strict_domination(bern(0.11), InputModel::uniform(2), ChannelModel::bsc(0.05), mid,
                                                gamma, kGrid);
    const auto plain = check_domination(bern(0.11), InputModel::uniform(2), ChannelModel::bsc(0.05), mid, gamma, kGrid);
    check_trace_shape(strict);
    CHECK(strict.verdict == Verdict::SatisfiedOnGrid);
    CHECK(plain.verdict == Verdict::SatisfiedOnGrid);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      const auto& s = strict.per_n_terms[i];
      const auto& d = plain.per_n_terms[i];
      REQUIRE(s.term_source);
      REQUIRE(s.term_channel);
      CHECK(*s.term_source == *d.term_source);
      CHECK(*d.term_channel <= *s.term_channel);
      CHECK(s.value == doctest::Approx(*s.term_source + *s.term_channel).epsilon(1e-15));
    }
  }

  TEST_CASE("rates below entropy or above capacity leave one term near one") {
    const auto gamma = GammaSchedule::power(1.0, 0.5);
    const auto low = check_strict_domination(bern(0.11), InputModel::uniform(2), ChannelModel::bsc(0.05),
                                             ThresholdSchedule::constant(0.25), gamma, kGrid);
    CHECK(*low.per_n_terms.back().term_source > 0.9);
    const auto high = check_strict_domination(bern(0.11), InputModel::uniform(2), ChannelModel::bsc(0.05),
                                              ThresholdSchedule::constant(0.6), gamma, kGrid);
    CHECK(*high.per_n_terms.back().term_channel > 0.9);
  }

  TEST_CASE("domination at exactly capacity over a noiseless channel is inconclusive") {
    const std::vector<int> grid{4, 8, 16};
    const auto t = check_domination(SourceModel::iid({0.9, 0.1}), InputModel::uniform(2), ChannelModel::noiseless(2),
                                    ThresholdSchedule::constant(std::log(2.0)), GammaSchedule::power(0.01, 0.5), grid);
    CHECK(t.verdict == Verdict::Inconclusive);
    CHECK(t.boundary_flag);
  }

  TEST_CASE("product form vanishes with the sum form and recomputes from marginals") {
    const auto gamma = GammaSchedule::power(1.0, 0.75);
    const auto rate = ThresholdSchedule::constant(0.42);
    const auto src = bern(0.11);
    const auto in = InputModel::uniform(2);
    const auto ch = ChannelModel::bsc(0.05);
    const auto prod = check_product_domination(src, in, ch, rate, gamma, kGrid, rate);
    const auto sum = check_domination(src, in, ch, rate, gamma, kGrid);
    CHECK(sum.verdict == Verdict::SatisfiedOnGrid);
    CHECK(prod.verdict == Verdict::SatisfiedOnGrid);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      const auto& t = prod.per_n_terms[i];
      REQUIRE(t.implication_holds);
      CHECK(*t.implication_holds);
      const double g = gamma.at(i, kGrid[i]);
      const double kappa = entropy_spectrum(src, kGrid[i]).ccdf(0.42);
      const double mu = information_spectrum(ch, in, kGrid[i]).cdf(0.42 - g);
      CHECK(t.value == doctest::Approx(kappa * mu).epsilon(1e-14));
    }
  }

  TEST_CASE("product form can vanish while every sum form stays large") {
    const std::vector<int> grid{64, 128, 256, 512};
    const auto src = light_heavy_mixture(0.5);
    const auto in = InputModel::uniform(2);
    const auto ch = ChannelModel::bsc(0.05);
    const auto gamma = GammaSchedule::power(1.0, 0.75);
    const auto wander = ThresholdSchedule::alternating(0.40, 0.45);
    const auto prod = check_product_domination(src, in, ch, wander, gamma, grid);
    const auto sum = check_domination(src, in, ch, wander, gamma, grid);
    CHECK(prod.per_n_terms.back().value < 0.05);
    CHECK(prod.verdict != Verdict::Violated);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(prod.per_n_terms[i].value < 0.06);
      CHECK(sum.per_n_terms[i].value >= 0.5);
    }
    CHECK(sum.verdict == Verdict::Violated);
  }

  TEST_CASE("eps checks") {
    const auto gamma = GammaSchedule::power(1.0, 0.5);
    const auto in = InputModel::uniform(2);
    const auto ch = ChannelModel::bsc(0.05);
    // eps = 0 reduces to the plain checks.
    const auto direct = check_direct(bern(0.11), in, ch, gamma, kGrid);
    const auto eps0 = check_eps(bern(0.11), in, ch, gamma, kGrid, 0.0, false);
    CHECK(eps0.verdict == direct.verdict);
    CHECK(values_of(eps0) == values_of(direct));

    // Only the light component (weight 0.3) fits the channel.
    const std::vector<int> grid{200, 400, 800, 1600};
    const auto src = light_heavy_mixture(0.3);
    const auto pass = check_eps(src, in, ch, gamma, grid, 0.7, false);
    const auto fail = check_eps(src, in, ch, gamma, grid, 0.5, false);
    CHECK(pass.per_n_terms.back().value == doctest::Approx(0.7).epsilon(0.02));
    CHECK(pass.verdict == Verdict::SatisfiedOnGrid);
    CHECK(fail.verdict == Verdict::Violated);

    const auto loose = check_eps(bern(0.4), in, ch, gamma, std::vector<int>{4, 8, 16}, 0.99, false);
    bool all_below = true;
    for (const auto& t : loose.per_n_terms) all_below = all_below && t.value <= 0.9;
    if (all_below) CHECK(loose.verdict == Verdict::SatisfiedOnGrid);

    CHECK_THROWS_AS(check_eps(bern(0.4), in, ch, gamma, kGrid, 1.0, false), ValidationError);
  }

  TEST_CASE("source rate functionals") {
    const std::vector<int> grid{500, 1000, 2000};
    const auto iid = rate_functionals(bern(0.11), grid);
    CHECK(std::abs(find_rate(iid, RateQuantity::Rf).value - 0.34651) < 0.02);
    CHECK(std::abs(find_rate(iid, RateQuantity::UnderlineRf).value - 0.34651) < 0.02);
    CHECK(std::abs(find_rate(iid, RateQuantity::HUnderline).value - 0.34651) < 0.02);

    const auto mix = rate_functionals(light_heavy_mixture(0.5), grid);
    CHECK(std::abs(find_rate(mix, RateQuantity::Rf).value - 0.67301) < 0.02);
    CHECK(std::abs(find_rate(mix, RateQuantity::HUnderline).value - 0.34651) < 0.02);
    CHECK(find_rate(mix, RateQuantity::UnderlineRf).value <=
          find_rate(mix, RateQuantity::Rf).value + LimitEstimate::kStabilizationTolerance);
    CHECK(find_rate(mix, RateQuantity::HUnderline).value <= find_rate(mix, RateQuantity::HBar).value);
  }

  TEST_CASE("uniform messages give exact rates at every n") {
    const std::vector<int> grid{3, 5, 9};
    const auto src = SourceModel::uniform_messages(10);
    for (const auto& r : rate_functionals(src, grid)) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r.estimate.per_n_threshold[i] == doctest::Approx(std::log(10.0) / grid[i]).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("channel rate functionals") {
    const std::vector<int> grid{4, 8, 16};
    const std::vector<CandidateInput> cands{{"uniform", InputModel::uniform(2)}};
    const auto r = rate_functionals(ChannelModel::noiseless(2), cands, grid);
    CHECK(find_rate(r, RateQuantity::CLower).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(find_rate(r, RateQuantity::OverlineCLower).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    const std::vector<int> big{50, 100, 200};
    const std::vector<CandidateInput> two{{"skewed", InputModel::iid({0.8, 0.2})}, {"uniform", InputModel::uniform(2)}};
    const auto b = rate_functionals(ChannelModel::bsc(0.05), two, big);
    const auto& c = find_rate(b, RateQuantity::CLower);
    CHECK(c.input == "uniform");
    CHECK(c.inputs_searched.size() == 2);
    CHECK(c.value <= find_rate(b, RateQuantity::OverlineCLower).value + 1e-12);
    CHECK(std::abs(c.value - 0.49463) < 0.02);
    const std::vector<CandidateInput> none;
    CHECK_THROWS_AS(rate_functionals(ChannelModel::bsc(0.05), none, big), ValidationError);
  }

  TEST_CASE("converse-property diagnostics") {
    const std::vector<int> grid{500, 1000, 2000};
    const auto iid = converse_property_diagnostics(bern(0.11), grid);
    CHECK(iid.strong_converse);
    CHECK(iid.semi_strong);
    CHECK(iid.information_stable);
    for (const auto& s : iid.stability) {
      for (std::size_t i = 1; i < s.per_n.size(); ++i) CHECK(s.per_n[i] <= s.per_n[i - 1]);
    }

    const auto mix = converse_property_diagnostics(light_heavy_mixture(0.5), grid);
    CHECK_FALSE(mix.strong_converse);
    CHECK(std::abs(mix.strong_gap - 0.3265) < 0.03);
    CHECK(mix.semi_strong);
    CHECK_FALSE(mix.information_stable);

    const auto uni = converse_property_diagnostics(SourceModel::uniform_messages_power(2), std::vector<int>{8, 16, 32});
    CHECK(uni.strong_converse);
    CHECK(uni.semi_strong);
    CHECK(uni.information_stable);
  }

  TEST_CASE("separation verdicts") {
    const std::vector<int> grid{200, 400, 800};
    const std::vector<CandidateInput> cands{{"uniform", InputModel::uniform(2)}};
    SeparationOptions opts;
    opts.gamma = GammaSchedule::power(1.0, 0.75);
    const auto ok = separation_verdict(bern(0.11), ChannelModel::bsc(0.05), cands, grid, opts);
    CHECK(ok.sufficient);
    CHECK_FALSE(ok.necessary_violated);
    CHECK_FALSE(ok.witness.empty());
    for (const auto& w : ok.witness) CHECK(w.error <= w.bound + 1e-12);

    const auto bad = separation_verdict(bern(0.4), ChannelModel::bsc(0.05), cands, grid, opts);
    CHECK_FALSE(bad.sufficient);
    CHECK(bad.witness.empty());
    CHECK(bad.necessary_violated);
    CHECK(bad.overline_margin >= 0.15);

    const std::vector<CandidateInput> quad{{"uniform", InputModel::uniform(4)}};
    const auto easy = separation_verdict(SourceModel::uniform_messages_power(2), ChannelModel::noiseless(4), quad,
                                         std::vector<int>{4, 8, 16}, opts);
    CHECK(easy.sufficient);
    CHECK_FALSE(easy.necessary_violated);
  }
}
