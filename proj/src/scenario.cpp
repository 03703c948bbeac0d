#include "islab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "islab/coding.hpp"

namespace islab {

using json = nlohmann::json;

ScenarioError::ScenarioError(const std::string& file, int line, const std::string& path, const std::string& message)
    : ValidationError(file + ":" + std::to_string(line) + ": " + (path.empty() ? "" : path + ": ") + message),
      line_(line),
      path_(path) {}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Walks the raw text key by key; array indices are skipped because the
// element lies after its parent key anyway.
int line_of_path(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  for (const auto& key : path) {
    if (!key.empty() && key.front() == '[') continue;
    const auto at = text.find("\"" + key + "\"", pos);
    if (at == std::string::npos) break;
    found = at;
    pos = at + key.size() + 2;
  }
  return found == std::string::npos ? 1 : line_of_offset(text, found);
}

class Parser {
 public:
  Parser(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  struct Scope {
    Parser& p;
    Scope(Parser& parser, std::string key) : p(parser) { p.path_.push_back(std::move(key)); }
    ~Scope() { p.path_.pop_back(); }
  };

  [[noreturn]] void fail(const std::string& message) const {
    std::string dotted;
    for (const auto& key : path_) {
      if (!key.empty() && key.front() == '[') {
        dotted += key;
      } else {
        if (!dotted.empty()) dotted += '.';
        dotted += key;
      }
    }
    throw ScenarioError(origin_, line_of_path(text_, path_), dotted, message);
  }

  // Runs `build`, converting library validation errors into anchored ones.
  template <typename F>
  auto guarded(F&& build) -> decltype(build()) {
    try {
      return build();
    } catch (const ScenarioError&) {
      throw;
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  const json& field(const json& obj, const std::string& key) {
    if (!obj.is_object()) fail("expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail("missing key \"" + key + "\"");
    return *it;
  }

  void only_keys(const json& obj, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
      if (!ok.contains(key)) {
        Scope s(*this, key);
        fail("unknown key");
      }
    }
  }

  double number(const json& j) {
    if (!j.is_number()) fail("expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double number_at(const json& obj, const std::string& key) {
    const auto& j = field(obj, key);
    Scope s(*this, key);
    return number(j);
  }

  long long integer(const json& j) {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<long long>();
  }

  std::uint64_t count_at(const json& obj, const std::string& key) {
    const auto& j = field(obj, key);
    Scope s(*this, key);
    if (!j.is_number_unsigned() || j.get<std::uint64_t>() == 0) fail("expected a positive integer");
    return j.get<std::uint64_t>();
  }

  std::string string_at(const json& obj, const std::string& key) {
    const auto& j = field(obj, key);
    Scope s(*this, key);
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const json& j) {
    if (!j.is_array() || j.empty()) fail("expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      Scope s(*this, "[" + std::to_string(i) + "]");
      out.push_back(number(j[i]));
    }
    return out;
  }

  std::vector<double> pmf_at(const json& obj, const std::string& key) {
    const auto& j = field(obj, key);
    Scope s(*this, key);
    auto p = numbers(j);
    guarded([&] {
      validate_pmf(p, "pmf");
      return 0;
    });
    return p;
  }

  Matrix matrix(const json& j) {
    if (!j.is_array() || j.empty()) fail("expected a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
      Scope s(*this, "[" + std::to_string(i) + "]");
      rows.push_back(numbers(j[i]));
      if (rows.back().size() != rows.front().size()) fail("ragged matrix");
    }
    return guarded([&] {
      auto m = Matrix::from_rows(rows);
      validate_stochastic(m, "matrix");
      return m;
    });
  }

  Matrix matrix_at(const json& obj, const std::string& key) {
    const auto& j = field(obj, key);
    Scope s(*this, key);
    return matrix(j);
  }

  int blocklength_key(const std::string& key) {
    Scope s(*this, key);
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(key, &used);
      if (used != key.size()) n = 0;
    } catch (const std::exception&) {
      n = 0;
    }
    if (n <= 0) fail("table keys must be positive blocklengths");
    return n;
  }

  template <typename T, typename F>
  std::map<int, T> per_n_table(const json& obj, const std::string& key, F&& element) {
    const auto& j = field(obj, key);
    Scope s(*this, key);
    if (!j.is_object() || j.empty()) fail("expected an object keyed by blocklength");
    std::map<int, T> out;
    for (const auto& [k, v] : j.items()) {
      const int n = blocklength_key(k);
      Scope e(*this, k);
      out.emplace(n, element(v));
    }
    return out;
  }

  std::vector<int> grid(const json& j) {
    if (!j.is_array() || j.empty()) fail("expected a nonempty array of blocklengths");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      Scope s(*this, "[" + std::to_string(i) + "]");
      const auto n = integer(j[i]);
      if (n <= 0 || n > 1'000'000) fail("blocklength out of range");
      if (!out.empty() && n <= out.back()) fail("blocklengths must be strictly increasing");
      out.push_back(static_cast<int>(n));
    }
    return out;
  }

  // ------------------------------------------------------------ models

  SourceModel source(const json& j) {
    const auto kind = string_at(j, "kind");
    if (kind == "iid") {
      only_keys(j, {"kind", "pmf"});
      return guarded([&] { return SourceModel::iid(pmf_at(j, "pmf")); });
    }
    if (kind == "iid_countable") {
      only_keys(j, {"kind", "family", "ratio", "lambda", "tail"});
      const auto family = string_at(j, "family");
      const double tail = j.contains("tail") ? number_at(j, "tail") : 1e-12;
      if (family == "geometric") {
        const double r = number_at(j, "ratio");
        if (!(r > 0.0 && r < 1.0)) {
          Scope s(*this, "ratio");
          fail("ratio must lie in (0, 1)");
        }
        return guarded([&] {
          return SourceModel::truncated_countable(
              [r](std::uint64_t k) { return (1.0 - r) * std::pow(r, static_cast<double>(k)); }, tail);
        });
      }
      if (family == "poisson") {
        const double lambda = number_at(j, "lambda");
        if (!(lambda > 0.0)) {
          Scope s(*this, "lambda");
          fail("lambda must be positive");
        }
        return guarded([&] {
          return SourceModel::truncated_countable(
              [lambda](std::uint64_t k) {
                const double kd = static_cast<double>(k);
                return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
              },
              tail);
        });
      }
      Scope s(*this, "family");
      fail("unknown family \"" + family + "\" (geometric, poisson)");
    }
    if (kind == "uniform_message") {
      only_keys(j, {"kind", "count", "base", "counts"});
      if (j.contains("count")) return SourceModel::uniform_messages(count_at(j, "count"));
      if (j.contains("base")) return SourceModel::uniform_messages_power(count_at(j, "base"));
      auto counts = per_n_table<std::uint64_t>(j, "counts", [&](const json& v) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) fail("expected a positive integer");
        return v.get<std::uint64_t>();
      });
      return SourceModel::uniform_messages_table(std::move(counts));
    }
    if (kind == "mixed") {
      only_keys(j, {"kind", "weights", "components"});
      const auto weights = pmf_at(j, "weights");
      const auto& comps = field(j, "components");
      Scope s(*this, "components");
      if (!comps.is_array() || comps.size() != weights.size()) fail("expected one component per weight");
      std::vector<SourceModel> parts;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        Scope e(*this, "[" + std::to_string(i) + "]");
        parts.push_back(source(comps[i]));
      }
      return guarded([&] { return SourceModel::mixed(weights, std::move(parts)); });
    }
    if (kind == "block") {
      only_keys(j, {"kind", "pmf"});
      return guarded([&] { return SourceModel::block(pmf_at(j, "pmf")); });
    }
    if (kind == "table") {
      only_keys(j, {"kind", "pmfs"});
      auto pmfs = per_n_table<std::vector<double>>(j, "pmfs", [&](const json& v) {
        auto p = numbers(v);
        guarded([&] {
          validate_pmf(p, "pmf");
          return 0;
        });
        return p;
      });
      return guarded([&] { return SourceModel::table(std::move(pmfs)); });
    }
    if (kind == "avg_max_gap") {
      only_keys(j, {"kind", "alpha"});
      const double alpha = number_at(j, "alpha");
      if (!(alpha > 0.0 && alpha <= 1.0)) {
        Scope s(*this, "alpha");
        fail("alpha must lie in (0, 1]");
      }
      return guarded([&] { return avg_max_gap_instance(alpha).source; });
    }
    Scope s(*this, "kind");
    fail("unknown source kind \"" + kind + "\"");
  }

  ChannelModel channel(const json& j) {
    const auto kind = string_at(j, "kind");
    if (kind == "dmc") {
      only_keys(j, {"kind", "matrix"});
      return guarded([&] { return ChannelModel::dmc(matrix_at(j, "matrix")); });
    }
    if (kind == "bsc") {
      only_keys(j, {"kind", "crossover"});
      const double p = number_at(j, "crossover");
      Scope s(*this, "crossover");
      return guarded([&] { return ChannelModel::bsc(p); });
    }
    if (kind == "noiseless") {
      only_keys(j, {"kind", "letters"});
      const auto letters = j.contains("letters") ? count_at(j, "letters") : 2;
      if (letters > 1'000'000) fail("too many letters");
      return ChannelModel::noiseless(static_cast<int>(letters));
    }
    if (kind == "deterministic") {
      only_keys(j, {"kind", "map", "outputs"});
      const auto outputs = count_at(j, "outputs");
      const auto& m = field(j, "map");
      Scope s(*this, "map");
      if (!m.is_array() || m.empty()) fail("expected a nonempty array of output letters");
      std::vector<int> map;
      for (std::size_t i = 0; i < m.size(); ++i) {
        Scope e(*this, "[" + std::to_string(i) + "]");
        const auto y = integer(m[i]);
        if (y < 0 || static_cast<std::uint64_t>(y) >= outputs) fail("output letter out of range");
        map.push_back(static_cast<int>(y));
      }
      return guarded([&] { return ChannelModel::deterministic(map, static_cast<int>(outputs)); });
    }
    if (kind == "mixed") {
      only_keys(j, {"kind", "weights", "components"});
      const auto weights = pmf_at(j, "weights");
      const auto& comps = field(j, "components");
      Scope s(*this, "components");
      if (!comps.is_array() || comps.size() != weights.size()) fail("expected one component per weight");
      std::vector<ChannelModel> parts;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        Scope e(*this, "[" + std::to_string(i) + "]");
        parts.push_back(channel(comps[i]));
      }
      return guarded([&] { return ChannelModel::mixed(weights, std::move(parts)); });
    }
    if (kind == "block") {
      only_keys(j, {"kind", "matrix"});
      return guarded([&] { return ChannelModel::block(matrix_at(j, "matrix")); });
    }
    if (kind == "table") {
      only_keys(j, {"kind", "kernels"});
      auto kernels = per_n_table<Matrix>(j, "kernels", [&](const json& v) { return matrix(v); });
      return guarded([&] { return ChannelModel::table(std::move(kernels)); });
    }
    if (kind == "avg_max_gap") {
      only_keys(j, {"kind"});
      return avg_max_gap_channel();
    }
    Scope s(*this, "kind");
    fail("unknown channel kind \"" + kind + "\"");
  }

  InputModel input(const json& j, const ChannelModel& ch) {
    const auto kind = string_at(j, "kind");
    if (kind == "iid") {
      only_keys(j, {"kind", "pmf"});
      return guarded([&] { return InputModel::iid(pmf_at(j, "pmf")); });
    }
    if (kind == "uniform") {
      only_keys(j, {"kind", "letters"});
      std::uint64_t letters = 0;
      if (j.contains("letters")) {
        letters = count_at(j, "letters");
      } else if (ch.letter_structured()) {
        letters = static_cast<std::uint64_t>(ch.input_letters());
      } else {
        fail("\"letters\" is required when the channel has no letter structure");
      }
      if (letters > 1'000'000) fail("too many letters");
      return InputModel::uniform(static_cast<int>(letters));
    }
    if (kind == "table") {
      only_keys(j, {"kind", "pmfs"});
      auto pmfs = per_n_table<std::vector<double>>(j, "pmfs", [&](const json& v) {
        auto p = numbers(v);
        guarded([&] {
          validate_pmf(p, "pmf");
          return 0;
        });
        return p;
      });
      return InputModel::independent_table([pmfs](int n) {
        const auto it = pmfs.find(n);
        if (it == pmfs.end()) throw ValidationError("input table has no entry for n = " + std::to_string(n));
        return it->second;
      });
    }
    if (kind == "conditional") {
      only_keys(j, {"kind", "matrix", "structure"});
      const auto structure = j.contains("structure") ? string_at(j, "structure") : std::string("letter");
      auto rows = matrix_at(j, "matrix");
      if (structure == "letter") return InputModel::conditional_letter(std::move(rows));
      if (structure == "block") return InputModel::conditional_block(std::move(rows));
      Scope s(*this, "structure");
      fail("structure must be \"letter\" or \"block\"");
    }
    if (kind == "encoder") {
      only_keys(j, {"kind", "map"});
      const auto& m = field(j, "map");
      Scope s(*this, "map");
      if (!m.is_array() || m.empty()) fail("expected a nonempty array of input symbols");
      std::vector<std::uint64_t> map;
      for (std::size_t i = 0; i < m.size(); ++i) {
        Scope e(*this, "[" + std::to_string(i) + "]");
        if (!m[i].is_number_unsigned()) fail("expected a nonnegative integer");
        map.push_back(m[i].get<std::uint64_t>());
      }
      return InputModel::encoder_block(std::move(map));
    }
    if (kind == "avg_max_gap") {
      only_keys(j, {"kind"});
      return avg_max_gap_encoder();
    }
    Scope s(*this, "kind");
    fail("unknown input kind \"" + kind + "\"");
  }

  GammaSchedule gamma(const json& j) {
    const auto kind = string_at(j, "kind");
    if (kind == "power") {
      only_keys(j, {"kind", "scale", "exponent"});
      const double scale = j.contains("scale") ? number_at(j, "scale") : 1.0;
      const double exponent = j.contains("exponent") ? number_at(j, "exponent") : 0.5;
      return guarded([&] { return GammaSchedule::power(scale, exponent); });
    }
    if (kind == "constant") {
      only_keys(j, {"kind", "value"});
      const double v = number_at(j, "value");
      Scope s(*this, "value");
      return guarded([&] { return GammaSchedule::constant(v); });
    }
    if (kind == "explicit") {
      only_keys(j, {"kind", "values"});
      const auto& vs = field(j, "values");
      Scope s(*this, "values");
      auto values = numbers(vs);
      return guarded([&] { return GammaSchedule::explicit_values(std::move(values)); });
    }
    Scope s(*this, "kind");
    fail("unknown gamma kind \"" + kind + "\" (power, constant, explicit)");
  }

  ThresholdSchedule threshold(const json& j) {
    const auto kind = string_at(j, "kind");
    if (kind == "constant") {
      only_keys(j, {"kind", "value"});
      return ThresholdSchedule::constant(number_at(j, "value"));
    }
    if (kind == "explicit") {
      only_keys(j, {"kind", "values"});
      const auto& vs = field(j, "values");
      Scope s(*this, "values");
      return guarded([&] { return ThresholdSchedule::explicit_values(numbers(vs)); });
    }
    if (kind == "alternating") {
      only_keys(j, {"kind", "low", "high"});
      return ThresholdSchedule::alternating(number_at(j, "low"), number_at(j, "high"));
    }
    Scope s(*this, "kind");
    fail("unknown schedule kind \"" + kind + "\" (constant, explicit, alternating)");
  }

  Scenario scenario(const json& root) {
    if (!root.is_object()) fail("top level must be an object");
    only_keys(root, {"version", "name", "source", "channel", "input", "candidate_inputs", "n_grid", "gamma",
                     "gamma_grid", "rate", "product_rate", "tail_eps", "eps", "checks", "code", "oracle", "budgets",
                     "seed"});
    {
      const auto& v = field(root, "version");
      Scope s(*this, "version");
      if (!v.is_number_integer() || v.get<long long>() != 1) fail("unsupported version (expected 1)");
    }

    Scenario sc;
    sc.name = root.contains("name") ? string_at(root, "name") : std::string("scenario");
    {
      Scope s(*this, "source");
      sc.source = source(field(root, "source"));
    }
    {
      Scope s(*this, "channel");
      sc.channel = channel(field(root, "channel"));
    }
    {
      Scope s(*this, "input");
      sc.input = input(field(root, "input"), sc.channel);
    }
    if (root.contains("candidate_inputs")) {
      const auto& cs = root["candidate_inputs"];
      Scope s(*this, "candidate_inputs");
      if (!cs.is_array() || cs.empty()) fail("expected a nonempty array");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        Scope e(*this, "[" + std::to_string(i) + "]");
        const auto label = string_at(cs[i], "label");
        Scope in(*this, "input");
        auto model = input(field(cs[i], "input"), sc.channel);
        if (!model.independent()) fail("candidate inputs must be independent of the source");
        sc.candidates.push_back({label, std::move(model)});
      }
    } else if (sc.input.independent()) {
      sc.candidates.push_back({"input", sc.input});
    }

    {
      Scope s(*this, "n_grid");
      sc.n_grid = grid(field(root, "n_grid"));
    }
    if (root.contains("gamma")) {
      Scope s(*this, "gamma");
      sc.gamma = gamma(root["gamma"]);
      if (sc.gamma.kind() == GammaSchedule::Kind::Explicit && sc.gamma.values().size() != sc.n_grid.size()) {
        fail("explicit gamma needs one value per n_grid entry");
      }
    }
    if (root.contains("gamma_grid")) {
      Scope s(*this, "gamma_grid");
      sc.gamma_grid = numbers(root["gamma_grid"]);
      for (double g : sc.gamma_grid) {
        if (!(g > 0.0)) fail("gamma values must be positive");
      }
    }
    if (root.contains("rate")) {
      Scope s(*this, "rate");
      sc.rate = threshold(root["rate"]);
    }
    if (root.contains("product_rate")) {
      Scope s(*this, "product_rate");
      sc.product_rate = threshold(root["product_rate"]);
    }
    if (root.contains("tail_eps")) {
      sc.tail_eps = number_at(root, "tail_eps");
      if (!(sc.tail_eps > 0.0 && sc.tail_eps < 1.0)) {
        Scope s(*this, "tail_eps");
        fail("tail_eps must lie in (0, 1)");
      }
    }
    if (root.contains("eps")) {
      sc.eps_level = number_at(root, "eps");
      if (!(sc.eps_level >= 0.0 && sc.eps_level < 1.0)) {
        Scope s(*this, "eps");
        fail("eps must lie in [0, 1)");
      }
    }
    if (root.contains("checks")) {
      const auto& cs = root["checks"];
      Scope s(*this, "checks");
      if (!cs.is_array()) fail("expected an array of condition names");
      static const std::set<std::string> known = {"direct",       "converse",          "strict_domination",
                                                  "domination",   "product_domination", "eps_direct",
                                                  "eps_converse"};
      for (std::size_t i = 0; i < cs.size(); ++i) {
        Scope e(*this, "[" + std::to_string(i) + "]");
        if (!cs[i].is_string() || !known.contains(cs[i].get<std::string>())) fail("unknown condition");
        sc.checks.push_back(cs[i].get<std::string>());
      }
    } else {
      sc.checks = {"direct", "strict_domination", "domination"};
      if (sc.input.is_encoder()) sc.checks = {"direct", "converse"};
    }
    if (root.contains("code")) {
      const auto& c = root["code"];
      Scope s(*this, "code");
      only_keys(c, {"n", "kind", "samples"});
      {
        Scope e(*this, "n");
        const auto& nj = field(c, "n");
        sc.code_n = nj.is_array() ? grid(nj) : grid(json::array({nj}));
      }
      if (c.contains("kind")) {
        sc.code_kind = string_at(c, "kind");
        if (sc.code_kind != "two_step" && sc.code_kind != "threshold" && sc.code_kind != "both") {
          Scope e(*this, "kind");
          fail("code kind must be two_step, threshold or both");
        }
      }
      if (c.contains("samples")) {
        const auto samples = count_at(c, "samples");
        if (samples > 100'000) fail("too many samples");
        sc.samples = static_cast<int>(samples);
      }
    }
    if (root.contains("oracle")) {
      const auto& o = root["oracle"];
      Scope s(*this, "oracle");
      only_keys(o, {"n"});
      Scope e(*this, "n");
      const auto& nj = field(o, "n");
      sc.oracle_n = nj.is_array() ? grid(nj) : grid(json::array({nj}));
    }
    if (root.contains("budgets")) {
      const auto& b = root["budgets"];
      Scope s(*this, "budgets");
      only_keys(b, {"enumeration", "oracle", "types"});
      if (b.contains("enumeration")) sc.limits.enumeration = count_at(b, "enumeration");
      if (b.contains("oracle")) sc.limits.oracle = count_at(b, "oracle");
      if (b.contains("types")) sc.limits.types = count_at(b, "types");
    }
    if (root.contains("seed")) {
      const auto& sj = root["seed"];
      Scope s(*this, "seed");
      if (!sj.is_number_unsigned()) fail("expected a nonnegative integer");
      sc.seed = sj.get<std::uint64_t>();
    }

    // Alphabet consistency at the smallest blocklength that fits the budget.
    {
      Scope s(*this, "input");
      try {
        check_consistent(sc.source, sc.input, sc.channel, sc.n_grid.front(), sc.limits);
      } catch (const BudgetExceeded&) {
      } catch (const ValidationError& e) {
        fail(e.what());
      }
    }
    return sc;
  }

 private:
  const std::string& text_;
  std::string origin_;
  std::vector<std::string> path_;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), "", e.what());
  }
  Parser parser(text, origin);
  Scenario sc = parser.scenario(root);
  sc.hash = fnv1a64(root.dump());
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open scenario file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path);
}

}  // namespace islab
