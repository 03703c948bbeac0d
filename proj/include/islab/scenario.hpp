#pragma once

// Scenario files: versioned JSON describing models, grids, schedules and
// budgets for the command-line tool.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "islab/analysis.hpp"
#include "islab/bounds.hpp"
#include "islab/models.hpp"

namespace islab {

/// Validation failure anchored to a location in the scenario text.
class ScenarioError : public ValidationError {
 public:
  ScenarioError(const std::string& file, int line, const std::string& path, const std::string& message);
  int line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  int line_;
  std::string path_;
};

struct Scenario {
  std::string name;
  std::uint64_t hash = 0;  // FNV-1a of the canonical JSON dump

  SourceModel source;
  ChannelModel channel;
  InputModel input;
  std::vector<CandidateInput> candidates;

  std::vector<int> n_grid;
  GammaSchedule gamma = GammaSchedule::power(1.0, 0.5);
  std::vector<double> gamma_grid;            // bounds sweep; empty means the schedule
  std::optional<ThresholdSchedule> rate;     // c_n; empty means the midpoint of R_f and C_lower
  std::optional<ThresholdSchedule> product_rate;  // d_n
  double tail_eps = 1e-3;
  double eps_level = 0.0;
  std::vector<std::string> checks;

  std::vector<int> code_n;
  std::string code_kind = "two_step";
  int samples = 1;
  std::vector<int> oracle_n;

  Limits limits;
  std::uint64_t seed = 1;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace islab
