#pragma once

// Subcommands of the islab tool. Each writes CSV files into an output
// directory; every file starts with a provenance comment naming the scenario
// hash, then a header row. Numbers use 17 significant digits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "islab/scenario.hpp"

namespace islab {

struct CommandOptions {
  std::string out_dir = ".";
  std::optional<int> n;                   // replaces every blocklength grid
  std::optional<double> gamma;            // constant slack
  std::optional<double> eps;              // level of the eps checks
  std::optional<std::uint64_t> budget;    // enumeration budget
  std::optional<std::uint64_t> seed;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"spectrum", "bounds", "code", "oracle", "check", "rates", "report"};
  return names;
}

void apply_overrides(Scenario& sc, const CommandOptions& options);

/// Runs one subcommand and returns the files it wrote, in order.
std::vector<std::string> run_command(const std::string& command, const Scenario& sc, const CommandOptions& options);

/// %.17g, with inf / -inf / nan spelled out.
std::string format_number(double x);

}  // namespace islab
