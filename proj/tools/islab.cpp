// islab: command-line front end. Exit codes: 0 success, 1 budget exceeded,
// 2 invalid scenario or arguments. Condition verdicts never change the code.

#include <omp.h>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "islab/commands.hpp"
#include "islab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-blocklength information-spectrum lab for joint source-channel coding"};
  app.require_subcommand(1, 1);

  std::string scenario_path;
  islab::CommandOptions options;
  int threads = 0;

  const std::map<std::string, std::string> about{
      {"spectrum", "Entropy and information spectra per blocklength"},
      {"bounds", "Random-coding, converse and separation bounds over the gamma grid"},
      {"code", "Two-step and threshold-decoder codes with exact errors"},
      {"oracle", "Exhaustive optimal-code search"},
      {"check", "Transmissibility conditions over the blocklength grid"},
      {"rates", "Rate and capacity functionals, diagnostics, separation verdict"},
      {"report", "Every command in turn, with a summary of skipped parts"}};

  for (const auto& name : islab::command_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sub->add_option("--out", options.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--n", options.n, "Use this single blocklength for every grid");
    sub->add_option("--gamma", options.gamma, "Constant slack gamma");
    sub->add_option("--eps", options.eps, "Level of the eps-transmissibility checks");
    sub->add_option("--budget", options.budget, "Enumeration budget");
    sub->add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");
    sub->add_option("--seed", options.seed, "Seed for sampled codebooks and code construction");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (threads > 0) omp_set_num_threads(threads);

  try {
    auto sc = islab::load_scenario(scenario_path);
    islab::apply_overrides(sc, options);
    for (const auto& file : islab::run_command(command, sc, options)) std::cout << file << '\n';
  } catch (const islab::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const islab::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
