#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tailgraph/commands.hpp"

namespace {

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double t = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(t);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail graphical models for decomposable extremal graphs"};
  app.require_subcommand(1);
  std::string config;
  std::string out, levels;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  int workers = 0;

  for (const char* name : {"graph", "derive", "verify"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "graph"
                                             ? "validate the graph and print its junction tree"
                                         : std::string(name) == "derive"
                                             ? "derive the tail model or tail noise"
                                             : "run the convergence and remainder checks");
    sub->add_option("--config", config, "run configuration (JSON)")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--n", n, "sample size");
    sub->add_option("--t-levels", levels, "comma-separated conditioning levels");
    sub->add_option("--workers", workers, "sampling threads");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tailgraph::kExitConfig;
  }

  tailgraph::RunOverrides overrides;
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--out")) overrides.out = out;
  if (sub->count("--seed")) overrides.seed = seed;
  if (sub->count("--n")) overrides.n = n;
  if (sub->count("--workers")) overrides.workers = workers;
  if (sub->count("--t-levels")) {
    try {
      overrides.t_levels = parse_levels(levels);
    } catch (const std::exception&) {
      std::cerr << "--t-levels expects numbers separated by commas\n";
      return tailgraph::kExitConfig;
    }
  }
  return tailgraph::run_command(sub->get_name(), config, overrides, std::cout, std::cerr);
}
