#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tailgraph/clique_model.hpp"
#include "tailgraph/graph.hpp"

namespace tailgraph {

struct Tolerances {
  double ks_max = 0.05;
  double trend_slack = 1.2;
  double ks_constant = 1.95;
  double remainder_tol = 1e-2;
  std::vector<double> remainder_t_grid{10.0, 100.0, 1000.0};
  double remainder_z_max = 3.0;
  double fd_step = 1e-3;
  double mvn_accuracy = 1e-6;
  double homogeneity_tol = 1e-4;
};

struct CliqueSpec {
  VertexSet clique;
  Family family;
  Eigen::MatrixXd parameters;  // variogram or correlation over `clique`
};

struct RunConfig {
  std::string name;
  int vertex_count = 0;
  std::vector<Edge> edges;
  std::vector<CliqueSpec> cliques;
  std::optional<Eigen::MatrixXd> correlation;  // whole-graph Gaussian model over 1..d
  Vertex conditioning_vertex = 1;
  std::vector<double> t_levels{4.0, 8.0};
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = "out";
  Tolerances tolerances;
  std::string hash;  // FNV-1a of the config text, hex
};

// Strict JSON parsing: unknown keys and ill-typed values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

Graph make_graph(const RunConfig& config);

// Clique models for the maximal cliques of `ordering`.  Clique specs must match
// the maximal cliques exactly (ConfigError otherwise); a whole-graph
// correlation is split into its clique marginals.
std::vector<CliqueModel> make_models(const RunConfig& config, const CliqueOrdering& ordering);

}  // namespace tailgraph
