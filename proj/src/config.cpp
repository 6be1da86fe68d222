#include "tailgraph/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tailgraph/error.hpp"

namespace tailgraph {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

void reject_unknown(const json& object, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!object.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : object.items()) {
    if (!allowed.count(key)) config_error("unknown field '" + key + "' in " + where);
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where + " must be a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) config_error(where + " must be an integer");
  return j.get<long long>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, where));
  return out;
}

// Square matrix given as an array of rows or as a flat row-major array.
Eigen::MatrixXd square_matrix(const json& j, std::size_t k, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be an array");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  if (!j.empty() && j.front().is_array()) {
    if (j.size() != k) config_error(where + " must have " + std::to_string(k) + " rows");
    for (std::size_t r = 0; r < k; ++r) {
      const auto row = numbers(j[r], where);
      if (row.size() != k) config_error(where + " rows must have " + std::to_string(k) + " entries");
      for (std::size_t c = 0; c < k; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  } else {
    const auto flat = numbers(j, where);
    if (flat.size() != k * k) {
      config_error(where + " must hold " + std::to_string(k * k) + " entries");
    }
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * k + c];
  }
  return m;
}

Tolerances parse_tolerances(const json& j) {
  reject_unknown(j,
                 {"ks_max", "trend_slack", "ks_constant", "remainder_tol", "remainder_t_grid",
                  "remainder_z_max", "fd_step", "mvn_accuracy", "homogeneity_tol"},
                 "tolerances");
  Tolerances t;
  auto positive = [&](const char* key, double& slot) {
    if (!j.contains(key)) return;
    slot = number(j[key], std::string("tolerances.") + key);
    if (!(slot > 0.0)) config_error(std::string("tolerances.") + key + " must be positive");
  };
  positive("ks_max", t.ks_max);
  positive("trend_slack", t.trend_slack);
  positive("ks_constant", t.ks_constant);
  positive("remainder_tol", t.remainder_tol);
  positive("remainder_z_max", t.remainder_z_max);
  positive("fd_step", t.fd_step);
  positive("mvn_accuracy", t.mvn_accuracy);
  positive("homogeneity_tol", t.homogeneity_tol);
  if (j.contains("remainder_t_grid")) {
    t.remainder_t_grid = numbers(j["remainder_t_grid"], "tolerances.remainder_t_grid");
    if (t.remainder_t_grid.empty()) config_error("tolerances.remainder_t_grid is empty");
    for (double x : t.remainder_t_grid)
      if (!(x > 0.0)) config_error("remainder t levels must be positive");
  }
  return t;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"name", "description", "graph", "cliques", "correlation",
                  "conditioning_vertex", "t_levels", "n", "seed", "workers", "output_dir",
                  "tolerances"},
                 "config");
  RunConfig cfg;
  cfg.hash = fnv1a_hex(text);
  if (root.contains("name")) {
    if (!root["name"].is_string()) config_error("name must be a string");
    cfg.name = root["name"].get<std::string>();
  }
  if (root.contains("description") && !root["description"].is_string()) {
    config_error("description must be a string");
  }

  if (!root.contains("graph")) config_error("missing field 'graph'");
  const auto& g = root["graph"];
  reject_unknown(g, {"vertices", "edges"}, "graph");
  if (!g.contains("vertices") || !g.contains("edges")) {
    config_error("graph needs 'vertices' and 'edges'");
  }
  cfg.vertex_count = static_cast<int>(integer(g["vertices"], "graph.vertices"));
  if (cfg.vertex_count < 1) config_error("graph.vertices must be >= 1");
  if (!g["edges"].is_array()) config_error("graph.edges must be an array");
  for (const auto& e : g["edges"]) {
    if (!e.is_array() || e.size() != 2) config_error("each edge must be a pair of vertices");
    cfg.edges.emplace_back(static_cast<Vertex>(integer(e[0], "edge endpoint")),
                           static_cast<Vertex>(integer(e[1], "edge endpoint")));
  }

  if (root.contains("cliques")) {
    if (!root["cliques"].is_array()) config_error("cliques must be an array");
    for (const auto& c : root["cliques"]) {
      reject_unknown(c, {"clique", "family", "variogram", "correlation"}, "clique spec");
      if (!c.contains("clique") || !c.contains("family")) {
        config_error("clique spec needs 'clique' and 'family'");
      }
      CliqueSpec spec;
      if (!c["clique"].is_array() || c["clique"].empty()) {
        config_error("clique must be a non-empty vertex list");
      }
      for (const auto& v : c["clique"]) spec.clique.push_back(static_cast<Vertex>(integer(v, "clique vertex")));
      if (make_set(spec.clique) != spec.clique) {
        config_error("clique keys must be sorted vertex lists without repeats: " +
                     format_set(make_set(spec.clique)));
      }
      if (!c["family"].is_string()) config_error("family must be a string");
      const auto family = c["family"].get<std::string>();
      const std::string where = "clique " + format_set(spec.clique);
      if (family == "husler_reiss") {
        if (!c.contains("variogram") || c.contains("correlation")) {
          config_error(where + ": husler_reiss needs 'variogram' only");
        }
        spec.family = Family::HuslerReiss;
        spec.parameters = square_matrix(c["variogram"], spec.clique.size(), where + " variogram");
      } else if (family == "gaussian") {
        if (!c.contains("correlation") || c.contains("variogram")) {
          config_error(where + ": gaussian needs 'correlation' only");
        }
        spec.family = Family::Gaussian;
        spec.parameters =
            square_matrix(c["correlation"], spec.clique.size(), where + " correlation");
      } else {
        config_error(where + ": unknown family '" + family + "'");
      }
      cfg.cliques.push_back(std::move(spec));
    }
  }
  if (root.contains("correlation")) {
    cfg.correlation = square_matrix(root["correlation"], static_cast<std::size_t>(cfg.vertex_count),
                                    "correlation");
  }
  if (cfg.cliques.empty() == !cfg.correlation.has_value()) {
    config_error("give either 'cliques' or a whole-graph 'correlation', not both or neither");
  }

  if (root.contains("conditioning_vertex")) {
    cfg.conditioning_vertex = static_cast<Vertex>(integer(root["conditioning_vertex"], "conditioning_vertex"));
  }
  if (cfg.conditioning_vertex < 1 || cfg.conditioning_vertex > cfg.vertex_count) {
    config_error("conditioning_vertex must be a vertex of the graph");
  }
  if (root.contains("t_levels")) {
    cfg.t_levels = numbers(root["t_levels"], "t_levels");
    if (cfg.t_levels.empty()) config_error("t_levels is empty");
    for (double t : cfg.t_levels)
      if (!(t > 0.0)) config_error("t_levels must be positive");
  }
  if (root.contains("n")) {
    const auto n = integer(root["n"], "n");
    if (n < 2) config_error("n must be >= 2");
    cfg.n = static_cast<std::size_t>(n);
  }
  if (root.contains("seed")) {
    const auto s = integer(root["seed"], "seed");
    if (s < 0) config_error("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (root.contains("workers")) {
    cfg.workers = static_cast<int>(integer(root["workers"], "workers"));
    if (cfg.workers < 1) config_error("workers must be >= 1");
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) config_error("output_dir must be a string");
    cfg.output_dir = root["output_dir"].get<std::string>();
  }
  if (root.contains("tolerances")) cfg.tolerances = parse_tolerances(root["tolerances"]);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Graph make_graph(const RunConfig& config) {
  try {
    return Graph(config.vertex_count, config.edges);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) config_error(e.what());
    throw;
  }
}

std::vector<CliqueModel> make_models(const RunConfig& config, const CliqueOrdering& ordering) {
  std::vector<CliqueModel> models;
  if (config.correlation) {
    VertexSet all;
    for (int v = 1; v <= config.vertex_count; ++v) all.push_back(v);
    const CorrelationMatrix R(IndexedMatrix(all, *config.correlation));
    for (const auto& c : ordering.cliques) models.emplace_back(GaussianCliqueModel(R.restrict_to(c)));
    return models;
  }
  for (const auto& c : ordering.cliques) {
    int count = 0;
    for (const auto& s : config.cliques) count += s.clique == c;
    if (count != 1) {
      config_error("maximal clique " + format_set(c) + " needs exactly one clique spec, found " +
                   std::to_string(count));
    }
  }
  for (const auto& s : config.cliques) {
    if (std::find(ordering.cliques.begin(), ordering.cliques.end(), s.clique) ==
        ordering.cliques.end()) {
      config_error(format_set(s.clique) + " is not a maximal clique of the graph");
    }
    const IndexedMatrix m(s.clique, s.parameters);
    if (s.family == Family::HuslerReiss) {
      models.emplace_back(HRCliqueModel(VariogramMatrix(m)));
    } else {
      models.emplace_back(GaussianCliqueModel(CorrelationMatrix(m)));
    }
  }
  return models;
}

}  // namespace tailgraph
