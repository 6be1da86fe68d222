#include "tailgraph/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "tailgraph/error.hpp"
#include "tailgraph/mc_lab.hpp"
#include "tailgraph/tail_engine.hpp"

namespace tailgraph {

namespace {

using json = nlohmann::ordered_json;

constexpr double kProbeLevel = 20.0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

json to_json(const VertexSet& s) { return json(std::vector<int>(s.begin(), s.end())); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const IndexedMatrix& m) {
  return {{"rows", to_json(m.rows)}, {"cols", to_json(m.cols)}, {"values", to_json(m.values)}};
}

json to_json(const IndexedVector& v) {
  return {{"index", to_json(v.index)},
          {"values", std::vector<double>(v.values.data(), v.values.data() + v.values.size())}};
}

json to_json(const GaussianLaw& law) {
  return {{"index", to_json(law.index())},
          {"mean", std::vector<double>(law.mean.values.data(),
                                       law.mean.values.data() + law.mean.values.size())},
          {"covariance", to_json(law.covariance.values)}};
}

json header(const RunConfig& config) {
  return {{"config_hash", config.hash}, {"seed", config.seed}, {"name", config.name}};
}

json ordering_json(const CliqueOrdering& ordering) {
  json cliques = json::array(), separators = json::array();
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    cliques.push_back(to_json(ordering.cliques[i]));
    separators.push_back(to_json(ordering.separators[i]));
  }
  return {{"cliques", cliques}, {"separators", separators}, {"parents", ordering.parents}};
}

struct Prepared {
  Graph graph;
  CliqueOrdering ordering;
  std::vector<CliqueModel> models;
};

Prepared prepare(const RunConfig& config) {
  Graph graph = make_graph(config);
  validate_chordal(graph);
  CliqueOrdering ordering = clique_ordering(graph, config.conditioning_vertex);
  auto models = make_models(config, ordering);
  return {std::move(graph), std::move(ordering), std::move(models)};
}

SimulationOptions simulation_options(const RunConfig& config) {
  SimulationOptions sim;
  sim.workers = config.workers;
  sim.fd.step = config.tolerances.fd_step;
  sim.mvn.accuracy = config.tolerances.mvn_accuracy;
  return sim;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

std::string csv_preamble(const RunConfig& config) {
  return "# config_hash=" + config.hash + " seed=" + std::to_string(config.seed) + "\n";
}

}  // namespace

void apply_overrides(RunConfig& config, const RunOverrides& o) {
  if (o.out) config.output_dir = o.out->string();
  if (o.seed) config.seed = *o.seed;
  if (o.n) {
    if (*o.n < 2) throw Error(ErrorCode::ConfigError, "--n must be >= 2");
    config.n = *o.n;
  }
  if (o.t_levels) {
    if (o.t_levels->empty()) throw Error(ErrorCode::ConfigError, "--t-levels is empty");
    for (double t : *o.t_levels)
      if (!(t > 0.0)) throw Error(ErrorCode::ConfigError, "--t-levels must be positive");
    config.t_levels = *o.t_levels;
  }
  if (o.workers) {
    if (*o.workers < 1) throw Error(ErrorCode::ConfigError, "--workers must be >= 1");
    config.workers = *o.workers;
  }
}

std::string graph_document(const RunConfig& config) {
  const Graph graph = make_graph(config);
  const auto peo = validate_chordal(graph);
  const auto ordering = clique_ordering(graph, config.conditioning_vertex);
  const auto tree = junction_tree(ordering);
  json edges = json::array();
  for (std::size_t k = 0; k < tree.tree_edges.size(); ++k) {
    edges.push_back({{"parent", tree.tree_edges[k].first},
                     {"child", tree.tree_edges[k].second},
                     {"separator", to_json(tree.edge_labels[k])}});
  }
  json doc = header(config);
  doc["chordal"] = true;
  doc["connected"] = true;
  doc["vertices"] = graph.vertex_count();
  doc["perfect_elimination_order"] = peo;
  doc["root_vertex"] = config.conditioning_vertex;
  doc["ordering"] = ordering_json(ordering);
  json nodes = json::array();
  for (const auto& n : tree.nodes) nodes.push_back(to_json(n));
  doc["junction_tree"] = {{"nodes", nodes}, {"edges", edges}};
  doc["block_graph"] = is_block_graph(ordering);
  return doc.dump(2) + "\n";
}

std::string derive_document(const RunConfig& config) {
  const auto p = prepare(config);
  const Vertex v = config.conditioning_vertex;
  const auto verdict = classify_norming(p.ordering, p.models, v);
  const auto model = derive_updates(p.ordering, p.models, v);

  json doc = header(config);
  doc["conditioning_vertex"] = v;
  doc["ordering"] = ordering_json(p.ordering);
  doc["block_graph"] = is_block_graph(p.ordering);
  json families = json::array();
  for (const auto& m : p.models)
    families.push_back({{"clique", to_json(clique_of(m))}, {"family", family_name(family_of(m))}});
  doc["families"] = families;
  json vj = {{"route", verdict.theorem_1 ? "theorem_1" : "tail_noise_required"}};
  if (!verdict.theorem_1) {
    vj["witness"] = to_json(verdict.witness);
    vj["reason"] = verdict.reason;
  }
  doc["verdict"] = vj;

  json normings = json::array();
  for (std::size_t k = 0; k < model.vertices.size(); ++k) {
    normings.push_back({{"vertex", model.vertices[k]},
                        {"alpha", model.normings[k].alpha},
                        {"exponent", model.normings[k].exponent}});
  }
  doc["normings"] = normings;
  json updates = json::array();
  for (const auto& u : model.updates) {
    updates.push_back({{"clique", to_json(u.clique)},
                       {"separator", to_json(u.separator)},
                       {"family", family_name(u.family)},
                       {"psi", to_json(u.psi)},
                       {"phi", to_json(u.phi)},
                       {"noise", to_json(u.noise)},
                       {"degenerate", u.degenerate}});
  }
  doc["updates"] = updates;

  if (verdict.theorem_1) {
    doc["limit_law"] = to_json(tail_model_law(model));
  }
  if (all_of_family(p.models, Family::HuslerReiss)) {
    const auto hr = hr_models(p.models);
    doc["husler_reiss"] = {{"mean", to_json(tail_model_mean(p.ordering, hr, v))},
                           {"precision", to_json(tail_model_precision(p.ordering, hr, v))}};
  }
  if (all_of_family(p.models, Family::Gaussian)) {
    const auto g = gaussian_models(p.models);
    const auto R = markov_completion(p.ordering, g);
    doc["gaussian"] = {{"correlation", to_json(R.matrix())},
                       {"limit_law", to_json(limit_law(R, v))},
                       {"limit_precision", to_json(limit_precision(R, v))}};
  }
  if (!verdict.theorem_1 && is_block_graph(p.ordering)) {
    const auto noise = build_tail_noise(p.ordering, p.models, v);
    json blocks = json::array();
    for (const auto& b : noise.blocks) {
      blocks.push_back({{"clique", to_json(b.clique)},
                        {"anchor", b.anchor},
                        {"family", family_name(b.family)},
                        {"alpha", to_json(b.alpha)},
                        {"exponent", b.exponent},
                        {"law", to_json(b.law)}});
    }
    doc["tail_noise"] = {{"blocks", blocks}, {"joint", to_json(noise.joint())}};
  }

  json probes = json::array();
  FiniteDifference fd;
  fd.step = config.tolerances.fd_step;
  for (std::size_t i = 0; i < p.ordering.size(); ++i) {
    const auto& m = model_for(p.models, p.ordering.cliques[i]);
    if (family_of(m) != Family::HuslerReiss || clique_of(m).size() != 2) continue;
    const Vertex anchor = i == 0 ? v : p.ordering.separators[i].front();
    const auto probe = probe_bivariate_convention(std::get<HRCliqueModel>(m), anchor,
                                                  kProbeLevel, fd);
    probes.push_back({{"clique", to_json(clique_of(m))},
                      {"anchor", anchor},
                      {"t", kProbeLevel},
                      {"half_discrepancy", probe.half_discrepancy},
                      {"full_discrepancy", probe.full_discrepancy},
                      {"matched", probe.matched}});
  }
  doc["convention_probe"] = probes;
  return doc.dump(2) + "\n";
}

bool run_verify(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
  const auto p = prepare(config);
  const Vertex v = config.conditioning_vertex;
  const auto& tol = config.tolerances;
  json summary = header(config);
  bool pass = true;

  StudyOptions study;
  study.t_levels = config.t_levels;
  study.n = config.n;
  study.seed = config.seed;
  study.ks_max = tol.ks_max;
  study.trend_slack = tol.trend_slack;
  study.ks_constant = tol.ks_constant;
  study.simulation = simulation_options(config);
  const auto report = convergence_study(p.ordering, p.models, v, study);

  std::string ks = csv_preamble(config) + "t,vertex,ks,n,threshold,pass\n";
  for (const auto& r : report.ks) {
    ks += num(r.t) + "," + std::to_string(r.vertex) + "," + num(r.ks) + "," +
          std::to_string(r.n) + "," + num(r.threshold) + "," + (r.pass ? "1" : "0") + "\n";
  }
  write_file(out / "ks.csv", ks);
  std::string moments = csv_preamble(config) + "t,mean_discrepancy,covariance_discrepancy\n";
  std::string gaps = csv_preamble(config) + "t,row,col,empirical_minus_limit\n";
  for (const auto& m : report.moments) {
    moments += num(m.t) + "," + num(m.mean_discrepancy) + "," + num(m.covariance_discrepancy) + "\n";
    for (Vertex i : m.covariance_gap.rows)
      for (Vertex j : m.covariance_gap.cols)
        gaps += num(m.t) + "," + std::to_string(i) + "," + std::to_string(j) + "," +
                num(m.covariance_gap(i, j)) + "\n";
  }
  write_file(out / "moments.csv", moments);
  write_file(out / "covariance_gap.csv", gaps);
  log << "convergence (" << report.route << "): ks " << (report.pass ? "pass" : "FAIL")
      << ", trend " << (report.trend_pass ? "pass" : "FAIL") << "\n";
  summary["route"] = report.route;
  summary["convergence_pass"] = report.pass;
  summary["trend_pass"] = report.trend_pass;
  pass = pass && report.pass;

  if (report.route == "theorem_1" && p.ordering.size() > 1) {
    const auto rows = verify_remainders(p.ordering, p.models, v, tol.remainder_t_grid,
                                        tol.remainder_z_max);
    const double t_last = tol.remainder_t_grid.back();
    std::string csv = csv_preamble(config) +
                      "clique,separator,t,sup_location,sup_scale,degenerate,threshold,pass\n";
    bool rem_pass = true;
    for (const auto& r : rows) {
      const bool ok = r.t != t_last ||
                      (!r.degenerate && r.sup_location < tol.remainder_tol &&
                       r.sup_scale < tol.remainder_tol);
      rem_pass = rem_pass && ok;
      csv += "\"" + format_set(r.clique) + "\",\"" + format_set(r.separator) + "\"," + num(r.t) +
             "," + num(r.sup_location) + "," + num(r.sup_scale) + "," +
             (r.degenerate ? "1" : "0") + "," + num(tol.remainder_tol) + "," + (ok ? "1" : "0") +
             "\n";
    }
    write_file(out / "remainders.csv", csv);
    log << "remainders at t=" << num(t_last) << ": " << (rem_pass ? "pass" : "FAIL") << "\n";
    summary["remainder_pass"] = rem_pass;
    pass = pass && rem_pass;
  }

  if (all_of_family(p.models, Family::HuslerReiss)) {
    MrvOptions mo;
    mo.seed = config.seed;
    mo.homogeneity_tol = tol.homogeneity_tol;
    mo.fd.step = tol.fd_step;
    mo.mvn.accuracy = tol.mvn_accuracy;
    const auto mrv = mrv_checks(p.ordering, hr_models(p.models), mo);
    std::string csv = csv_preamble(config) + "check,value,threshold,pass\n";
    csv += "homogeneity," + num(mrv.homogeneity_error) + "," + num(tol.homogeneity_tol) + "," +
           (mrv.homogeneity_pass ? "1" : "0") + "\n";
    csv += "compatibility," + num(mrv.compatibility_gap) + "," + num(mrv.compatibility_allowance) +
           "," + (mrv.compatibility_pass ? "1" : "0") + "\n";
    csv += "density_at_one," + num(mrv.density_at_one) + ",0," + (mrv.density_pass ? "1" : "0") +
           "\n";
    write_file(out / "mrv.csv", csv);
    log << "mrv checks: " << (mrv.pass() ? "pass" : "FAIL") << "\n";
    summary["mrv_pass"] = mrv.pass();
    pass = pass && mrv.pass();
  }

  summary["pass"] = pass;
  write_file(out / "verify_summary.json", summary.dump(2) + "\n");
  return pass;
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(config_path);
    apply_overrides(config, overrides);
    const std::filesystem::path dir = config.output_dir;
    if (command == "graph") {
      const auto doc = graph_document(config);
      write_file(dir / "junction_tree.json", doc);
      out << doc;
      return kExitOk;
    }
    if (command == "derive") {
      const auto doc = derive_document(config);
      write_file(dir / "tail_model.json", doc);
      out << doc;
      return kExitOk;
    }
    if (command == "verify") {
      const bool ok = run_verify(config, dir, out);
      out << (ok ? "verify: pass" : "verify: FAIL") << "\n";
      return ok ? kExitOk : kExitVerification;
    }
    throw Error(ErrorCode::ConfigError, "unknown command '" + command + "'");
  } catch (const Error& e) {
    json doc = {{"config_hash", config.hash},
                {"seed", config.seed},
                {"error", to_string(e.code())},
                {"message", e.what()},
                {"witness", e.witness()}};
    out << doc.dump(2) << "\n";
    err << e.what() << "\n";
    if (!config.hash.empty()) {
      try {
        write_file(std::filesystem::path(config.output_dir) / "error.json", doc.dump(2) + "\n");
      } catch (const Error&) {
      }
    }
    return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitPrecondition;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitPrecondition;
  }
}

}  // namespace tailgraph
