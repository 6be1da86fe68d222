#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tailgraph/commands.hpp"
#include "tailgraph/config.hpp"
#include "tailgraph/error.hpp"
#include "tailgraph/mc_lab.hpp"
#include "tailgraph/normal.hpp"
#include "tailgraph/tail_engine.hpp"

namespace py = pybind11;
using namespace tailgraph;

namespace {

VertexSet labels(Eigen::Index k) {
  VertexSet s(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = static_cast<Vertex>(i + 1);
  return s;
}

py::dict ordering_dict(const CliqueOrdering& o) {
  py::dict d;
  d["cliques"] = o.cliques;
  d["separators"] = o.separators;
  d["parents"] = o.parents;
  return d;
}

struct Prepared {
  RunConfig config;
  CliqueOrdering ordering;
  std::vector<CliqueModel> models;
};

Prepared prepare(const std::string& text) {
  Prepared p{parse_config(text), {}, {}};
  const Graph g = make_graph(p.config);
  validate_chordal(g);
  p.ordering = clique_ordering(g, p.config.conditioning_vertex);
  p.models = make_models(p.config, p.ordering);
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tail graphical models for decomposable extremal graphs";

  // Leaked on purpose: the translator may run during interpreter shutdown.
  static auto* error_type = new py::exception<Error>(m, "TailgraphError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = static_cast<const py::object&>(*error_type)(e.what());
      exc.attr("code") = to_string(e.code());
      exc.attr("witness") = e.witness();
      PyErr_SetObject(error_type->ptr(), exc.ptr());
    }
  });

  m.def("validate_chordal", [](int vertices, std::vector<Edge> edges) {
    return validate_chordal(Graph(vertices, std::move(edges)));
  }, py::arg("vertices"), py::arg("edges"), "Perfect elimination ordering; raises on non-chordal input.");

  m.def("clique_ordering", [](int vertices, std::vector<Edge> edges, Vertex root) {
    const Graph g(vertices, std::move(edges));
    validate_chordal(g);
    return ordering_dict(clique_ordering(g, root));
  }, py::arg("vertices"), py::arg("edges"), py::arg("root"));

  m.def("normal_cdf", &normal_cdf);
  m.def("normal_quantile", &normal_quantile);
  m.def("bivariate_normal_cdf", &bivariate_normal_cdf, py::arg("h"), py::arg("k"), py::arg("r"));
  m.def("mvn_cdf", [](const Eigen::VectorXd& upper, const Eigen::VectorXd& mean,
                      const Eigen::MatrixXd& cov, double accuracy) {
    MvnOptions opts;
    opts.accuracy = accuracy;
    const auto e = mvn_cdf(upper, mean, cov, opts);
    return py::make_tuple(e.value, e.error);
  }, py::arg("upper"), py::arg("mean"), py::arg("cov"), py::arg("accuracy") = 1e-6);

  // Hüsler-Reiss helpers take a variogram over vertices 1..k.
  m.def("hr_exponent_measure", [](const Eigen::MatrixXd& gamma, const Eigen::VectorXd& y) {
    const VertexSet idx = labels(gamma.rows());
    const auto e = exponent_measure(HRCliqueModel(VariogramMatrix(IndexedMatrix(idx, gamma))),
                                    IndexedVector(idx, y));
    return py::make_tuple(e.value, e.error);
  }, py::arg("gamma"), py::arg("y"));

  m.def("hr_transition_kernel", [](const Eigen::MatrixXd& gamma, VertexSet S,
                                   const Eigen::VectorXd& x_S, const Eigen::VectorXd& x_rest) {
    const VertexSet idx = labels(gamma.rows());
    S = make_set(S);
    return transition_kernel(HRCliqueModel(VariogramMatrix(IndexedMatrix(idx, gamma))), S,
                             IndexedVector(S, x_S), IndexedVector(set_difference(idx, S), x_rest));
  }, py::arg("gamma"), py::arg("separator"), py::arg("x_separator"), py::arg("x_rest"),
     "P(X_rest <= x_rest | X_S = x_S) in exponential margins; labels are 1-based.");

  m.def("gaussian_limit_law", [](const Eigen::MatrixXd& r, Vertex v) {
    const CorrelationMatrix R(IndexedMatrix(labels(r.rows()), r));
    const auto law = limit_law(R, v);
    return py::make_tuple(law.index(), law.mean.values, law.covariance.values,
                          limit_precision(R, v).values);
  }, py::arg("correlation"), py::arg("v"), "(index, mean, covariance, precision) of the limit given X_v large.");

  // Config-driven entry points use the same JSON schema as the CLI.
  m.def("graph_document", [](const std::string& text) { return graph_document(parse_config(text)); });
  m.def("derive_document", [](const std::string& text) { return derive_document(parse_config(text)); });

  m.def("tail_model_law", [](const std::string& text) {
    const auto p = prepare(text);
    const auto model = build_tail_model(p.ordering, p.models, p.config.conditioning_vertex);
    const auto law = tail_model_law(model);
    return py::make_tuple(law.index(), law.mean.values, law.covariance.values);
  }, py::arg("config"));

  m.def("conditional_sample", [](const std::string& text, double t, std::size_t n,
                                 std::uint64_t seed, bool renormalised) {
    const auto p = prepare(text);
    const Vertex v = p.config.conditioning_vertex;
    SimulationOptions opts;
    opts.workers = p.config.workers;
    SampleMatrix s = conditional_exceedance(p.ordering, p.models, v, t, n, seed, opts);
    if (renormalised) {
      if (classify_norming(p.ordering, p.models, v).theorem_1) {
        s = renormalize(s, root_norming_specs(build_tail_model(p.ordering, p.models, v)),
                        RenormalizeMode::ConditionOnRoot);
      } else {
        s = renormalize(s, separator_norming_specs(build_tail_noise(p.ordering, p.models, v)),
                        RenormalizeMode::SeparatorBased);
      }
    }
    return py::make_tuple(s.columns, s.rows);
  }, py::arg("config"), py::arg("t"), py::arg("n"), py::arg("seed"), py::arg("renormalize") = true);

  m.def("chi_estimator", [](const Eigen::MatrixXd& rows, VertexSet columns, VertexSet subset, double q) {
    SampleMatrix s;
    s.columns = std::move(columns);
    s.rows = rows;
    return chi_estimator(s, make_set(subset), q);
  }, py::arg("rows"), py::arg("columns"), py::arg("subset"), py::arg("q"));

  m.def("run", [](const std::string& command, const std::filesystem::path& config,
                  std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed,
                  std::optional<std::size_t> n, std::optional<std::vector<double>> t_levels,
                  std::optional<int> workers) {
    RunOverrides o{out, seed, n, t_levels, workers};
    std::ostringstream stdout_text, stderr_text;
    const int code = run_command(command, config, o, stdout_text, stderr_text);
    return py::make_tuple(code, stdout_text.str());
  }, py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
     py::arg("n") = py::none(), py::arg("t_levels") = py::none(), py::arg("workers") = py::none(),
     "Runs a CLI command in-process; returns (exit_code, stdout).");
}
