#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "tailgraph/error.hpp"
#include "tailgraph/mc_lab.hpp"
#include "tailgraph/normal.hpp"
#include "tailgraph/random.hpp"

using namespace tailgraph;
using namespace tailgraph::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  long concordant = 0, discordant = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = i + 1; j < x.size(); ++j) {
      const double s = (x(i) - x(j)) * (y(i) - y(j));
      concordant += s > 0;
      discordant += s < 0;
    }
  return double(concordant - discordant) / double(concordant + discordant);
}

double exp_cdf(double x) { return x <= 0 ? 0.0 : 1 - std::exp(-x); }

}  // namespace

TEST_CASE("KS statistics") {
  std::vector<double> grid;
  const int n = 1000;
  for (int i = 0; i < n; ++i) grid.push_back((i + 0.5) / n);
  std::reverse(grid.begin(), grid.end());
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_one_sample(grid, uniform) == doctest::Approx(0.5 / n));
  CHECK(ks_two_sample(grid, grid) == 0.0);
  std::vector<double> shifted = grid;
  for (double& x : shifted) x += 2.0;
  CHECK(ks_two_sample(grid, shifted) == 1.0);
  std::vector<double> half(grid.begin(), grid.begin() + n / 2);  // upper half of (0, 1)
  CHECK(ks_two_sample(grid, half) == doctest::Approx(0.5));
}

TEST_CASE("Gaussian copula simulation: exponential margins and Kendall tau") {
  const double rho = 0.6;
  const std::vector<CliqueModel> models{gauss2(1, 2, rho), gauss2(2, 3, rho)};
  const auto o = clique_ordering(path_graph(3), 1);
  const auto s = simulate_graphical(o, models, 4000, 21);
  CHECK(s.meta.route == "graphical");
  CHECK(s.columns == VertexSet{1, 2, 3});
  for (Vertex v : {1, 2, 3}) {
    const Eigen::VectorXd c = s.column(v);
    CHECK(ks_one_sample(std::span<const double>(c.data(), c.size()), exp_cdf) < 1.63 / std::sqrt(4000.0));
  }
  // Kendall's tau is invariant under the margin transform: (2/π) asin ρ.
  CHECK(std::abs(kendall_tau(s.column(1), s.column(2)) - 2 / M_PI * std::asin(rho)) < 0.03);
  CHECK(std::abs(kendall_tau(s.column(1), s.column(3)) - 2 / M_PI * std::asin(rho * rho)) < 0.03);
}

TEST_CASE("Hüsler-Reiss simulation has exponential margins and the right tail dependence") {
  const std::vector<CliqueModel> models{hr2(1, 2, 1.0)};
  const auto o = clique_ordering(Graph(2, {{1, 2}}), 1);
  const auto s = simulate_graphical(o, models, 20000, 5);
  for (Vertex v : {1, 2}) {
    const Eigen::VectorXd c = s.column(v);
    CHECK(ks_one_sample(std::span<const double>(c.data(), c.size()), exp_cdf) < 1.63 / std::sqrt(20000.0));
  }
  // P(X_1 > x, X_2 > x) for the max-stable law: 1 - 2F + exp(-Λ).
  const double x = 2.0, y = to_frechet(x);
  const double joint = 1 - 2 * (1 - std::exp(-x)) + std::exp(-hr2_exponent(y, y, 1.0));
  double count = 0;
  for (Eigen::Index r = 0; r < s.n(); ++r) count += s.rows(r, 0) > x && s.rows(r, 1) > x;
  const double p = count / s.n();
  CHECK(std::abs(p - joint) < 4 * std::sqrt(joint * (1 - joint) / s.n()));
}

TEST_CASE("larger Hüsler-Reiss cliques are refused") {
  const Eigen::MatrixXd g = Eigen::MatrixXd::Constant(4, 4, 1.0) - Eigen::MatrixXd::Identity(4, 4);
  const std::vector<CliqueModel> models{hr({1, 2, 3, 4}, g)};
  const Graph k4(4, {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
  CHECK(code_of([&] { simulate_graphical(clique_ordering(k4, 1), models, 10, 1); }) ==
        ErrorCode::UnsupportedCliqueShape);
}

TEST_CASE("conditional exceedance") {
  const std::vector<CliqueModel> models{hr2(1, 2, 1.0), hr2(2, 3, 1.0)};
  const auto o = clique_ordering(path_graph(3), 2);
  const double t = 6.0;
  const auto a = conditional_exceedance(o, models, 2, t, 3000, 8);
  SimulationOptions threads;
  threads.workers = 3;
  const auto b = conditional_exceedance(o, models, 2, t, 3000, 8, threads);
  CHECK(a.rows == b.rows);
  CHECK(a.meta.route == "conditional");
  CHECK(a.meta.t_level == t);
  CHECK(a.meta.conditioning_vertex == 2);
  const Eigen::VectorXd xv = a.column(2);
  CHECK(xv.minCoeff() > t);
  CHECK(std::abs(xv.mean() - t - 1.0) < 0.08);
  // v must lie in the root clique.
  CHECK(code_of([&] { conditional_exceedance(clique_ordering(path_graph(3), 1), models, 3, t, 10, 1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("renormalize") {
  SampleMatrix s;
  s.columns = {1, 2, 3};
  s.rows = matrix({{9.0, 4.0, 1.0}, {10.0, 2.0, 0.5}});
  s.meta.t_level = 8.0;
  s.meta.conditioning_vertex = 1;
  const std::vector<NormingSpec> identity{{2, 1, 0.0, 0.0}, {3, 1, 0.0, 0.0}};
  const auto r = renormalize(s, identity, RenormalizeMode::ConditionOnRoot);
  CHECK(r.rows(0, 0) == 1.0);
  CHECK(r.rows(1, 0) == 2.0);
  CHECK(r.rows.rightCols(2) == s.rows.rightCols(2));
  CHECK(r.meta.margins == "renormalized");

  const std::vector<NormingSpec> specs{{2, 1, 0.25, 0.5}, {3, 2, 1.0, 0.0}};
  const auto q = renormalize(s, specs, RenormalizeMode::SeparatorBased);
  CHECK(q.rows(0, 1) == doctest::Approx((4.0 - 0.25 * 9.0) / 3.0));
  CHECK(q.rows(1, 2) == doctest::Approx(0.5 - 2.0));

  CHECK(code_of([&] { renormalize(s, std::vector<NormingSpec>{{2, 1, 0, 0}}, RenormalizeMode::ConditionOnRoot); }) ==
        ErrorCode::MissingNorming);
  CHECK(code_of([&] { renormalize(s, specs, RenormalizeMode::ConditionOnRoot); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("chi estimator") {
  SampleMatrix s;
  s.columns = {1, 2};
  const int n = 10000;
  s.rows.resize(n, 2);
  RandomStream rng(3, 0);
  for (int i = 0; i < n; ++i) {
    s.rows(i, 0) = rng.exponential();
    s.rows(i, 1) = 2 * s.rows(i, 0) + 1;  // comonotone
  }
  CHECK(chi_estimator(s, {1, 2}, 0.99) == doctest::Approx(1.0));
  CHECK(chi_estimator(s, {1}, 0.9) == doctest::Approx(1.0));
  for (int i = 0; i < n; ++i) s.rows(i, 1) = -s.rows(i, 0);  // countermonotone
  CHECK(chi_estimator(s, {1, 2}, 0.9) == 0.0);
  CHECK(code_of([&] { chi_estimator(s, {}, 0.9); }) == ErrorCode::EmptySubset);
  CHECK(code_of([&] { chi_estimator(s, {1, 2}, 1.0); }) == ErrorCode::QuantileOutOfRange);
  CHECK(code_of([&] { chi_estimator(s, {1, 2}, -0.1); }) == ErrorCode::QuantileOutOfRange);
}

TEST_CASE("factorised density on a chain equals the product of bivariate densities") {
  const auto o = clique_ordering(path_graph(3), 1);
  const std::vector<HRCliqueModel> models{hr2(1, 2, 1.0), hr2(2, 3, 2.0)};
  const double y1 = 0.8, y2 = 1.3, y3 = 2.1;
  const double expected = hr2_density(y1, y2, 1.0) * hr2_density(y2, y3, 2.0) * y2 * y2;
  const double got = factorized_density(o, models, IndexedVector({1, 2, 3}, Eigen::Vector3d(y1, y2, y3)));
  CHECK(got == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("MRV checks pass on a compatible block model") {
  const Graph g(4, {{1, 2}, {1, 3}, {2, 3}, {3, 4}});
  const std::vector<HRCliqueModel> models{
      hr({1, 2, 3}, matrix({{0, 1.0, 1.5}, {1.0, 0, 1.2}, {1.5, 1.2, 0}})), hr2(3, 4, 0.7)};
  const auto report = mrv_checks(clique_ordering(g, 1), models);
  CHECK(report.homogeneity_error < 1e-4);
  CHECK(report.compatibility_pass);
  CHECK(report.density_at_one > 0.0);
  CHECK(report.pass());
}

TEST_CASE("convergence study on the Hüsler-Reiss chain") {
  const std::vector<CliqueModel> models{hr2(1, 2, 1.0), hr2(2, 3, 1.0)};
  StudyOptions opts;
  opts.n = 20000;
  opts.t_levels = {6.0, 10.0};
  opts.seed = 4;
  const auto report = convergence_study(clique_ordering(path_graph(3), 1), models, 1, opts);
  CHECK(report.route == "theorem_1");
  CHECK(report.ks.size() == 6);
  for (const auto& row : report.ks) CHECK(row.ks < 0.05);
  CHECK(report.pass);
}
