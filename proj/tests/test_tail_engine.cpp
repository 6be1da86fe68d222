#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tailgraph/error.hpp"
#include "tailgraph/tail_engine.hpp"

using namespace tailgraph;
using namespace tailgraph::testing;

namespace {

std::vector<CliqueModel> gaussian_chain(double rho, int d) {
  std::vector<CliqueModel> out;
  for (int i = 1; i < d; ++i) out.push_back(gauss2(i, i + 1, rho));
  return out;
}

CorrelationMatrix chain_corr(double rho, int d) {
  Eigen::MatrixXd r(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = std::pow(rho, std::abs(i - j));
  VertexSet idx;
  for (int i = 1; i <= d; ++i) idx.push_back(i);
  return CorrelationMatrix(IndexedMatrix(idx, r));
}

double max_gap(const GaussianLaw& a, const GaussianLaw& b) {
  REQUIRE(a.index() == b.index());
  return std::max((a.mean.values - b.mean.values).cwiseAbs().maxCoeff(),
                  (a.covariance.values - b.covariance.values).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("classifier on the mixed block graph") {
  const Graph g = mixed_graph();
  const auto models = mixed_models();
  const auto ok = classify_norming(clique_ordering(g, 1), models, 1);
  CHECK(ok.theorem_1);
  CHECK_FALSE(ok.clique_index.has_value());

  const auto o3 = clique_ordering(g, 3);
  const auto bad = classify_norming(o3, models, 3);
  CHECK_FALSE(bad.theorem_1);
  CHECK(bad.witness == VertexSet{1, 2});
  REQUIRE(bad.clique_index.has_value());
  CHECK(o3.cliques[*bad.clique_index] == VertexSet{1, 2});
  try {
    build_tail_model(o3, models, 3);
    FAIL("degenerate model built");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NormingIncompatible);
    CHECK(e.witness() == std::vector<int>{1, 2});
  }
  // v = 2 sits in both cliques; every separator norming is then affine.
  CHECK(classify_norming(clique_ordering(g, 2), models, 2).theorem_1);
}

TEST_CASE("mixed families on a non-block graph are rejected") {
  const Graph g(4, {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}});
  const std::vector<CliqueModel> models{
      hr({1, 2, 3}, matrix({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}})),
      gauss({2, 3, 4}, matrix({{1, .5, .5}, {.5, 1, .5}, {.5, .5, 1}}))};
  try {
    classify_norming(clique_ordering(g, 1), models, 1);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedNormingFamily);
  }
}

TEST_CASE("Hüsler-Reiss tail model law equals the closed-form mean and precision") {
  const Graph g(5, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}});
  const std::vector<HRCliqueModel> hr_list{
      hr({1, 2, 3}, matrix({{0, 1.0, 1.5}, {1.0, 0, 1.2}, {1.5, 1.2, 0}})), hr2(3, 4, 0.8),
      hr2(4, 5, 2.0)};
  const std::vector<CliqueModel> models(hr_list.begin(), hr_list.end());
  for (Vertex v : {1, 2, 4}) {
    const auto o = clique_ordering(g, v);
    const auto model = build_tail_model(o, models, v);
    for (Vertex j : model.vertices) {
      CHECK(model.norming(j).alpha == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(model.norming(j).exponent == 0.0);
    }
    const auto law = tail_model_law(model);
    const GaussianLaw ref(tail_model_mean(o, hr_list, v),
                          spd_inverse(tail_model_precision(o, hr_list, v)), 1e-9);
    CHECK(max_gap(law, ref) < 1e-12);
  }
}

TEST_CASE("Gaussian tail model reproduces the whole-graph limit law") {
  SUBCASE("chain") {
    const auto models = gaussian_chain(0.7, 4);
    for (Vertex v : {1, 2, 4}) {
      const auto model = build_tail_model(clique_ordering(path_graph(4), v), models, v);
      CHECK(max_gap(tail_model_law(model), limit_law(chain_corr(0.7, 4), v)) < 1e-12);
      CHECK(model.norming(v == 4 ? 1 : 4).exponent == 0.5);
    }
  }
  SUBCASE("Goldner-Harary") {
    const Graph g = goldner_harary();
    const auto o = clique_ordering(g, 2);
    std::vector<CliqueModel> models;
    std::vector<GaussianCliqueModel> gm;
    for (const auto& c : o.cliques) {
      gm.push_back(gauss(c, Eigen::MatrixXd::Constant(4, 4, 0.5) +
                                0.5 * Eigen::MatrixXd::Identity(4, 4)));
      models.push_back(gm.back());
    }
    const auto completed = markov_completion(o, gm);
    const auto model = build_tail_model(o, models, 2);
    CHECK(max_gap(tail_model_law(model), limit_law(completed, 2)) < 1e-12);
  }
}

TEST_CASE("mixed tail model with v = 1 factorises into the HR and Gaussian blocks") {
  const auto models = mixed_models(1.0);
  const auto model = build_tail_model(clique_ordering(mixed_graph(), 1), models, 1);
  CHECK(model.norming(2).exponent == 0.0);
  CHECK(model.norming(3).alpha == doctest::Approx(0.49));
  CHECK(model.norming(3).exponent == 0.5);
  REQUIRE(model.updates.size() == 2);
  // The Gaussian step ignores Z_2 because Z_2 is O(1) while the block scales as t^{1/2}.
  CHECK(model.updates[1].psi.values.isZero());
  const auto law = tail_model_law(model);
  const auto gauss_block = limit_law(std::get<GaussianCliqueModel>(models[1]).correlation(), 2);
  CHECK(law.mean(2) == doctest::Approx(-0.5));
  CHECK(law.covariance(2, 2) == doctest::Approx(1.0));
  for (Vertex i : {3, 4, 5}) {
    CHECK(law.covariance(2, i) == 0.0);
    for (Vertex j : {3, 4, 5}) CHECK(law.covariance(i, j) == doctest::Approx(gauss_block.covariance(i, j)));
  }
}

TEST_CASE("tail model samples") {
  const auto models = gaussian_chain(0.8, 3);
  const auto model = build_tail_model(clique_ordering(path_graph(3), 1), models, 1);
  const auto a = sample_tail_model(model, 50000, 17, 1);
  const auto b = sample_tail_model(model, 50000, 17, 2);
  CHECK(a.rows == b.rows);
  CHECK(a.meta.route == "tail_model");
  CHECK(a.columns == VertexSet{1, 2, 3});
  CHECK(a.column(1).minCoeff() > 0.0);
  CHECK(std::abs(a.column(1).mean() - 1.0) < 0.02);
  const auto law = tail_model_law(model);
  const Eigen::VectorXd z3 = a.column(3);
  const double var = (z3.array() - z3.mean()).square().mean();
  CHECK(std::abs(var - law.covariance(3, 3)) < 0.03 * law.covariance(3, 3) + 0.005);
}

TEST_CASE("remainders: affine HR normings vanish, Gaussian ones follow the closed form") {
  const std::vector<double> grid{10.0, 100.0, 1000.0};
  SUBCASE("Hüsler-Reiss trivariate chain") {
    const Graph g(4, {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}});
    const std::vector<CliqueModel> models{
        hr({1, 2, 3}, matrix({{0, 1.0, 1.5}, {1.0, 0, 1.2}, {1.5, 1.2, 0}})),
        hr({2, 3, 4}, matrix({{0, 1.2, 0.9}, {1.2, 0, 1.1}, {0.9, 1.1, 0}}))};
    for (const auto& row : verify_remainders(clique_ordering(g, 1), models, 1, grid)) {
      CHECK(row.sup_location < 1e-12);
      CHECK(row.sup_scale < 1e-12);
      CHECK_FALSE(row.degenerate);
    }
  }
  SUBCASE("Gaussian chain") {
    const double rho = 0.8;
    const auto rows = verify_remainders(clique_ordering(path_graph(3), 1), gaussian_chain(rho, 3), 1, grid);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
      // S = {2}, ρ_{2v} = ρ, T = ρ² t + √t z; the separator norming uses |T|.
      //   A = (ρ⁴ t - ρ²|T| + √t ρ² z) / (ρ √|T|),  B = 1 - ρ √t / √|T|.
      double sup_a = 0.0, sup_b = 0.0;
      const double t = row.t, r2 = rho * rho;
      for (int k = 0; k < 13; ++k) {
        const double z = -3.0 + 0.5 * k;
        const double T = std::abs(r2 * t + std::sqrt(t) * z);
        sup_a = std::max(sup_a, std::abs((r2 * r2 * t - r2 * T + std::sqrt(t) * r2 * z) / (rho * std::sqrt(T))));
        sup_b = std::max(sup_b, std::abs(1 - rho * std::sqrt(t) / std::sqrt(T)));
      }
      CHECK(std::abs(row.sup_location - sup_a) < 1e-12 + 1e-9 * sup_a);
      CHECK(row.sup_scale == doctest::Approx(sup_b).epsilon(1e-12));
    }
  }
  SUBCASE("degenerate step is flagged") {
    const auto rows = verify_remainders(clique_ordering(mixed_graph(), 3), mixed_models(), 3, grid);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
      CHECK(row.degenerate);
      CHECK(row.sup_scale == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("tail noise on the mixed block graph") {
  const auto models = mixed_models(1.0);
  const auto o = clique_ordering(mixed_graph(), 3);
  const auto noise = build_tail_noise(o, models, 3);
  REQUIRE(noise.blocks.size() == 2);
  CHECK(noise.blocks[0].anchor == 3);
  CHECK(noise.blocks[0].target == VertexSet{2, 4, 5});
  CHECK(noise.blocks[0].exponent == 0.5);
  CHECK(noise.blocks[1].anchor == 2);
  CHECK(noise.blocks[1].target == VertexSet{1});
  CHECK(noise.blocks[1].exponent == 0.0);
  const auto joint = noise.joint();
  CHECK(joint.mean(1) == doctest::Approx(-0.5));
  CHECK(joint.covariance(1, 1) == doctest::Approx(1.0));
  for (Vertex j : {2, 4, 5}) {
    CHECK(joint.mean(j) == 0.0);
    CHECK(joint.covariance(1, j) == 0.0);
  }
  const auto root = limit_law(std::get<GaussianCliqueModel>(models[1]).correlation(), 3);
  CHECK(joint.covariance(2, 4) == doctest::Approx(root.covariance(2, 4)));

  const auto a = noise.sample(1000, 3, 1), b = noise.sample(1000, 3, 2);
  CHECK(a.rows == b.rows);

  const Graph g4(4, {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}});
  const std::vector<CliqueModel> two_triangles{
      gauss({1, 2, 3}, matrix({{1, .5, .5}, {.5, 1, .5}, {.5, .5, 1}})),
      gauss({2, 3, 4}, matrix({{1, .5, .5}, {.5, 1, .5}, {.5, .5, 1}}))};
  try {
    build_tail_noise(clique_ordering(g4, 1), two_triangles, 1);
    FAIL("non-block graph accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotBlockGraph);
  }
}
