#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "tailgraph/clique_model.hpp"
#include "tailgraph/graph.hpp"

namespace tailgraph::testing {

inline Eigen::MatrixXd matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline HRCliqueModel hr(const VertexSet& clique, const Eigen::MatrixXd& gamma) {
  return HRCliqueModel(VariogramMatrix(IndexedMatrix(clique, gamma)));
}

// Bivariate model with variogram entry g.
inline HRCliqueModel hr2(Vertex a, Vertex b, double g) {
  return hr({a, b}, matrix({{0, g}, {g, 0}}));
}

inline GaussianCliqueModel gauss(const VertexSet& clique, const Eigen::MatrixXd& r) {
  return GaussianCliqueModel(CorrelationMatrix(IndexedMatrix(clique, r)));
}

inline GaussianCliqueModel gauss2(Vertex a, Vertex b, double rho) {
  return gauss({a, b}, matrix({{1, rho}, {rho, 1}}));
}

inline Graph path_graph(int d) {
  std::vector<Edge> edges;
  for (int i = 1; i < d; ++i) edges.push_back({i, i + 1});
  return Graph(d, edges);
}

// HR {1,2} with Γ12 = gamma12 and a Gaussian 4-clique on {2,3,4,5}.
inline Graph mixed_graph() {
  return Graph(5, {{1, 2}, {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5}});
}

inline std::vector<CliqueModel> mixed_models(double gamma12 = 1.0) {
  return {hr2(1, 2, gamma12),
          gauss({2, 3, 4, 5}, matrix({{1, .7, .6, .5},
                                      {.7, 1, .5, .4},
                                      {.6, .5, 1, .45},
                                      {.5, .4, .45, 1}}))};
}

// Triangle 1,2,3; apexes 4 and 5; one vertex inside each of the six faces.
inline Graph goldner_harary() {
  std::vector<Edge> edges{{1, 2}, {2, 3}, {1, 3}};
  for (Vertex apex : {4, 5})
    for (Vertex b : {1, 2, 3}) edges.push_back({b, apex});
  const int faces[6][3] = {{4, 1, 2}, {4, 2, 3}, {4, 3, 1}, {5, 1, 2}, {5, 2, 3}, {5, 3, 1}};
  Vertex next = 6;
  for (const auto& f : faces) {
    for (Vertex b : f) edges.push_back({b, next});
    ++next;
  }
  return Graph(11, edges);
}

// Standard normal CDF via erfc, independent of the library implementation.
inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Closed forms for a bivariate Hüsler-Reiss pair with variogram g.
inline double hr2_exponent(double y1, double y2, double g) {
  const double a = std::sqrt(g);
  return phi_cdf(a / 2 + std::log(y2 / y1) / a) / y1 + phi_cdf(a / 2 + std::log(y1 / y2) / a) / y2;
}

inline double hr2_density(double y1, double y2, double g) {
  const double a = std::sqrt(g);
  return phi_pdf(a / 2 + std::log(y2 / y1) / a) / (a * y1 * y1 * y2);
}

inline double to_frechet(double x) { return -1.0 / std::log1p(-std::exp(-x)); }

// P(X_u <= x_u | X_s = x_s) in exponential margins.
inline double hr2_kernel(double x_s, double x_u, double g) {
  const double ys = to_frechet(x_s), yu = to_frechet(x_u);
  const double a = std::sqrt(g);
  return phi_cdf(a / 2 + std::log(yu / ys) / a) * std::exp(1.0 / ys - hr2_exponent(ys, yu, g));
}

// Moments of the Hüsler-Reiss tail model on a block graph built directly:
// each clique adds Z_{C\s} = Z_s + N(-Γ_{C\s,s}/2, Σ^{(s)}) below its
// separator vertex s (or v for the root), with Z_v = 0.  Returned over all
// vertices 1..d; row and column v are zero.
struct BlockMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline BlockMoments hr_block_moments(const CliqueOrdering& o,
                                     const std::vector<HRCliqueModel>& models, Vertex v, int d) {
  BlockMoments m{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  std::vector<bool> placed(d + 1, false);
  placed[v] = true;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const VertexSet& C = o.cliques[i];
    const Vertex s = i == 0 ? v : o.separators[i].at(0);
    const HRCliqueModel* model = nullptr;
    for (const auto& mm : models)
      if (mm.clique() == C) model = &mm;
    const VertexSet rest = set_without(C, s);
    for (Vertex j : rest) {
      m.mean(j - 1) = m.mean(s - 1) - model->variogram()(j, s) / 2;
      for (int u = 1; u <= d; ++u)
        if (placed[u]) m.cov(j - 1, u - 1) = m.cov(u - 1, j - 1) = m.cov(s - 1, u - 1);
    }
    for (Vertex j : rest)
      for (Vertex k : rest) {
        const double sigma =
            (model->variogram()(j, s) + model->variogram()(k, s) - model->variogram()(j, k)) / 2;
        m.cov(j - 1, k - 1) = m.cov(s - 1, s - 1) + sigma;
      }
    for (Vertex j : rest) placed[j] = true;
  }
  return m;
}

}  // namespace tailgraph::testing
