#pragma once

#include <Eigen/Dense>

#include "tailgraph/vertex_set.hpp"

namespace tailgraph {

// Position of v within the sorted set s; throws InvalidArgument when absent.
Eigen::Index position_of(const VertexSet& s, Vertex v);
std::vector<Eigen::Index> positions_of(const VertexSet& s, const VertexSet& subset);

// Real vector labelled by a vertex set.
struct IndexedVector {
  VertexSet index;
  Eigen::VectorXd values;

  IndexedVector() = default;
  IndexedVector(VertexSet idx, Eigen::VectorXd vals);
  static IndexedVector constant(VertexSet idx, double value);

  std::size_t size() const noexcept { return index.size(); }
  double operator()(Vertex v) const { return values(position_of(index, v)); }
  double& operator()(Vertex v) { return values(position_of(index, v)); }
  IndexedVector sub(const VertexSet& subset) const;
};

// Dense matrix whose rows and columns carry vertex labels, so that blocks such
// as Σ_{D,E} can be pulled out by name rather than by offset.
struct IndexedMatrix {
  VertexSet rows;
  VertexSet cols;
  Eigen::MatrixXd values;

  IndexedMatrix() = default;
  IndexedMatrix(VertexSet r, VertexSet c, Eigen::MatrixXd vals);
  IndexedMatrix(VertexSet square, Eigen::MatrixXd vals);
  static IndexedMatrix zero(VertexSet r, VertexSet c);
  static IndexedMatrix identity(VertexSet s);

  double operator()(Vertex i, Vertex j) const {
    return values(position_of(rows, i), position_of(cols, j));
  }
  double& operator()(Vertex i, Vertex j) {
    return values(position_of(rows, i), position_of(cols, j));
  }
  IndexedMatrix block(const VertexSet& r, const VertexSet& c) const;
  IndexedMatrix sub(const VertexSet& s) const { return block(s, s); }
  bool is_square() const { return rows == cols; }
};

IndexedMatrix operator*(const IndexedMatrix& a, const IndexedMatrix& b);
IndexedVector operator*(const IndexedMatrix& a, const IndexedVector& x);

// target += weight * part, where part's labels must be a subset of target's;
// entries outside part's index are left untouched (zero-padded embedding).
void add_into(IndexedMatrix& target, const IndexedMatrix& part, double weight = 1.0);

double max_asymmetry(const Eigen::MatrixXd& m);
bool is_spd(const Eigen::MatrixXd& m, double symmetry_tol = 1e-12);

// Inverse of a symmetric positive definite matrix via Cholesky.  Throws NotSPD
// when asymmetry exceeds symmetry_tol or the factorisation fails.  The result
// is symmetrised.
IndexedMatrix spd_inverse(const IndexedMatrix& m, double symmetry_tol = 1e-12);
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, double symmetry_tol = 1e-12);

struct GaussianLaw {
  IndexedVector mean;
  IndexedMatrix covariance;

  GaussianLaw() = default;
  // Validates labels, symmetry and positive definiteness (NotSPD otherwise).
  GaussianLaw(IndexedVector m, IndexedMatrix cov, double symmetry_tol = 1e-12);

  std::size_t dimension() const noexcept { return mean.size(); }
  const VertexSet& index() const noexcept { return mean.index; }
  GaussianLaw marginal(const VertexSet& subset) const;
};

}  // namespace tailgraph
