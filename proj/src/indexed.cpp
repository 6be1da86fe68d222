#include "tailgraph/indexed.hpp"

#include <cmath>
#include <string>

#include "tailgraph/error.hpp"

namespace tailgraph {

Eigen::Index position_of(const VertexSet& s, Vertex v) {
  auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it == s.end() || *it != v) {
    throw Error(ErrorCode::InvalidArgument,
                "vertex " + std::to_string(v) + " not in index " + format_set(s));
  }
  return static_cast<Eigen::Index>(it - s.begin());
}

std::vector<Eigen::Index> positions_of(const VertexSet& s, const VertexSet& subset) {
  std::vector<Eigen::Index> out;
  out.reserve(subset.size());
  for (Vertex v : subset) out.push_back(position_of(s, v));
  return out;
}

IndexedVector::IndexedVector(VertexSet idx, Eigen::VectorXd vals)
    : index(std::move(idx)), values(std::move(vals)) {
  if (static_cast<Eigen::Index>(index.size()) != values.size()) {
    throw Error(ErrorCode::InvalidArgument, "vector length does not match index");
  }
}

IndexedVector IndexedVector::constant(VertexSet idx, double value) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  return IndexedVector(std::move(idx), Eigen::VectorXd::Constant(n, value));
}

IndexedVector IndexedVector::sub(const VertexSet& subset) const {
  return IndexedVector(subset, values(positions_of(index, subset)));
}

IndexedMatrix::IndexedMatrix(VertexSet r, VertexSet c, Eigen::MatrixXd vals)
    : rows(std::move(r)), cols(std::move(c)), values(std::move(vals)) {
  if (static_cast<Eigen::Index>(rows.size()) != values.rows() ||
      static_cast<Eigen::Index>(cols.size()) != values.cols()) {
    throw Error(ErrorCode::InvalidArgument, "matrix shape does not match index");
  }
}

IndexedMatrix::IndexedMatrix(VertexSet square, Eigen::MatrixXd vals)
    : IndexedMatrix(square, square, std::move(vals)) {}

IndexedMatrix IndexedMatrix::zero(VertexSet r, VertexSet c) {
  const auto nr = static_cast<Eigen::Index>(r.size());
  const auto nc = static_cast<Eigen::Index>(c.size());
  return IndexedMatrix(std::move(r), std::move(c), Eigen::MatrixXd::Zero(nr, nc));
}

IndexedMatrix IndexedMatrix::identity(VertexSet s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  return IndexedMatrix(std::move(s), Eigen::MatrixXd::Identity(n, n));
}

IndexedMatrix IndexedMatrix::block(const VertexSet& r, const VertexSet& c) const {
  return IndexedMatrix(r, c, values(positions_of(rows, r), positions_of(cols, c)));
}

IndexedMatrix operator*(const IndexedMatrix& a, const IndexedMatrix& b) {
  if (a.cols != b.rows) {
    throw Error(ErrorCode::InvalidArgument, "inner index mismatch in product");
  }
  return IndexedMatrix(a.rows, b.cols, a.values * b.values);
}

IndexedVector operator*(const IndexedMatrix& a, const IndexedVector& x) {
  if (a.cols != x.index) {
    throw Error(ErrorCode::InvalidArgument, "inner index mismatch in product");
  }
  return IndexedVector(a.rows, a.values * x.values);
}

void add_into(IndexedMatrix& target, const IndexedMatrix& part, double weight) {
  auto r = positions_of(target.rows, part.rows);
  auto c = positions_of(target.cols, part.cols);
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j)
      target.values(r[i], c[j]) += weight * part.values(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j));
}

double max_asymmetry(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

bool is_spd(const Eigen::MatrixXd& m, double symmetry_tol) {
  if (m.rows() != m.cols() || max_asymmetry(m) > symmetry_tol) return false;
  if (m.size() == 0) return true;
  if (!m.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, double symmetry_tol) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotSPD, "matrix is not square");
  const double asym = max_asymmetry(m);
  if (asym > symmetry_tol) {
    throw Error(ErrorCode::NotSPD,
                "matrix asymmetric by " + std::to_string(asym));
  }
  if (m.size() == 0) return m;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success || !m.allFinite()) {
    throw Error(ErrorCode::NotSPD, "Cholesky factorisation failed");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

IndexedMatrix spd_inverse(const IndexedMatrix& m, double symmetry_tol) {
  if (!m.is_square()) throw Error(ErrorCode::NotSPD, "matrix index is not square");
  return IndexedMatrix(m.rows, spd_inverse(m.values, symmetry_tol));
}

GaussianLaw::GaussianLaw(IndexedVector m, IndexedMatrix cov, double symmetry_tol)
    : mean(std::move(m)), covariance(std::move(cov)) {
  if (covariance.rows != mean.index || covariance.cols != mean.index) {
    throw Error(ErrorCode::InvalidArgument, "mean and covariance labels differ");
  }
  if (!is_spd(covariance.values, symmetry_tol)) {
    throw Error(ErrorCode::NotSPD, "covariance over " + format_set(mean.index) +
                                       " is not symmetric positive definite");
  }
}

GaussianLaw GaussianLaw::marginal(const VertexSet& subset) const {
  return GaussianLaw(mean.sub(subset), covariance.sub(subset));
}

}  // namespace tailgraph
