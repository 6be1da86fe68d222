#include "tailgraph/gaussian_copula.hpp"

#include <cmath>
#include <string>

#include "tailgraph/error.hpp"

namespace tailgraph {

CorrelationMatrix::CorrelationMatrix(IndexedMatrix r, double tolerance)
    : r_(std::move(r)) {
  if (!r_.is_square() || r_.rows.empty() || make_set(r_.rows) != r_.rows) {
    throw Error(ErrorCode::InvalidArgument,
                "correlation matrix must be square with a sorted index");
  }
  const auto& m = r_.values;
  if (!m.allFinite() || max_asymmetry(m) > tolerance) {
    throw Error(ErrorCode::NotSPD, "correlation matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::fabs(m(i, i) - 1.0) > tolerance) {
      throw Error(ErrorCode::InvalidArgument, "correlation diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && !(m(i, j) > 0.0 && m(i, j) < 1.0)) {
        throw Error(ErrorCode::DegenerateCorrelation,
                    "correlation between " + std::to_string(r_.rows[i]) + " and " +
                        std::to_string(r_.rows[j]) + " must lie in (0, 1)",
                    {r_.rows[i], r_.rows[j]});
      }
    }
  }
  r_.values = 0.5 * (m + m.transpose());
  r_.values.diagonal().setOnes();
  q_ = spd_inverse(r_, tolerance);
}

CorrelationMatrix CorrelationMatrix::restrict_to(const VertexSet& subset) const {
  return CorrelationMatrix(r_.sub(subset));
}

RootNormingResult root_norming(const CorrelationMatrix& r, Vertex v) {
  if (!contains(r.index(), v)) {
    throw Error(ErrorCode::InvalidArgument,
                "vertex " + std::to_string(v) + " not in " + format_set(r.index()));
  }
  const VertexSet rest = set_without(r.index(), v);
  IndexedVector alpha = IndexedVector::constant(rest, 0.0);
  IndexedMatrix cov = IndexedMatrix::zero(rest, rest);
  for (Vertex i : rest) {
    alpha(i) = r(i, v) * r(i, v);
    for (Vertex j : rest) cov(i, j) = 2.0 * r(i, v) * r(j, v) * (r(i, j) - r(i, v) * r(j, v));
  }
  return {RootNorming{v, alpha},
          GaussianLaw(IndexedVector::constant(rest, 0.0), cov, 1e-10)};
}

IndexedVector SeparatorNorming::location(const IndexedVector& x_S) const {
  const IndexedVector s = scale(x_S);
  return IndexedVector(s.index, s.values.array().square().matrix());
}

IndexedVector SeparatorNorming::scale(const IndexedVector& x_S) const {
  if (x_S.index != separator) {
    throw Error(ErrorCode::InvalidArgument, "separator point has wrong labels");
  }
  const Eigen::VectorXd root = x_S.values.array().abs().sqrt().matrix();
  return IndexedVector(target, (regression.values * root).cwiseAbs());
}

IndexedMatrix SeparatorNorming::jacobian(const IndexedVector& alpha_S) const {
  if (alpha_S.index != separator) {
    throw Error(ErrorCode::InvalidArgument, "separator point has wrong labels");
  }
  const Eigen::VectorXd root = alpha_S.values.array().sqrt().matrix();
  const Eigen::VectorXd level = regression.values * root;
  Eigen::MatrixXd J = regression.values;
  for (Eigen::Index c = 0; c < J.rows(); ++c)
    for (Eigen::Index s = 0; s < J.cols(); ++s) J(c, s) *= level(c) / root(s);
  return IndexedMatrix(target, separator, J);
}

SeparatorNorming separator_norming(const CorrelationMatrix& clique_r,
                                   const VertexSet& S) {
  const auto& C = clique_r.index();
  if (S.empty() || !is_subset(S, C) || S == C) {
    throw Error(ErrorCode::InvalidArgument,
                "separator " + format_set(S) + " must be a non-empty proper subset of " +
                    format_set(C));
  }
  const VertexSet D = set_difference(C, S);
  const auto& Q = clique_r.precision();
  const Eigen::MatrixXd QD_inv = spd_inverse(Q.sub(D).values, 1e-10);
  SeparatorNorming out;
  out.separator = S;
  out.target = D;
  out.regression = IndexedMatrix(D, S, -QD_inv * Q.block(D, S).values);
  out.noise = GaussianLaw(IndexedVector::constant(D, 0.0), IndexedMatrix(D, 2.0 * QD_inv),
                          1e-10);
  return out;
}

SeparatorUpdate separator_update(const CorrelationMatrix& r, const VertexSet& C,
                                 const VertexSet& S, Vertex v) {
  if (!is_subset(set_union(C, {v}), r.index())) {
    throw Error(ErrorCode::InvalidArgument,
                "correlation does not cover " + format_set(set_union(C, {v})));
  }
  const VertexSet D = set_difference(C, S);
  if (contains(D, v)) {
    throw Error(ErrorCode::InvalidArgument, "conditioning vertex lies in C \\ S");
  }
  SeparatorUpdate out;
  out.norming = separator_norming(r.restrict_to(C), S);
  out.alpha_S = IndexedVector::constant(S, 0.0);
  for (Vertex s : S) out.alpha_S(s) = r(s, v) * r(s, v);
  out.psi = out.norming.jacobian(out.alpha_S);
  out.phi = out.norming.scale(out.alpha_S);
  for (Eigen::Index i = 0; i < out.phi.values.size(); ++i) {
    if (!(out.phi.values(i) > 0.0)) {
      throw Error(ErrorCode::DegenerateCorrelation, "separator norming scale vanishes");
    }
  }
  return out;
}

GaussianLaw limit_law(const CorrelationMatrix& r, Vertex v) {
  return root_norming(r, v).limit;
}

IndexedMatrix limit_precision(const CorrelationMatrix& r, Vertex v) {
  const VertexSet rest = set_without(r.index(), v);
  IndexedMatrix out = r.precision().sub(rest);
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (std::size_t j = 0; j < rest.size(); ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) /=
          2.0 * r(rest[i], v) * r(rest[j], v);
  return out;
}

const GaussianCliqueModel& model_for(std::span<const GaussianCliqueModel> models,
                                     const VertexSet& clique) {
  for (const auto& m : models)
    if (m.clique() == clique) return m;
  throw Error(ErrorCode::InvalidArgument,
              "no Gaussian model for clique " + format_set(clique));
}

CorrelationMatrix markov_completion(const CliqueOrdering& ordering,
                                    std::span<const GaussianCliqueModel> models,
                                    double tolerance) {
  VertexSet all;
  for (const auto& c : ordering.cliques) all = set_union(all, c);
  IndexedMatrix R = IndexedMatrix::identity(all);
  VertexSet seen;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    const auto& C = ordering.cliques[i];
    const auto& Rc = model_for(models, C).correlation();
    const VertexSet& S = ordering.separators[i];
    for (Vertex a : S) {
      for (Vertex b : S) {
        const double gap = std::fabs(R(a, b) - Rc(a, b));
        if (gap > tolerance) {
          throw Error(ErrorCode::IncompatibleSeparators,
                      "clique " + format_set(C) + " disagrees with earlier cliques on " +
                          format_set(S),
                      S);
        }
      }
    }
    const VertexSet D = set_difference(C, S);
    for (Vertex a : C)
      for (Vertex b : C) R(a, b) = Rc(a, b);
    if (!S.empty()) {
      const VertexSet earlier = set_difference(seen, S);
      const Eigen::MatrixXd B =
          Rc.matrix().block(D, S).values * spd_inverse(Rc.matrix().sub(S).values, 1e-10);
      const Eigen::MatrixXd cross = B * R.block(S, earlier).values;
      const auto pd = positions_of(all, D);
      const auto pe = positions_of(all, earlier);
      R.values(pd, pe) = cross;
      R.values(pe, pd) = cross.transpose();
    }
    seen = set_union(seen, C);
  }
  return CorrelationMatrix(R, 1e-10);
}

}  // namespace tailgraph
