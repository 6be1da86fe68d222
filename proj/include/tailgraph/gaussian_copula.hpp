#pragma once

#include <span>

#include "tailgraph/graph.hpp"
#include "tailgraph/indexed.hpp"

namespace tailgraph {

// Unit-diagonal positive definite matrix with every off-diagonal entry in
// (0, 1).  Entries outside that range raise DegenerateCorrelation; a matrix
// that is not positive definite raises NotSPD.
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(IndexedMatrix r, double tolerance = 1e-12);

  const VertexSet& index() const noexcept { return r_.rows; }
  const IndexedMatrix& matrix() const noexcept { return r_; }
  const IndexedMatrix& precision() const noexcept { return q_; }
  double operator()(Vertex i, Vertex j) const { return r_(i, j); }
  CorrelationMatrix restrict_to(const VertexSet& subset) const;

 private:
  IndexedMatrix r_;
  IndexedMatrix q_;
};

class GaussianCliqueModel {
 public:
  explicit GaussianCliqueModel(CorrelationMatrix r) : r_(std::move(r)) {}
  const VertexSet& clique() const noexcept { return r_.index(); }
  const CorrelationMatrix& correlation() const noexcept { return r_; }

 private:
  CorrelationMatrix r_;
};

// a_j(t) = α_j t, b_j(t) = t^{1/2} with α_j = ρ_{jv}^2.
struct RootNorming {
  Vertex v;
  IndexedVector alpha;
};

struct RootNormingResult {
  RootNorming norming;
  GaussianLaw limit;  // zero mean, covariance 2ρ_iρ_j(ρ_ij - ρ_iρ_j)
};

RootNormingResult root_norming(const CorrelationMatrix& r, Vertex v);

// Separator normings of a Gaussian clique: with B = -Q_{C\S}^{-1} Q_{C\S,S}
// (Q the clique precision), a^{(S)}(x) = (B |x|^{1/2})^2 and
// b^{(S)}(x) = |B |x|^{1/2}|.  The limit noise is N(0, 2 Q_{C\S}^{-1}).
struct SeparatorNorming {
  VertexSet separator;
  VertexSet target;
  IndexedMatrix regression;  // B, rows target, cols separator
  GaussianLaw noise;

  IndexedVector location(const IndexedVector& x_S) const;
  IndexedVector scale(const IndexedVector& x_S) const;
  // Jacobian of a^{(S)} at α_S: J_cs = 2 (B√α)_c B_cs / (2√α_s).
  IndexedMatrix jacobian(const IndexedVector& alpha_S) const;
};

SeparatorNorming separator_norming(const CorrelationMatrix& clique_r,
                                   const VertexSet& S);

struct SeparatorUpdate {
  SeparatorNorming norming;
  IndexedVector alpha_S;  // ρ^2_{S,v}
  IndexedMatrix psi;      // ψ(z) = psi · z_S
  IndexedVector phi;      // φ = b^{(S)}(α_S) = ρ_{C\S,v}
};

// `r` must cover C ∪ {v}; v ∉ C \ S.
SeparatorUpdate separator_update(const CorrelationMatrix& r, const VertexSet& C,
                                 const VertexSet& S, Vertex v);

// Limit law on V \ v of the renormalised vector given X_v large.
GaussianLaw limit_law(const CorrelationMatrix& r, Vertex v);
// diag(1/(√2ρ)) Q_{V\v} diag(1/(√2ρ)), Q = R^{-1} with row and column v removed.
IndexedMatrix limit_precision(const CorrelationMatrix& r, Vertex v);

const GaussianCliqueModel& model_for(std::span<const GaussianCliqueModel> models,
                                     const VertexSet& clique);

// The correlation over V of the Gaussian graphical model that has the given
// clique marginals (IncompatibleSeparators if separator blocks disagree).
CorrelationMatrix markov_completion(const CliqueOrdering& ordering,
                                    std::span<const GaussianCliqueModel> models,
                                    double tolerance = 1e-12);

}  // namespace tailgraph
