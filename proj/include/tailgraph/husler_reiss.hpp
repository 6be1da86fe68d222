#pragma once

#include <span>
#include <string>
#include <vector>

#include "tailgraph/graph.hpp"
#include "tailgraph/indexed.hpp"
#include "tailgraph/mvn.hpp"

namespace tailgraph {

// Symmetric, zero-diagonal, strictly conditionally negative definite matrix.
// Strict CND is checked as positive definiteness of Σ^{(c)} for the first
// label c, which is equivalent to -PΓPᵀ > 0 on the contrast space.
class VariogramMatrix {
 public:
  explicit VariogramMatrix(IndexedMatrix gamma, double tolerance = 1e-12);

  const VertexSet& index() const noexcept { return gamma_.rows; }
  const IndexedMatrix& matrix() const noexcept { return gamma_; }
  double operator()(Vertex i, Vertex j) const { return gamma_(i, j); }
  VariogramMatrix restrict_to(const VertexSet& subset) const;

 private:
  IndexedMatrix gamma_;
};

// Σ^{(c)} over C \ c: entries (Γ_ic + Γ_jc - Γ_ij) / 2.
IndexedMatrix sigma_anchor(const VariogramMatrix& gamma, Vertex c);

class HRCliqueModel {
 public:
  explicit HRCliqueModel(VariogramMatrix gamma);

  const VertexSet& clique() const noexcept { return gamma_.index(); }
  const VariogramMatrix& variogram() const noexcept { return gamma_; }
  HRCliqueModel restrict_to(const VertexSet& subset) const;

  // Cached per-anchor pieces of the exponent measure.
  struct Anchor {
    VertexSet rest;
    Eigen::VectorXd half_gamma;  // Γ_{C\c,c} / 2
    Eigen::MatrixXd sigma;       // Σ^{(c)}
  };
  const Anchor& anchor(std::size_t position) const { return anchors_[position]; }

 private:
  VariogramMatrix gamma_;
  std::vector<Anchor> anchors_;
};

// Λ^{(C)}(y) = Σ_c y_c^{-1} Φ_{|C|-1}(log(y_{C\c}/y_c) + Γ_{C\c,c}/2; 0, Σ^{(c)}).
// Entries of y may be +inf (those coordinates drop out).
Estimate exponent_measure(const HRCliqueModel& model, const IndexedVector& y,
                          const MvnOptions& mvn = {});

struct FiniteDifference {
  double step = 1e-3;              // relative step, applied on log y
  double noise_tolerance = 1e-6;   // relative bound on propagated MVN error
};

// ∂^{|J|} Λ / ∂y_J for distinct coordinates J, by central differences in
// log y with one Richardson step (h and h/2).  Throws NumericalBreakdown if
// the lattice error of the MVN terms, amplified by the stencil, exceeds the
// tolerance relative to the derivative itself.
double exponent_derivative(const HRCliqueModel& model, const IndexedVector& y,
                           const VertexSet& J, const FiniteDifference& fd = {},
                           const MvnOptions& mvn = {});

// λ^{(C)}(y) = -∂^{|C|} Λ / ∂y_C.
double spectral_density(const HRCliqueModel& model, const IndexedVector& y,
                        const FiniteDifference& fd = {}, const MvnOptions& mvn = {});

// y = -1 / log(1 - exp(-x)): unit exponential to unit Fréchet.
double frechet_from_exponential(double x);

// Kernel evaluator that caches the separator-only factors, for repeated calls
// at a fixed x_S (numeric inversion).  Points are raw arrays ordered like S
// and C \ S respectively.
class KernelEvaluator {
 public:
  KernelEvaluator(const HRCliqueModel& model, VertexSet S, FiniteDifference fd = {},
                  MvnOptions mvn = {});
  void set_separator(const double* x_S);
  double operator()(const double* x_rest);
  const VertexSet& rest() const noexcept { return rest_; }

 private:
  HRCliqueModel model_;
  HRCliqueModel separator_model_;
  VertexSet S_;
  VertexSet rest_;
  FiniteDifference fd_;
  MvnOptions mvn_;
  std::vector<Eigen::Index> s_pos_;
  std::vector<Eigen::Index> rest_pos_;
  Eigen::VectorXd y_;
  double separator_lambda_ = 0.0;
  double denominator_ = 1.0;
};

// P(X_{C\S} <= x_rest | X_S = x_S) in exponential margins, |S| <= 2.
double transition_kernel(const HRCliqueModel& model, const VertexSet& S,
                         const IndexedVector& x_S, const IndexedVector& x_rest,
                         const FiniteDifference& fd = {}, const MvnOptions& mvn = {});

// Λ^{(C)}_S(e^{z_S}, e^{w}) / Λ^{(S)}_S(e^{z_S}): the t -> ∞ limit of the
// kernel at x_S = t + z_S, x_rest = t + w.
double kernel_limit(const HRCliqueModel& model, const VertexSet& S,
                    const IndexedVector& z_S, const IndexedVector& w,
                    const FiniteDifference& fd = {}, const MvnOptions& mvn = {});

struct HRLimitParams {
  VertexSet target;          // C \ S
  IndexedMatrix linear_map;  // A, rows C\S, cols S
  IndexedVector mean_shift;  // m
  IndexedMatrix covariance;  // (Q^{(s)}_{C\S})^{-1}
};

// Conditional-limit parameters with internal anchor s ∈ S (default min S).
HRLimitParams a2_limit_params(const HRCliqueModel& model, const VertexSet& S);
HRLimitParams a2_limit_params(const HRCliqueModel& model, const VertexSet& S,
                              Vertex anchor);

// Φ(w; A z_S + m, cov).
Estimate limit_cdf(const HRLimitParams& params, const IndexedVector& z_S,
                   const IndexedVector& w, const MvnOptions& mvn = {});

// Limit of X_{C\v} - X_v given X_v large: N(-Γ_{C\v,v}/2, Σ^{(v)}).
GaussianLaw hr_root_law(const HRCliqueModel& model, Vertex v);

// Looks up the model whose clique equals `clique`; InvalidArgument if absent.
const HRCliqueModel& model_for(std::span<const HRCliqueModel> models,
                               const VertexSet& clique);

// Variogram entries on each separator must agree between the child clique and
// every earlier clique containing the separator (max-abs tolerance).
void check_separator_compatibility(const CliqueOrdering& ordering,
                                   std::span<const HRCliqueModel> models,
                                   double tolerance = 1e-12);

// μ^{(v)} over V \ v; requires v ∈ C_1.
IndexedVector tail_model_mean(const CliqueOrdering& ordering,
                              std::span<const HRCliqueModel> models, Vertex v);
// Q^{(v)} over V \ v assembled from clique-local precisions.
IndexedMatrix tail_model_precision(const CliqueOrdering& ordering,
                                   std::span<const HRCliqueModel> models, Vertex v);

// Compares the finite-t bivariate kernel against the two candidate limit
// conventions N(-Γ/2, Γ) ("half") and N(-Γ, 2Γ) ("full").
struct ConventionProbe {
  double half_discrepancy;
  double full_discrepancy;
  std::string matched;
};
ConventionProbe probe_bivariate_convention(const HRCliqueModel& model, Vertex s,
                                           double t, const FiniteDifference& fd = {});

}  // namespace tailgraph
