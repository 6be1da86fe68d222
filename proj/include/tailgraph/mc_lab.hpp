#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tailgraph/clique_model.hpp"
#include "tailgraph/sample_matrix.hpp"
#include "tailgraph/tail_engine.hpp"

namespace tailgraph {

struct SimulationOptions {
  int workers = 1;
  FiniteDifference fd;
  MvnOptions mvn;
  double inversion_tolerance = 1e-10;  // bisection width on the exponential scale
};

// Unconditional draws in unit-exponential margins.  Gaussian cliques are exact
// (latent Gaussian regression); Hüsler-Reiss cliques are filled one coordinate
// at a time by inverting the finite-t transition kernel, so they are limited
// to three vertices (UnsupportedCliqueShape otherwise).
SampleMatrix simulate_graphical(const CliqueOrdering& ordering,
                                std::span<const CliqueModel> models, std::size_t n,
                                std::uint64_t seed, const SimulationOptions& options = {});

// Draws given X_v > t: X_v = t + E, the rest through the same kernels.  The
// ordering must have v in C_1.
SampleMatrix conditional_exceedance(const CliqueOrdering& ordering,
                                    std::span<const CliqueModel> models, Vertex v, double t,
                                    std::size_t n, std::uint64_t seed,
                                    const SimulationOptions& options = {});

// (x_target - alpha x_anchor) / x_anchor^exponent.
struct NormingSpec {
  Vertex target;
  Vertex anchor;
  double alpha;
  double exponent;
};

enum class RenormalizeMode { ConditionOnRoot, SeparatorBased };

// Every column other than the conditioning vertex needs a spec (MissingNorming).
// The conditioning column becomes x_v - t when the sample carries a t-level.
SampleMatrix renormalize(const SampleMatrix& samples, std::span<const NormingSpec> specs,
                         RenormalizeMode mode);

std::vector<NormingSpec> root_norming_specs(const TailGraphicalModel& model);
std::vector<NormingSpec> separator_norming_specs(const TailNoiseModel& model);

double ks_one_sample(std::span<const double> values, const std::function<double(double)>& cdf);
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct KsRow {
  double t;
  Vertex vertex;
  double ks;
  std::size_t n;
  double threshold;
  bool pass;
};

struct MomentRow {
  double t;
  double mean_discrepancy;        // max |empirical - limit|
  double covariance_discrepancy;  // max |empirical - limit|
  IndexedMatrix covariance_gap;   // empirical - limit, over V \ v
};

struct StudyOptions {
  std::vector<double> t_levels{4.0, 8.0};
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  double ks_max = 0.05;
  double trend_slack = 1.2;
  double ks_constant = 1.95;
  SimulationOptions simulation;
};

struct ConvergenceReport {
  std::string route;  // "theorem_1" or "tail_noise"
  std::vector<double> t_levels;
  std::size_t n = 0;
  std::vector<KsRow> ks;
  std::vector<MomentRow> moments;
  bool trend_pass = true;
  bool pass = true;
};

// Conditional samples at each t, renormalised and compared margin by margin
// with the limit: the tail graphical model when the classifier allows it,
// otherwise the tail noise with separator-based normings.
ConvergenceReport convergence_study(const CliqueOrdering& ordering,
                                    std::span<const CliqueModel> models, Vertex v,
                                    const StudyOptions& options);

// #{rows whose ranks exceed floor(qn) in every column of A} / (n - floor(qn)).
double chi_estimator(const SampleMatrix& samples, const VertexSet& A, double q);

// λ(y) = λ^{(C_1)} Π_{i>=2} λ^{(C_i)} / λ^{(S_i)} from finite-difference clique densities.
double factorized_density(const CliqueOrdering& ordering, std::span<const HRCliqueModel> models,
                          const IndexedVector& y, const FiniteDifference& fd = {},
                          const MvnOptions& mvn = {});

struct MrvReport {
  double homogeneity_error = 0.0;  // max relative error of λ(sy) s^{d+1} / λ(y) - 1
  bool homogeneity_pass = false;
  double compatibility_gap = 0.0;  // max |Λ^{(C)}(y_S, ∞) - Λ^{(C')}(y_S, ∞)|
  double compatibility_allowance = 0.0;
  bool compatibility_pass = false;
  double density_at_one = 0.0;
  bool density_pass = false;
  bool pass() const { return homogeneity_pass && compatibility_pass && density_pass; }
};

struct MrvOptions {
  std::uint64_t seed = 1;
  int points = 10;
  double scale = 2.0;
  double homogeneity_tol = 1e-4;
  FiniteDifference fd;
  MvnOptions mvn;
};

MrvReport mrv_checks(const CliqueOrdering& ordering, std::span<const HRCliqueModel> models,
                     const MrvOptions& options = {});

}  // namespace tailgraph
