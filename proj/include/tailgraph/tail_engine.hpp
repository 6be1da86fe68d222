#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailgraph/clique_model.hpp"
#include "tailgraph/sample_matrix.hpp"

namespace tailgraph {

// Norming functions of one vertex given X_v = t: a(t) = alpha t, b(t) = t^exponent.
struct PowerNorming {
  double alpha = 1.0;
  double exponent = 0.0;
};

// One step Z_D = psi Z_S + phi * eps of the tail recursion, D = C \ S.  Both
// update maps are affine in this library: psi is a matrix and phi a constant
// vector.  `degenerate` marks a step whose scale limit vanishes (phi = 0).
struct CliqueUpdate {
  std::size_t clique_index = 0;
  VertexSet clique;
  VertexSet separator;
  VertexSet target;
  Family family = Family::HuslerReiss;
  IndexedMatrix psi;
  IndexedVector phi;
  GaussianLaw noise;
  bool degenerate = false;

  // Separator norming of the clique, used by the remainder check.
  // Hüsler-Reiss: a(x) = M x, b = 1.  Gaussian: a(x) = (M |x|^{1/2})^2, b = |M |x|^{1/2}|.
  IndexedMatrix norming_map;
  IndexedVector location(const IndexedVector& x_S) const;
  IndexedVector scale(const IndexedVector& x_S) const;
};

struct TailGraphicalModel {
  CliqueOrdering ordering;
  Vertex v = 0;
  VertexSet vertices;
  std::vector<PowerNorming> normings;  // aligned with `vertices`
  std::vector<CliqueUpdate> updates;   // updates[0] is the root clique

  const PowerNorming& norming(Vertex j) const;
};

struct NormingVerdict {
  bool theorem_1 = true;
  std::optional<std::size_t> clique_index;  // first failing clique
  VertexSet witness;
  std::string reason;
};

// Decides whether separator normings compose into root normings by comparing
// the polynomial orders of the scale functions exactly.  Mixed families need
// singleton separators (UnsupportedNormingFamily otherwise).
NormingVerdict classify_norming(const CliqueOrdering& ordering,
                                std::span<const CliqueModel> models, Vertex v);

// Every step of the recursion, degenerate ones included (flagged, not rejected).
TailGraphicalModel derive_updates(const CliqueOrdering& ordering,
                                  std::span<const CliqueModel> models, Vertex v);

// v must lie in C_1.  Throws NormingIncompatible when some step is degenerate.
TailGraphicalModel build_tail_model(const CliqueOrdering& ordering,
                                    std::span<const CliqueModel> models, Vertex v);

// Columns are all vertices; column v holds E_v.  Row r uses stream (seed, r).
SampleMatrix sample_tail_model(const TailGraphicalModel& model, std::size_t n,
                               std::uint64_t seed, int workers = 1);

// Exact Gaussian law of Z over V \ v.
GaussianLaw tail_model_law(const TailGraphicalModel& model);

struct RemainderRow {
  std::size_t clique_index;
  VertexSet clique;
  VertexSet separator;
  double t;
  double sup_location;  // sup |A|
  double sup_scale;     // sup |B|
  bool degenerate;
};

// Evaluates both remainder expressions on the grid z in [-z_max, z_max]^{|S \ v|}
// (`points` per axis) for every clique after the root.
std::vector<RemainderRow> verify_remainders(const CliqueOrdering& ordering,
                                            std::span<const CliqueModel> models, Vertex v,
                                            std::span<const double> t_grid,
                                            double z_max = 3.0, int points = 13);

struct TailNoiseBlock {
  std::size_t clique_index = 0;
  VertexSet clique;
  Vertex anchor = 0;  // v for the root clique, the separator vertex otherwise
  VertexSet target;
  Family family = Family::HuslerReiss;
  GaussianLaw law;
  IndexedVector alpha;
  double exponent = 0.0;
};

struct TailNoiseModel {
  CliqueOrdering ordering;
  Vertex v = 0;
  VertexSet vertices;
  std::vector<TailNoiseBlock> blocks;

  // Block-diagonal Gaussian over V \ v.
  GaussianLaw joint() const;
  // Columns are all vertices; column v holds E_v.
  SampleMatrix sample(std::size_t n, std::uint64_t seed, int workers = 1) const;
};

TailNoiseModel build_tail_noise(const CliqueOrdering& ordering,
                                std::span<const CliqueModel> models, Vertex v);

}  // namespace tailgraph
