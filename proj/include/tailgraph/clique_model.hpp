#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tailgraph/gaussian_copula.hpp"
#include "tailgraph/graph.hpp"
#include "tailgraph/husler_reiss.hpp"

namespace tailgraph {

enum class Family { HuslerReiss, Gaussian };

using CliqueModel = std::variant<HRCliqueModel, GaussianCliqueModel>;

const char* family_name(Family f);
Family family_of(const CliqueModel& m);
const VertexSet& clique_of(const CliqueModel& m);

// Scale exponent of the family's separator norming: b^{(S)} grows like x^q.
double scale_exponent(Family f);

const CliqueModel& model_for(std::span<const CliqueModel> models, const VertexSet& clique);

// Every maximal clique of the ordering has exactly one model, and no model sits
// on a non-clique (InvalidArgument otherwise).
void check_model_cover(const CliqueOrdering& ordering, std::span<const CliqueModel> models);

// Separator parameters must agree between same-family cliques sharing them:
// variogram entries for Hüsler-Reiss, correlations for Gaussian.
void check_compatibility(const CliqueOrdering& ordering, std::span<const CliqueModel> models,
                         double tolerance = 1e-12);

std::vector<HRCliqueModel> hr_models(std::span<const CliqueModel> models);
std::vector<GaussianCliqueModel> gaussian_models(std::span<const CliqueModel> models);
bool all_of_family(std::span<const CliqueModel> models, Family f);

// The family's A1 limit anchored at s: law of the renormalised C \ s given
// X_s large, with normings a_j(x) = alpha_j x and b_j(x) = x^exponent.
struct RootLimit {
  GaussianLaw law;
  IndexedVector alpha;
  double exponent;
};
RootLimit root_limit(const CliqueModel& model, Vertex s);

}  // namespace tailgraph
