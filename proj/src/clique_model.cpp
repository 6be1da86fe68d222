#include "tailgraph/clique_model.hpp"

#include <cmath>

#include "tailgraph/error.hpp"

namespace tailgraph {

const char* family_name(Family f) {
  return f == Family::HuslerReiss ? "husler_reiss" : "gaussian";
}

Family family_of(const CliqueModel& m) {
  return std::holds_alternative<HRCliqueModel>(m) ? Family::HuslerReiss : Family::Gaussian;
}

const VertexSet& clique_of(const CliqueModel& m) {
  return std::visit([](const auto& x) -> const VertexSet& { return x.clique(); }, m);
}

double scale_exponent(Family f) { return f == Family::HuslerReiss ? 0.0 : 0.5; }

const CliqueModel& model_for(std::span<const CliqueModel> models, const VertexSet& clique) {
  for (const auto& m : models)
    if (clique_of(m) == clique) return m;
  throw Error(ErrorCode::InvalidArgument, "no model for clique " + format_set(clique));
}

void check_model_cover(const CliqueOrdering& ordering, std::span<const CliqueModel> models) {
  for (const auto& c : ordering.cliques) {
    int count = 0;
    for (const auto& m : models) count += clique_of(m) == c;
    if (count != 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "maximal clique " + format_set(c) + " needs exactly one model, found " +
                      std::to_string(count));
    }
  }
  for (const auto& m : models) {
    if (std::find(ordering.cliques.begin(), ordering.cliques.end(), clique_of(m)) ==
        ordering.cliques.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  format_set(clique_of(m)) + " is not a maximal clique of the graph");
    }
  }
}

void check_compatibility(const CliqueOrdering& ordering, std::span<const CliqueModel> models,
                         double tolerance) {
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const auto& S = ordering.separators[i];
    const auto& child = model_for(models, ordering.cliques[i]);
    for (std::size_t k = 0; k < i; ++k) {
      if (!is_subset(S, ordering.cliques[k])) continue;
      const auto& other = model_for(models, ordering.cliques[k]);
      if (family_of(child) != family_of(other) || S.size() < 2) continue;
      Eigen::MatrixXd a, b;
      if (family_of(child) == Family::HuslerReiss) {
        a = std::get<HRCliqueModel>(child).variogram().matrix().sub(S).values;
        b = std::get<HRCliqueModel>(other).variogram().matrix().sub(S).values;
      } else {
        a = std::get<GaussianCliqueModel>(child).correlation().matrix().sub(S).values;
        b = std::get<GaussianCliqueModel>(other).correlation().matrix().sub(S).values;
      }
      const double gap = (a - b).cwiseAbs().maxCoeff();
      if (gap > tolerance) {
        throw Error(ErrorCode::IncompatibleSeparators,
                    "cliques " + format_set(ordering.cliques[k]) + " and " +
                        format_set(ordering.cliques[i]) + " disagree on separator " +
                        format_set(S),
                    S);
      }
    }
  }
}

std::vector<HRCliqueModel> hr_models(std::span<const CliqueModel> models) {
  std::vector<HRCliqueModel> out;
  for (const auto& m : models)
    if (auto p = std::get_if<HRCliqueModel>(&m)) out.push_back(*p);
  return out;
}

std::vector<GaussianCliqueModel> gaussian_models(std::span<const CliqueModel> models) {
  std::vector<GaussianCliqueModel> out;
  for (const auto& m : models)
    if (auto p = std::get_if<GaussianCliqueModel>(&m)) out.push_back(*p);
  return out;
}

bool all_of_family(std::span<const CliqueModel> models, Family f) {
  return std::all_of(models.begin(), models.end(),
                     [f](const CliqueModel& m) { return family_of(m) == f; });
}

RootLimit root_limit(const CliqueModel& model, Vertex s) {
  if (auto hr = std::get_if<HRCliqueModel>(&model)) {
    auto law = hr_root_law(*hr, s);
    return {law, IndexedVector::constant(law.index(), 1.0), 0.0};
  }
  const auto& r = std::get<GaussianCliqueModel>(model).correlation();
  auto root = root_norming(r, s);
  return {root.limit, root.norming.alpha, 0.5};
}

}  // namespace tailgraph
