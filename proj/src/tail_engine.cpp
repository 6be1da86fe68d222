#include "tailgraph/tail_engine.hpp"

#include <algorithm>
#include <cmath>

#include "tailgraph/error.hpp"
#include "tailgraph/parallel.hpp"
#include "tailgraph/random.hpp"

namespace tailgraph {

namespace {

VertexSet all_vertices(const CliqueOrdering& ordering) {
  VertexSet all;
  for (const auto& c : ordering.cliques) all = set_union(all, c);
  return all;
}

void require_root(const CliqueOrdering& ordering, Vertex v) {
  if (ordering.size() == 0 || !contains(ordering.cliques[0], v)) {
    throw Error(ErrorCode::InvalidArgument,
                "conditioning vertex " + std::to_string(v) + " must lie in C_1");
  }
}

void check_models(const CliqueOrdering& ordering, std::span<const CliqueModel> models) {
  check_model_cover(ordering, models);
  const bool mixed = !all_of_family(models, Family::HuslerReiss) &&
                     !all_of_family(models, Family::Gaussian);
  if (mixed && !is_block_graph(ordering)) {
    throw Error(ErrorCode::UnsupportedNormingFamily,
                "mixing clique families requires singleton separators");
  }
  check_compatibility(ordering, models);
}

std::string exponent_text(double p) { return p == 0.0 ? "1" : "t^1/2"; }

}  // namespace

TailGraphicalModel derive_updates(const CliqueOrdering& ordering,
                                  std::span<const CliqueModel> models, Vertex v) {
  require_root(ordering, v);
  check_models(ordering, models);

  TailGraphicalModel out;
  out.ordering = ordering;
  out.v = v;
  out.vertices = all_vertices(ordering);
  out.normings.assign(out.vertices.size(), PowerNorming{});
  auto norming = [&](Vertex j) -> PowerNorming& {
    return out.normings[static_cast<std::size_t>(position_of(out.vertices, j))];
  };

  const auto& root_model = model_for(models, ordering.cliques[0]);
  const RootLimit root = root_limit(root_model, v);
  CliqueUpdate first;
  first.clique_index = 0;
  first.clique = ordering.cliques[0];
  first.separator = {v};
  first.target = set_without(first.clique, v);
  first.family = family_of(root_model);
  first.psi = IndexedMatrix::zero(first.target, first.separator);
  first.phi = IndexedVector::constant(first.target, 1.0);
  first.noise = root.law;
  for (Vertex j : first.target) norming(j) = {root.alpha(j), root.exponent};
  out.updates.push_back(std::move(first));

  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const auto& model = model_for(models, ordering.cliques[i]);
    CliqueUpdate u;
    u.clique_index = i;
    u.clique = ordering.cliques[i];
    u.separator = ordering.separators[i];
    u.target = set_difference(u.clique, u.separator);
    u.family = family_of(model);
    const double q = scale_exponent(u.family);

    IndexedVector alpha_S = IndexedVector::constant(u.separator, 0.0);
    double p_S = 0.0;
    for (Vertex s : u.separator) {
      alpha_S(s) = norming(s).alpha;
      p_S = std::max(p_S, norming(s).exponent);
    }
    const double p_D = std::max(q, p_S);

    IndexedMatrix jacobian;
    if (u.family == Family::HuslerReiss) {
      const auto params = a2_limit_params(std::get<HRCliqueModel>(model), u.separator);
      u.norming_map = params.linear_map;
      u.noise = GaussianLaw(params.mean_shift, params.covariance, 1e-9);
      jacobian = params.linear_map;
    } else {
      const auto sn = separator_norming(std::get<GaussianCliqueModel>(model).correlation(),
                                        u.separator);
      u.norming_map = sn.regression;
      u.noise = sn.noise;
      jacobian = sn.jacobian(alpha_S);
    }
    const IndexedVector alpha_D = u.location(alpha_S);
    for (Vertex d : u.target) norming(d) = {alpha_D(d), p_D};

    // Columns of slower-growing separator coordinates drop out of the limit.
    u.psi = jacobian;
    for (Vertex s : u.separator) {
      if (norming(s).exponent != p_D) {
        u.psi.values.col(position_of(u.separator, s)).setZero();
      }
    }
    if (q == p_D) {
      u.phi = u.scale(alpha_S);
    } else {
      u.phi = IndexedVector::constant(u.target, 0.0);
      u.degenerate = true;
    }
    out.updates.push_back(std::move(u));
  }
  return out;
}

namespace {

struct CompiledStep {
  std::vector<Eigen::Index> target;
  std::vector<Eigen::Index> separator;
  Eigen::MatrixXd psi;
  Eigen::VectorXd phi;
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;
};

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotSPD, "noise covariance is not positive definite");
  }
  return llt.matrixL();
}

std::vector<CompiledStep> compile(const TailGraphicalModel& model) {
  std::vector<CompiledStep> steps;
  for (const auto& u : model.updates) {
    steps.push_back({positions_of(model.vertices, u.target),
                     positions_of(model.vertices, u.separator), u.psi.values, u.phi.values,
                     u.noise.mean.values, cholesky_factor(u.noise.covariance.values)});
  }
  return steps;
}

}  // namespace

IndexedVector CliqueUpdate::location(const IndexedVector& x_S) const {
  if (x_S.index != separator) {
    throw Error(ErrorCode::InvalidArgument, "separator point has wrong labels");
  }
  if (family == Family::HuslerReiss) return IndexedVector(target, norming_map.values * x_S.values);
  const Eigen::VectorXd level =
      norming_map.values * x_S.values.array().abs().sqrt().matrix();
  return IndexedVector(target, level.array().square().matrix());
}

IndexedVector CliqueUpdate::scale(const IndexedVector& x_S) const {
  if (x_S.index != separator) {
    throw Error(ErrorCode::InvalidArgument, "separator point has wrong labels");
  }
  if (family == Family::HuslerReiss) return IndexedVector::constant(target, 1.0);
  const Eigen::VectorXd level =
      norming_map.values * x_S.values.array().abs().sqrt().matrix();
  return IndexedVector(target, level.cwiseAbs());
}

const PowerNorming& TailGraphicalModel::norming(Vertex j) const {
  return normings[static_cast<std::size_t>(position_of(vertices, j))];
}

NormingVerdict classify_norming(const CliqueOrdering& ordering,
                                std::span<const CliqueModel> models, Vertex v) {
  const auto model = derive_updates(ordering, models, v);
  NormingVerdict verdict;
  for (const auto& u : model.updates) {
    if (!u.degenerate) continue;
    double p_S = 0.0;
    for (Vertex s : u.separator) p_S = std::max(p_S, model.norming(s).exponent);
    verdict.theorem_1 = false;
    verdict.clique_index = u.clique_index;
    verdict.witness = u.clique;
    verdict.reason = "separator " + format_set(u.separator) + " is scaled by " +
                     exponent_text(p_S) + " but clique " + format_set(u.clique) + " (" +
                     family_name(u.family) + ") normalises with scale " +
                     exponent_text(scale_exponent(u.family));
    break;
  }
  return verdict;
}

TailGraphicalModel build_tail_model(const CliqueOrdering& ordering,
                                    std::span<const CliqueModel> models, Vertex v) {
  auto model = derive_updates(ordering, models, v);
  for (const auto& u : model.updates) {
    if (u.degenerate) {
      throw Error(ErrorCode::NormingIncompatible,
                  "no separator norming of " + format_set(u.clique) +
                      " composes with the root normings; use the tail-noise route",
                  u.clique);
    }
  }
  return model;
}

SampleMatrix sample_tail_model(const TailGraphicalModel& model, std::size_t n,
                               std::uint64_t seed, int workers) {
  const auto steps = compile(model);
  const Eigen::Index d = static_cast<Eigen::Index>(model.vertices.size());
  const Eigen::Index pv = position_of(model.vertices, model.v);
  SampleMatrix out;
  out.columns = model.vertices;
  out.rows.resize(static_cast<Eigen::Index>(n), d);
  out.meta.seed = seed;
  out.meta.route = "tail_model";
  out.meta.conditioning_vertex = model.v;
  out.meta.margins = "limit";

  parallel_rows(n, workers, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(d), eps;
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(seed, r);
      const double e = rng.exponential();
      z.setZero();
      for (const auto& step : steps) {
        eps.resize(step.mean.size());
        for (Eigen::Index k = 0; k < eps.size(); ++k) eps(k) = rng.normal();
        eps = step.mean + step.chol * eps;
        const Eigen::VectorXd zs = z(step.separator);
        z(step.target) = step.psi * zs + step.phi.cwiseProduct(eps);
      }
      z(pv) = e;
      out.rows.row(static_cast<Eigen::Index>(r)) = z.transpose();
    }
  });
  return out;
}

GaussianLaw tail_model_law(const TailGraphicalModel& model) {
  const Eigen::Index d = static_cast<Eigen::Index>(model.vertices.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& u : model.updates) {
    const auto pt = positions_of(model.vertices, u.target);
    const auto ps = positions_of(model.vertices, u.separator);
    const Eigen::MatrixXd& psi = u.psi.values;
    const Eigen::MatrixXd Dphi = u.phi.values.asDiagonal();
    const Eigen::VectorXd ms = mean(ps);
    mean(pt) = psi * ms + Dphi * u.noise.mean.values;
    // Targets are new coordinates: their covariance with everything earlier
    // flows through the separator only.
    const Eigen::MatrixXd cross = psi * cov(ps, Eigen::all);
    cov(pt, Eigen::all) = cross;
    cov(Eigen::all, pt) = cross.transpose();
    const Eigen::MatrixXd css = cov(ps, ps);
    cov(pt, pt) = psi * css * psi.transpose() + Dphi * u.noise.covariance.values * Dphi;
  }
  const VertexSet rest = set_without(model.vertices, model.v);
  const auto pr = positions_of(model.vertices, rest);
  const Eigen::VectorXd m = mean(pr);
  const Eigen::MatrixXd c = cov(pr, pr);
  return GaussianLaw(IndexedVector(rest, m), IndexedMatrix(rest, 0.5 * (c + c.transpose())),
                     1e-9);
}

std::vector<RemainderRow> verify_remainders(const CliqueOrdering& ordering,
                                            std::span<const CliqueModel> models, Vertex v,
                                            std::span<const double> t_grid, double z_max,
                                            int points) {
  if (points < 2 || !(z_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "remainder grid needs z_max > 0 and 2+ points");
  }
  const auto model = derive_updates(ordering, models, v);
  std::vector<RemainderRow> rows;
  for (std::size_t i = 1; i < model.updates.size(); ++i) {
    const auto& u = model.updates[i];
    const VertexSet free = set_without(u.separator, v);
    std::size_t cells = 1;
    for (std::size_t k = 0; k < free.size(); ++k) cells *= static_cast<std::size_t>(points);
    for (double t : t_grid) {
      if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t levels must be positive");
      RemainderRow row{i, u.clique, u.separator, t, 0.0, 0.0, u.degenerate};
      IndexedVector z = IndexedVector::constant(u.separator, 0.0);
      IndexedVector T = IndexedVector::constant(u.separator, 0.0);
      for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t rem = cell;
        for (Vertex s : free) {
          const auto k = static_cast<double>(rem % static_cast<std::size_t>(points));
          rem /= static_cast<std::size_t>(points);
          z(s) = -z_max + 2.0 * z_max * k / (points - 1);
        }
        for (Vertex s : u.separator) {
          const auto& ns = model.norming(s);
          T(s) = ns.alpha * t + std::pow(t, ns.exponent) * z(s);
        }
        const IndexedVector a = u.location(T);
        const IndexedVector b = u.scale(T);
        const Eigen::VectorXd shift = u.psi.values * z.values;
        for (std::size_t k = 0; k < u.target.size(); ++k) {
          const auto e = static_cast<Eigen::Index>(k);
          const auto& nd = model.norming(u.target[k]);
          const double bt = std::pow(t, nd.exponent);
          const double A = (nd.alpha * t - a.values(e) + bt * shift(e)) / b.values(e);
          const double B = 1.0 - bt * u.phi.values(e) / b.values(e);
          row.sup_location = std::max(row.sup_location, std::fabs(A));
          row.sup_scale = std::max(row.sup_scale, std::fabs(B));
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

GaussianLaw TailNoiseModel::joint() const {
  const VertexSet rest = set_without(vertices, v);
  IndexedVector mean = IndexedVector::constant(rest, 0.0);
  IndexedMatrix cov = IndexedMatrix::zero(rest, rest);
  for (const auto& b : blocks) {
    for (Vertex j : b.target) mean(j) = b.law.mean(j);
    add_into(cov, b.law.covariance);
  }
  return GaussianLaw(mean, cov, 1e-9);
}

SampleMatrix TailNoiseModel::sample(std::size_t n, std::uint64_t seed, int workers) const {
  struct Compiled {
    std::vector<Eigen::Index> target;
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;
  };
  std::vector<Compiled> compiled;
  for (const auto& b : blocks) {
    compiled.push_back({positions_of(vertices, b.target), b.law.mean.values,
                        cholesky_factor(b.law.covariance.values)});
  }
  const Eigen::Index d = static_cast<Eigen::Index>(vertices.size());
  const Eigen::Index pv = position_of(vertices, v);
  SampleMatrix out;
  out.columns = vertices;
  out.rows.resize(static_cast<Eigen::Index>(n), d);
  out.meta.seed = seed;
  out.meta.route = "tail_noise";
  out.meta.conditioning_vertex = v;
  out.meta.margins = "limit";
  parallel_rows(n, workers, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(d), eps;
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(seed, r);
      z(pv) = rng.exponential();
      for (const auto& c : compiled) {
        eps.resize(c.mean.size());
        for (Eigen::Index k = 0; k < eps.size(); ++k) eps(k) = rng.normal();
        z(c.target) = c.mean + c.chol * eps;
      }
      out.rows.row(static_cast<Eigen::Index>(r)) = z.transpose();
    }
  });
  return out;
}

TailNoiseModel build_tail_noise(const CliqueOrdering& ordering,
                                std::span<const CliqueModel> models, Vertex v) {
  if (!is_block_graph(ordering)) {
    throw Error(ErrorCode::NotBlockGraph, "tail noise needs every separator to be a single vertex");
  }
  require_root(ordering, v);
  check_model_cover(ordering, models);
  check_compatibility(ordering, models);
  TailNoiseModel out;
  out.ordering = ordering;
  out.v = v;
  out.vertices = all_vertices(ordering);
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    const auto& model = model_for(models, ordering.cliques[i]);
    const Vertex anchor = i == 0 ? v : ordering.separators[i].front();
    RootLimit limit = [&] {
      try {
        return root_limit(model, anchor);
      } catch (const Error& e) {
        throw Error(ErrorCode::NormingUnavailable,
                    "clique " + format_set(ordering.cliques[i]) +
                        " has no root norming at vertex " + std::to_string(anchor) + " (" +
                        e.what() + ")",
                    ordering.cliques[i]);
      }
    }();
    TailNoiseBlock block;
    block.clique_index = i;
    block.clique = ordering.cliques[i];
    block.anchor = anchor;
    block.target = set_without(block.clique, anchor);
    block.family = family_of(model);
    block.law = std::move(limit.law);
    block.alpha = std::move(limit.alpha);
    block.exponent = limit.exponent;
    out.blocks.push_back(std::move(block));
  }
  return out;
}

}  // namespace tailgraph
