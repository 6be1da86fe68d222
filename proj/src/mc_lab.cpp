#include "tailgraph/mc_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "tailgraph/error.hpp"
#include "tailgraph/normal.hpp"
#include "tailgraph/parallel.hpp"
#include "tailgraph/random.hpp"

namespace tailgraph {

namespace {

VertexSet all_vertices(const CliqueOrdering& ordering) {
  VertexSet all;
  for (const auto& c : ordering.cliques) all = set_union(all, c);
  return all;
}

// Exponential margin <-> latent standard normal with the same upper tail.
double latent_from_exponential(double x) { return -normal_quantile_log(-x); }
double exponential_from_latent(double z) { return -log_normal_sf(z); }

struct GaussianPlan {
  std::vector<Eigen::Index> known;
  std::vector<Eigen::Index> unknown;
  Eigen::MatrixXd regression;  // latent unknown on latent known
  Eigen::MatrixXd chol;        // of the conditional covariance
};

struct HrStep {
  HRCliqueModel model;  // restricted to known ∪ {target}
  VertexSet separator;
  std::vector<Eigen::Index> known;
  Eigen::Index target;
};

struct CliquePlan {
  Family family;
  GaussianPlan gaussian;
  std::optional<Eigen::Index> exponential_start;  // Hüsler-Reiss clique with nothing known
  std::vector<HrStep> steps;
};

std::vector<CliquePlan> make_plan(const CliqueOrdering& ordering,
                                  std::span<const CliqueModel> models, const VertexSet& vertices,
                                  std::optional<Vertex> v) {
  check_model_cover(ordering, models);
  check_compatibility(ordering, models);
  std::vector<CliquePlan> plan;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    const auto& C = ordering.cliques[i];
    const auto& model = model_for(models, C);
    VertexSet known = i == 0 ? (v ? VertexSet{*v} : VertexSet{}) : ordering.separators[i];
    const VertexSet unknown = set_difference(C, known);
    CliquePlan p;
    p.family = family_of(model);
    if (p.family == Family::Gaussian) {
      const auto& R = std::get<GaussianCliqueModel>(model).correlation().matrix();
      p.gaussian.known = positions_of(vertices, known);
      p.gaussian.unknown = positions_of(vertices, unknown);
      Eigen::MatrixXd cond = R.sub(unknown).values;
      if (known.empty()) {
        p.gaussian.regression = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(unknown.size()), 0);
      } else {
        const Eigen::MatrixXd cross = R.block(unknown, known).values;
        p.gaussian.regression = cross * spd_inverse(R.sub(known).values, 1e-10);
        cond -= p.gaussian.regression * cross.transpose();
      }
      Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cond + cond.transpose()));
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NotSPD, "conditional covariance of " + format_set(C) +
                                           " is not positive definite");
      }
      p.gaussian.chol = llt.matrixL();
    } else {
      const auto& hr = std::get<HRCliqueModel>(model);
      auto todo = unknown;
      if (known.empty()) {
        p.exponential_start = position_of(vertices, todo.front());
        known.push_back(todo.front());
        todo.erase(todo.begin());
      }
      for (Vertex u : todo) {
        if (known.size() > 2) {
          throw Error(ErrorCode::UnsupportedCliqueShape,
                      "finite-t Hüsler-Reiss simulation supports cliques of at most 3 vertices, "
                      "got " + format_set(C),
                      C);
        }
        p.steps.push_back({hr.restrict_to(set_union(known, {u})), known,
                           positions_of(vertices, known), position_of(vertices, u)});
        known = set_union(known, {u});
      }
    }
    plan.push_back(std::move(p));
  }
  return plan;
}

double invert_kernel(KernelEvaluator& kernel, double u, double hint, double tolerance) {
  double lo = 0.0;
  double hi = std::max(1.0, hint + 2.0);
  const double cap = hint + 60.0;
  while (kernel(&hi) < u) {
    lo = hi;
    if (hi >= cap) return cap;
    hi = std::min(cap, 2.0 * hi);
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (kernel(&mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SampleMatrix run_plan(const CliqueOrdering& ordering, std::span<const CliqueModel> models,
                      std::optional<Vertex> v, double t, std::size_t n, std::uint64_t seed,
                      const SimulationOptions& options) {
  const VertexSet vertices = all_vertices(ordering);
  if (v && !contains(ordering.cliques.front(), *v)) {
    throw Error(ErrorCode::InvalidArgument,
                "conditioning vertex " + std::to_string(*v) + " must lie in C_1");
  }
  const auto plan = make_plan(ordering, models, vertices, v);
  const Eigen::Index d = static_cast<Eigen::Index>(vertices.size());
  const std::optional<Eigen::Index> pv =
      v ? std::optional<Eigen::Index>(position_of(vertices, *v)) : std::nullopt;

  SampleMatrix out;
  out.columns = vertices;
  out.rows.resize(static_cast<Eigen::Index>(n), d);
  out.meta.seed = seed;
  out.meta.route = v ? "conditional" : "graphical";
  if (v) {
    out.meta.t_level = t;
    out.meta.conditioning_vertex = *v;
  }

  parallel_rows(n, options.workers, [&](std::size_t begin, std::size_t end) {
    // Kernel evaluators cache separator state, so each block owns its copies.
    std::vector<std::vector<KernelEvaluator>> kernels(plan.size());
    for (std::size_t c = 0; c < plan.size(); ++c)
      for (const auto& s : plan[c].steps)
        kernels[c].emplace_back(s.model, s.separator, options.fd, options.mvn);
    Eigen::VectorXd x(d), eps;
    std::array<double, 2> known_x{};
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(seed, r);
      x.setZero();
      if (pv) x(*pv) = t + rng.exponential();
      for (std::size_t c = 0; c < plan.size(); ++c) {
        const auto& p = plan[c];
        if (p.family == Family::Gaussian) {
          const auto& g = p.gaussian;
          Eigen::VectorXd latent(static_cast<Eigen::Index>(g.known.size()));
          for (std::size_t k = 0; k < g.known.size(); ++k)
            latent(static_cast<Eigen::Index>(k)) = latent_from_exponential(x(g.known[k]));
          eps.resize(static_cast<Eigen::Index>(g.unknown.size()));
          for (Eigen::Index k = 0; k < eps.size(); ++k) eps(k) = rng.normal();
          const Eigen::VectorXd draw = g.regression * latent + g.chol * eps;
          for (std::size_t k = 0; k < g.unknown.size(); ++k)
            x(g.unknown[k]) = exponential_from_latent(draw(static_cast<Eigen::Index>(k)));
          continue;
        }
        if (p.exponential_start) x(*p.exponential_start) = rng.exponential();
        for (std::size_t s = 0; s < p.steps.size(); ++s) {
          const auto& step = p.steps[s];
          double hint = 0.0;
          for (std::size_t k = 0; k < step.known.size(); ++k) {
            known_x[k] = x(step.known[k]);
            hint = std::max(hint, known_x[k]);
          }
          auto& kernel = kernels[c][s];
          kernel.set_separator(known_x.data());
          x(step.target) =
              invert_kernel(kernel, rng.uniform(), hint, options.inversion_tolerance);
        }
      }
      out.rows.row(static_cast<Eigen::Index>(r)) = x.transpose();
    }
  });
  return out;
}

}  // namespace

SampleMatrix simulate_graphical(const CliqueOrdering& ordering,
                                std::span<const CliqueModel> models, std::size_t n,
                                std::uint64_t seed, const SimulationOptions& options) {
  return run_plan(ordering, models, std::nullopt, 0.0, n, seed, options);
}

SampleMatrix conditional_exceedance(const CliqueOrdering& ordering,
                                    std::span<const CliqueModel> models, Vertex v, double t,
                                    std::size_t n, std::uint64_t seed,
                                    const SimulationOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument, "threshold t must be finite and >= 0");
  }
  return run_plan(ordering, models, v, t, n, seed, options);
}

SampleMatrix renormalize(const SampleMatrix& samples, std::span<const NormingSpec> specs,
                         RenormalizeMode mode) {
  const auto cv = samples.meta.conditioning_vertex;
  if (mode == RenormalizeMode::ConditionOnRoot) {
    if (!cv) {
      throw Error(ErrorCode::InvalidArgument, "root-mode renormalisation needs a conditioning vertex");
    }
    for (const auto& s : specs) {
      if (s.anchor != *cv) {
        throw Error(ErrorCode::InvalidArgument,
                    "root-mode norming of vertex " + std::to_string(s.target) +
                        " must be anchored at " + std::to_string(*cv));
      }
    }
  }
  SampleMatrix out = samples;
  std::vector<bool> done(samples.columns.size(), false);
  for (const auto& s : specs) {
    if (cv && s.target == *cv) {
      throw Error(ErrorCode::InvalidArgument, "the conditioning vertex cannot be renormalised");
    }
    const Eigen::Index j = samples.column_position(s.target);
    const Eigen::Index a = samples.column_position(s.anchor);
    if (done[static_cast<std::size_t>(j)]) {
      throw Error(ErrorCode::InvalidArgument,
                  "two normings for vertex " + std::to_string(s.target));
    }
    done[static_cast<std::size_t>(j)] = true;
    const auto anchor = samples.rows.col(a).array();
    auto col = out.rows.col(j).array();
    if (s.exponent == 0.0) {
      col = samples.rows.col(j).array() - s.alpha * anchor;
    } else {
      col = (samples.rows.col(j).array() - s.alpha * anchor) / anchor.pow(s.exponent);
    }
  }
  for (std::size_t k = 0; k < samples.columns.size(); ++k) {
    const Vertex c = samples.columns[k];
    if (cv && c == *cv) {
      if (samples.meta.t_level) {
        out.rows.col(static_cast<Eigen::Index>(k)).array() -= *samples.meta.t_level;
      }
      continue;
    }
    if (!done[k]) {
      throw Error(ErrorCode::MissingNorming, "no norming for vertex " + std::to_string(c), {c});
    }
  }
  out.meta.margins = "renormalized";
  return out;
}

std::vector<NormingSpec> root_norming_specs(const TailGraphicalModel& model) {
  std::vector<NormingSpec> specs;
  for (std::size_t k = 0; k < model.vertices.size(); ++k) {
    if (model.vertices[k] == model.v) continue;
    specs.push_back({model.vertices[k], model.v, model.normings[k].alpha,
                     model.normings[k].exponent});
  }
  return specs;
}

std::vector<NormingSpec> separator_norming_specs(const TailNoiseModel& model) {
  std::vector<NormingSpec> specs;
  for (const auto& b : model.blocks)
    for (Vertex j : b.target) specs.push_back({j, b.anchor, b.alpha(j), b.exponent});
  return specs;
}

double ks_one_sample(std::span<const double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "KS needs a non-empty sample");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "KS needs non-empty samples");
  }
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

ConvergenceReport convergence_study(const CliqueOrdering& ordering,
                                    std::span<const CliqueModel> models, Vertex v,
                                    const StudyOptions& options) {
  if (options.t_levels.empty() || options.n < 2) {
    throw Error(ErrorCode::InvalidArgument, "study needs t levels and n >= 2");
  }
  ConvergenceReport report;
  report.t_levels = options.t_levels;
  report.n = options.n;

  GaussianLaw limit;
  std::vector<NormingSpec> specs;
  RenormalizeMode mode;
  if (classify_norming(ordering, models, v).theorem_1) {
    const auto model = build_tail_model(ordering, models, v);
    limit = tail_model_law(model);
    specs = root_norming_specs(model);
    mode = RenormalizeMode::ConditionOnRoot;
    report.route = "theorem_1";
  } else {
    const auto noise = build_tail_noise(ordering, models, v);
    limit = noise.joint();
    specs = separator_norming_specs(noise);
    mode = RenormalizeMode::SeparatorBased;
    report.route = "tail_noise";
  }
  const VertexSet& targets = limit.index();
  const double floor = options.ks_constant / std::sqrt(static_cast<double>(options.n));

  std::vector<std::vector<double>> ks_by_level;
  for (std::size_t k = 0; k < options.t_levels.size(); ++k) {
    const double t = options.t_levels[k];
    const auto raw = conditional_exceedance(ordering, models, v, t, options.n,
                                            derive_seed(options.seed, k), options.simulation);
    const auto z = renormalize(raw, specs, mode);
    std::vector<double> level;

    auto add_row = [&](Vertex j, const std::function<double(double)>& cdf) {
      const Eigen::VectorXd col = z.column(j);
      const double ks = ks_one_sample({col.data(), static_cast<std::size_t>(col.size())}, cdf);
      report.ks.push_back({t, j, ks, options.n, options.ks_max, ks < options.ks_max});
      level.push_back(ks);
    };
    add_row(v, [](double e) { return e <= 0.0 ? 0.0 : -std::expm1(-e); });
    for (Vertex j : targets) {
      const double mu = limit.mean(j);
      const double sd = std::sqrt(limit.covariance(j, j));
      add_row(j, [mu, sd](double x) { return normal_cdf((x - mu) / sd); });
    }
    ks_by_level.push_back(std::move(level));

    const auto pos = positions_of(z.columns, targets);
    const Eigen::MatrixXd block = z.rows(Eigen::all, pos);
    const Eigen::VectorXd mean = block.colwise().mean();
    const Eigen::MatrixXd centred = block.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(options.n - 1);
    MomentRow m{t, (mean - limit.mean.values).cwiseAbs().maxCoeff(),
                (cov - limit.covariance.values).cwiseAbs().maxCoeff(),
                IndexedMatrix(targets, cov - limit.covariance.values)};
    report.moments.push_back(std::move(m));
  }

  for (std::size_t k = 1; k < ks_by_level.size(); ++k) {
    for (std::size_t j = 0; j < ks_by_level[k].size(); ++j) {
      const double now = ks_by_level[k][j], before = ks_by_level[k - 1][j];
      if (!(now <= options.trend_slack * before || now <= floor)) report.trend_pass = false;
    }
  }
  report.pass = report.trend_pass &&
                std::all_of(report.ks.begin(), report.ks.end(), [](const KsRow& r) { return r.pass; });
  return report;
}

double chi_estimator(const SampleMatrix& samples, const VertexSet& A, double q) {
  if (A.empty()) throw Error(ErrorCode::EmptySubset, "chi needs a non-empty vertex subset");
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::QuantileOutOfRange, "quantile level must lie in (0, 1)");
  }
  const auto n = static_cast<std::size_t>(samples.n());
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(n)));
  if (k >= n) {
    throw Error(ErrorCode::QuantileOutOfRange, "no observations above the quantile level");
  }
  std::vector<char> above(n, 1);
  std::vector<std::size_t> order(n);
  for (Vertex a : A) {
    const Eigen::VectorXd col = samples.column(a);
    // Ranks with ties broken by row index; rank > k iff the row sorts after the k-th.
    auto less = [&](std::size_t i, std::size_t j) {
      return col(static_cast<Eigen::Index>(i)) < col(static_cast<Eigen::Index>(j)) ||
             (col(static_cast<Eigen::Index>(i)) == col(static_cast<Eigen::Index>(j)) && i < j);
    };
    if (k == 0) continue;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), less);
    const std::size_t pivot = order[k - 1];
    for (std::size_t r = 0; r < n; ++r)
      if (above[r] && !less(pivot, r)) above[r] = 0;
  }
  const auto count = static_cast<double>(std::count(above.begin(), above.end(), 1));
  return count / static_cast<double>(n - k);
}

double factorized_density(const CliqueOrdering& ordering, std::span<const HRCliqueModel> models,
                          const IndexedVector& y, const FiniteDifference& fd,
                          const MvnOptions& mvn) {
  double out = 1.0;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    const auto& C = ordering.cliques[i];
    const auto& model = model_for(models, C);
    out *= spectral_density(model, y.sub(C), fd, mvn);
    if (i == 0) continue;
    const auto& S = ordering.separators[i];
    if (S.size() == 1) {
      out /= std::pow(y(S.front()), -2.0);
    } else {
      out /= spectral_density(model.restrict_to(S), y.sub(S), fd, mvn);
    }
  }
  return out;
}

MrvReport mrv_checks(const CliqueOrdering& ordering, std::span<const HRCliqueModel> models,
                     const MrvOptions& options) {
  const VertexSet vertices = all_vertices(ordering);
  const double d = static_cast<double>(vertices.size());
  RandomStream rng(options.seed, 0);
  MrvReport report;

  for (int p = 0; p < options.points; ++p) {
    IndexedVector y = IndexedVector::constant(vertices, 1.0);
    for (Eigen::Index k = 0; k < y.values.size(); ++k) y.values(k) = std::exp(2.0 * rng.uniform() - 1.0);
    IndexedVector ys = y;
    ys.values *= options.scale;
    const double base = factorized_density(ordering, models, y, options.fd, options.mvn);
    const double scaled = factorized_density(ordering, models, ys, options.fd, options.mvn);
    const double rel = std::fabs(scaled * std::pow(options.scale, d + 1.0) / base - 1.0);
    report.homogeneity_error = std::max(report.homogeneity_error, rel);
  }
  report.homogeneity_pass = report.homogeneity_error < options.homogeneity_tol;

  report.compatibility_pass = true;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const auto& S = ordering.separators[i];
    for (std::size_t k = 0; k < i; ++k) {
      if (!is_subset(S, ordering.cliques[k])) continue;
      const auto& child = model_for(models, ordering.cliques[i]);
      const auto& other = model_for(models, ordering.cliques[k]);
      for (int p = 0; p < 5; ++p) {
        IndexedVector yc = IndexedVector::constant(child.clique(), kInf);
        IndexedVector yo = IndexedVector::constant(other.clique(), kInf);
        for (Vertex s : S) {
          const double value = std::exp(2.0 * rng.uniform() - 1.0);
          yc(s) = value;
          yo(s) = value;
        }
        const Estimate a = exponent_measure(child, yc, options.mvn);
        const Estimate b = exponent_measure(other, yo, options.mvn);
        const double gap = std::fabs(a.value - b.value);
        const double allowance = 3.0 * std::hypot(a.error, b.error) +
                                 1e-12 * std::max(1.0, std::fabs(a.value));
        report.compatibility_gap = std::max(report.compatibility_gap, gap);
        report.compatibility_allowance = std::max(report.compatibility_allowance, allowance);
        if (gap > allowance) report.compatibility_pass = false;
      }
    }
  }

  report.density_at_one = factorized_density(
      ordering, models, IndexedVector::constant(vertices, 1.0), options.fd, options.mvn);
  report.density_pass = std::isfinite(report.density_at_one) && report.density_at_one > 0.0;
  return report;
}

}  // namespace tailgraph
