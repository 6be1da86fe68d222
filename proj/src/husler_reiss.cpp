#include "tailgraph/husler_reiss.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "tailgraph/error.hpp"
#include "tailgraph/normal.hpp"

namespace tailgraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

VariogramMatrix::VariogramMatrix(IndexedMatrix gamma, double tolerance)
    : gamma_(std::move(gamma)) {
  if (!gamma_.is_square() || gamma_.rows.empty()) {
    throw Error(ErrorCode::InvalidVariogram, "variogram must be square and non-empty");
  }
  if (make_set(gamma_.rows) != gamma_.rows) {
    throw Error(ErrorCode::InvalidVariogram, "variogram index must be sorted");
  }
  const auto& g = gamma_.values;
  if (!g.allFinite()) throw Error(ErrorCode::InvalidVariogram, "non-finite entry");
  if (max_asymmetry(g) > tolerance) {
    throw Error(ErrorCode::InvalidVariogram, "variogram is not symmetric");
  }
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    if (std::fabs(g(i, i)) > tolerance) {
      throw Error(ErrorCode::InvalidVariogram, "variogram diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (i != j && !(g(i, j) > 0.0)) {
        throw Error(ErrorCode::InvalidVariogram,
                    "off-diagonal variogram entries must be positive");
      }
    }
  }
  gamma_.values = 0.5 * (g + g.transpose());
  gamma_.values.diagonal().setZero();
  if (gamma_.rows.size() > 1 &&
      !is_spd(sigma_anchor(*this, gamma_.rows.front()).values, 1e-9)) {
    throw Error(ErrorCode::InvalidVariogram,
                "variogram is not strictly conditionally negative definite");
  }
}

VariogramMatrix VariogramMatrix::restrict_to(const VertexSet& subset) const {
  return VariogramMatrix(gamma_.sub(subset));
}

IndexedMatrix sigma_anchor(const VariogramMatrix& gamma, Vertex c) {
  const auto& idx = gamma.index();
  if (!contains(idx, c)) {
    throw Error(ErrorCode::InvalidVariogram,
                "anchor " + std::to_string(c) + " not in " + format_set(idx));
  }
  VertexSet rest = set_without(idx, c);
  IndexedMatrix out = IndexedMatrix::zero(rest, rest);
  for (std::size_t a = 0; a < rest.size(); ++a)
    for (std::size_t b = 0; b < rest.size(); ++b)
      out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          0.5 * (gamma(rest[a], c) + gamma(rest[b], c) - gamma(rest[a], rest[b]));
  return out;
}

HRCliqueModel::HRCliqueModel(VariogramMatrix gamma) : gamma_(std::move(gamma)) {
  for (Vertex c : gamma_.index()) {
    Anchor a;
    a.rest = set_without(gamma_.index(), c);
    a.sigma = sigma_anchor(gamma_, c).values;
    a.half_gamma.resize(static_cast<Eigen::Index>(a.rest.size()));
    for (std::size_t j = 0; j < a.rest.size(); ++j)
      a.half_gamma(static_cast<Eigen::Index>(j)) = 0.5 * gamma_(a.rest[j], c);
    anchors_.push_back(std::move(a));
  }
}

HRCliqueModel HRCliqueModel::restrict_to(const VertexSet& subset) const {
  return HRCliqueModel(gamma_.restrict_to(subset));
}

namespace {

// Λ at a raw point aligned with model.clique(); fast closed forms for the
// anchored terms of dimension <= 2.
double lambda_raw(const HRCliqueModel& model, const Eigen::VectorXd& y, double& error,
                  const MvnOptions& mvn) {
  const std::size_t d = model.clique().size();
  double total = 0.0;
  error = 0.0;
  std::array<double, kMaxMvnDimension + 1> upper{};
  std::array<Eigen::Index, kMaxMvnDimension + 1> keep{};
  for (std::size_t c = 0; c < d; ++c) {
    const double yc = y(static_cast<Eigen::Index>(c));
    if (yc == kInf) continue;
    const auto& anchor = model.anchor(c);
    std::size_t finite = 0;
    for (std::size_t j = 0, col = 0; j < d; ++j) {
      if (j == c) continue;
      const double yj = y(static_cast<Eigen::Index>(j));
      if (yj != kInf) {
        upper[finite] = std::log(yj / yc) + anchor.half_gamma(static_cast<Eigen::Index>(col));
        keep[finite] = static_cast<Eigen::Index>(col);
        ++finite;
      }
      ++col;
    }
    double p;
    if (finite == 0) {
      p = 1.0;
    } else if (finite == 1) {
      p = normal_cdf(upper[0] / std::sqrt(anchor.sigma(keep[0], keep[0])));
    } else if (finite == 2) {
      const double s0 = std::sqrt(anchor.sigma(keep[0], keep[0]));
      const double s1 = std::sqrt(anchor.sigma(keep[1], keep[1]));
      p = bivariate_normal_cdf(upper[0] / s0, upper[1] / s1,
                               anchor.sigma(keep[0], keep[1]) / (s0 * s1));
    } else {
      std::vector<Eigen::Index> idx(keep.begin(), keep.begin() + finite);
      Eigen::VectorXd u(static_cast<Eigen::Index>(finite));
      for (std::size_t j = 0; j < finite; ++j) u(static_cast<Eigen::Index>(j)) = upper[j];
      const Estimate e = mvn_cdf(u, Eigen::VectorXd::Zero(u.size()), anchor.sigma(idx, idx), mvn);
      p = e.value;
      error += e.error / yc;
    }
    total += p / yc;
  }
  return total;
}

void check_point(const HRCliqueModel& model, const IndexedVector& y) {
  if (y.index != model.clique()) {
    throw Error(ErrorCode::InvalidArgument,
                "exponent measure argument must be indexed by " + format_set(model.clique()));
  }
  for (Eigen::Index i = 0; i < y.values.size(); ++i) {
    if (!(y.values(i) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "exponent measure needs y > 0");
    }
  }
}

// ∂^{|pos|}Λ/∂y_pos at a raw point (positions distinct, coordinates finite).
double derivative_raw(const HRCliqueModel& model, const Eigen::VectorXd& y,
                      const std::vector<Eigen::Index>& pos, const FiniteDifference& fd,
                      const MvnOptions& mvn) {
  if (!(fd.step > 0.0)) throw Error(ErrorCode::InvalidArgument, "fd_step must be > 0");
  double jacobian = 1.0;
  for (auto p : pos) {
    if (!std::isfinite(y(p))) {
      throw Error(ErrorCode::InvalidArgument, "differentiated coordinate is infinite");
    }
    jacobian /= y(p);
  }
  const std::size_t k = pos.size();
  const unsigned corners = 1u << k;
  Eigen::VectorXd shifted = y;
  auto stencil = [&](double h, double& error) {
    double sum = 0.0;
    error = 0.0;
    const double up = std::exp(h), down = std::exp(-h);
    for (unsigned mask = 0; mask < corners; ++mask) {
      double sign = 1.0;
      for (std::size_t b = 0; b < k; ++b) {
        const bool is_up = (mask >> b) & 1u;
        shifted(pos[b]) = y(pos[b]) * (is_up ? up : down);
        if (!is_up) sign = -sign;
      }
      double e = 0.0;
      sum += sign * lambda_raw(model, shifted, e, mvn);
      error += e;
    }
    const double scale = std::pow(2.0 * h, static_cast<double>(k));
    error /= scale;
    return sum / scale;
  };
  double err_h = 0.0, err_h2 = 0.0;
  const double d_h = stencil(fd.step, err_h);
  const double d_h2 = stencil(0.5 * fd.step, err_h2);
  const double value = (4.0 * d_h2 - d_h) / 3.0;
  const double error = (4.0 * err_h2 + err_h) / 3.0;
  if (error > 0.0 && error > fd.noise_tolerance * std::fabs(value)) {
    throw Error(ErrorCode::NumericalBreakdown,
                "finite-difference noise " + fmt(error) + " exceeds tolerance for |" +
                    fmt(value) + "|");
  }
  return value * jacobian;
}

// Σ over set partitions π of S of (-1)^{|π|} Π_{J∈π} Λ_J, for |S| <= 2.
double partition_sum(const HRCliqueModel& model, const Eigen::VectorXd& y,
                     const std::vector<Eigen::Index>& pos, const FiniteDifference& fd,
                     const MvnOptions& mvn) {
  if (pos.size() == 1) return -derivative_raw(model, y, pos, fd, mvn);
  const double joint = derivative_raw(model, y, pos, fd, mvn);
  const double a = derivative_raw(model, y, {pos[0]}, fd, mvn);
  const double b = derivative_raw(model, y, {pos[1]}, fd, mvn);
  return a * b - joint;
}

void check_kernel_shape(const HRCliqueModel& model, const VertexSet& S) {
  if (S.empty() || !is_subset(S, model.clique()) || S == model.clique()) {
    throw Error(ErrorCode::InvalidArgument,
                "separator " + format_set(S) + " must be a non-empty proper subset of " +
                    format_set(model.clique()));
  }
  if (S.size() > 2) {
    throw Error(ErrorCode::InvalidArgument,
                "finite-t kernel supports separators of size <= 2");
  }
}

std::vector<Eigen::Index> iota_positions(std::size_t n) {
  std::vector<Eigen::Index> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<Eigen::Index>(i);
  return out;
}

}  // namespace

Estimate exponent_measure(const HRCliqueModel& model, const IndexedVector& y,
                          const MvnOptions& mvn) {
  check_point(model, y);
  Estimate out{0.0, 0.0};
  out.value = lambda_raw(model, y.values, out.error, mvn);
  return out;
}

double exponent_derivative(const HRCliqueModel& model, const IndexedVector& y,
                           const VertexSet& J, const FiniteDifference& fd,
                           const MvnOptions& mvn) {
  check_point(model, y);
  if (J.empty()) return exponent_measure(model, y, mvn).value;
  if (!is_subset(J, model.clique())) {
    throw Error(ErrorCode::InvalidArgument,
                format_set(J) + " is not a subset of " + format_set(model.clique()));
  }
  return derivative_raw(model, y.values, positions_of(y.index, J), fd, mvn);
}

double spectral_density(const HRCliqueModel& model, const IndexedVector& y,
                        const FiniteDifference& fd, const MvnOptions& mvn) {
  return -exponent_derivative(model, y, model.clique(), fd, mvn);
}

double frechet_from_exponential(double x) {
  if (x == kInf) return kInf;
  return -1.0 / std::log1p(-std::exp(-x));
}

KernelEvaluator::KernelEvaluator(const HRCliqueModel& model, VertexSet S,
                                 FiniteDifference fd, MvnOptions mvn)
    : model_(model), separator_model_(model.restrict_to(S)), S_(std::move(S)),
      fd_(fd), mvn_(mvn) {
  check_kernel_shape(model_, S_);
  rest_ = set_difference(model_.clique(), S_);
  s_pos_ = positions_of(model_.clique(), S_);
  rest_pos_ = positions_of(model_.clique(), rest_);
  y_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model_.clique().size()));
}

void KernelEvaluator::set_separator(const double* x_S) {
  Eigen::VectorXd y_S(static_cast<Eigen::Index>(S_.size()));
  for (std::size_t i = 0; i < S_.size(); ++i) {
    y_S(static_cast<Eigen::Index>(i)) = frechet_from_exponential(x_S[i]);
    y_(s_pos_[i]) = y_S(static_cast<Eigen::Index>(i));
  }
  double err = 0.0;
  separator_lambda_ = lambda_raw(separator_model_, y_S, err, mvn_);
  denominator_ = partition_sum(separator_model_, y_S, iota_positions(S_.size()), fd_, mvn_);
}

double KernelEvaluator::operator()(const double* x_rest) {
  for (std::size_t i = 0; i < rest_.size(); ++i) {
    if (!(x_rest[i] > 0.0)) return 0.0;  // below the exponential support
    y_(rest_pos_[i]) = frechet_from_exponential(x_rest[i]);
  }
  double err = 0.0;
  const double numerator = partition_sum(model_, y_, s_pos_, fd_, mvn_);
  const double factor = std::exp(separator_lambda_ - lambda_raw(model_, y_, err, mvn_));
  return numerator / denominator_ * factor;
}

double transition_kernel(const HRCliqueModel& model, const VertexSet& S,
                         const IndexedVector& x_S, const IndexedVector& x_rest,
                         const FiniteDifference& fd, const MvnOptions& mvn) {
  KernelEvaluator kernel(model, S, fd, mvn);
  if (x_S.index != S || x_rest.index != kernel.rest()) {
    throw Error(ErrorCode::InvalidArgument, "kernel arguments have wrong labels");
  }
  kernel.set_separator(x_S.values.data());
  return kernel(x_rest.values.data());
}

double kernel_limit(const HRCliqueModel& model, const VertexSet& S,
                    const IndexedVector& z_S, const IndexedVector& w,
                    const FiniteDifference& fd, const MvnOptions& mvn) {
  check_kernel_shape(model, S);
  const VertexSet rest = set_difference(model.clique(), S);
  if (z_S.index != S || w.index != rest) {
    throw Error(ErrorCode::InvalidArgument, "kernel_limit arguments have wrong labels");
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(model.clique().size()));
  const auto sp = positions_of(model.clique(), S);
  const auto rp = positions_of(model.clique(), rest);
  for (std::size_t i = 0; i < sp.size(); ++i) y(sp[i]) = std::exp(z_S.values(static_cast<Eigen::Index>(i)));
  for (std::size_t i = 0; i < rp.size(); ++i) y(rp[i]) = std::exp(w.values(static_cast<Eigen::Index>(i)));
  const HRCliqueModel sub = model.restrict_to(S);
  const Eigen::VectorXd y_S = z_S.values.array().exp().matrix();
  return derivative_raw(model, y, sp, fd, mvn) /
         derivative_raw(sub, y_S, iota_positions(S.size()), fd, mvn);
}

HRLimitParams a2_limit_params(const HRCliqueModel& model, const VertexSet& S) {
  if (S.empty()) throw Error(ErrorCode::InvalidArgument, "separator must be non-empty");
  return a2_limit_params(model, S, S.front());
}

HRLimitParams a2_limit_params(const HRCliqueModel& model, const VertexSet& S,
                              Vertex s) {
  const auto& C = model.clique();
  if (S.empty() || !is_subset(S, C) || S == C) {
    throw Error(ErrorCode::InvalidArgument,
                "separator " + format_set(S) + " must be a non-empty proper subset of " +
                    format_set(C));
  }
  if (!contains(S, s)) {
    throw Error(ErrorCode::InvalidArgument, "anchor must lie in the separator");
  }
  const VertexSet D = set_difference(C, S);
  const VertexSet Cs = set_without(C, s);
  const IndexedMatrix Q = spd_inverse(sigma_anchor(model.variogram(), s), 1e-9);
  const IndexedMatrix QD = Q.sub(D);
  const Eigen::MatrixXd QD_inv = spd_inverse(QD.values, 1e-9);

  IndexedMatrix Qtilde = IndexedMatrix::zero(D, S);
  for (Vertex u : S) {
    for (Vertex d : D) {
      if (u == s) {
        double row = 0.0;
        for (Vertex c : Cs) row += Q(d, c);
        Qtilde(d, u) = -row;
      } else {
        Qtilde(d, u) = Q(d, u);
      }
    }
  }
  Eigen::VectorXd half_gamma(static_cast<Eigen::Index>(Cs.size()));
  for (std::size_t j = 0; j < Cs.size(); ++j)
    half_gamma(static_cast<Eigen::Index>(j)) = 0.5 * model.variogram()(Cs[j], s);

  HRLimitParams out;
  out.target = D;
  out.linear_map = IndexedMatrix(D, S, -QD_inv * Qtilde.values);
  out.mean_shift = IndexedVector(D, -QD_inv * Q.block(D, Cs).values * half_gamma);
  out.covariance = IndexedMatrix(D, QD_inv);
  return out;
}

Estimate limit_cdf(const HRLimitParams& params, const IndexedVector& z_S,
                   const IndexedVector& w, const MvnOptions& mvn) {
  if (z_S.index != params.linear_map.cols || w.index != params.target) {
    throw Error(ErrorCode::InvalidArgument, "limit_cdf arguments have wrong labels");
  }
  const Eigen::VectorXd mean =
      params.linear_map.values * z_S.values + params.mean_shift.values;
  return mvn_cdf(w.values, mean, params.covariance.values, mvn);
}

GaussianLaw hr_root_law(const HRCliqueModel& model, Vertex v) {
  const VertexSet rest = set_without(model.clique(), v);
  IndexedVector mean = IndexedVector::constant(rest, 0.0);
  for (Vertex j : rest) mean(j) = -0.5 * model.variogram()(j, v);
  return GaussianLaw(mean, sigma_anchor(model.variogram(), v), 1e-9);
}

const HRCliqueModel& model_for(std::span<const HRCliqueModel> models,
                               const VertexSet& clique) {
  for (const auto& m : models)
    if (m.clique() == clique) return m;
  throw Error(ErrorCode::InvalidArgument,
              "no Hüsler-Reiss model for clique " + format_set(clique));
}

void check_separator_compatibility(const CliqueOrdering& ordering,
                                   std::span<const HRCliqueModel> models,
                                   double tolerance) {
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const auto& S = ordering.separators[i];
    const auto& child = model_for(models, ordering.cliques[i]).variogram().matrix().sub(S);
    for (std::size_t k = 0; k < i; ++k) {
      if (!is_subset(S, ordering.cliques[k])) continue;
      const auto& other = model_for(models, ordering.cliques[k]).variogram().matrix().sub(S);
      const double gap = (child.values - other.values).cwiseAbs().maxCoeff();
      if (gap > tolerance) {
        throw Error(ErrorCode::IncompatibleSeparators,
                    "variograms of " + format_set(ordering.cliques[k]) + " and " +
                        format_set(ordering.cliques[i]) + " differ by " + fmt(gap) +
                        " on separator " + format_set(S),
                    S);
      }
    }
  }
}

namespace {

void require_root(const CliqueOrdering& ordering, Vertex v) {
  if (ordering.size() == 0 || !contains(ordering.cliques[0], v)) {
    throw Error(ErrorCode::InvalidArgument,
                "conditioning vertex " + std::to_string(v) + " must lie in C_1");
  }
}

IndexedVector drop_vertex(const IndexedVector& x, Vertex v) {
  return x.sub(set_without(x.index, v));
}

}  // namespace

IndexedVector tail_model_mean(const CliqueOrdering& ordering,
                              std::span<const HRCliqueModel> models, Vertex v) {
  require_root(ordering, v);
  check_separator_compatibility(ordering, models);
  VertexSet all;
  for (const auto& c : ordering.cliques) all = set_union(all, c);
  IndexedVector mu = IndexedVector::constant(all, 0.0);
  const auto root = hr_root_law(model_for(models, ordering.cliques[0]), v);
  for (Vertex j : root.index()) mu(j) = root.mean(j);
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const auto& S = ordering.separators[i];
    const auto params = a2_limit_params(model_for(models, ordering.cliques[i]), S);
    const IndexedVector update = params.linear_map * mu.sub(S);
    for (Vertex d : params.target) mu(d) = update(d) + params.mean_shift(d);
  }
  return drop_vertex(mu, v);
}

IndexedMatrix tail_model_precision(const CliqueOrdering& ordering,
                                   std::span<const HRCliqueModel> models, Vertex v) {
  require_root(ordering, v);
  check_separator_compatibility(ordering, models);
  VertexSet all;
  for (const auto& c : ordering.cliques) all = set_union(all, c);
  const VertexSet target = set_without(all, v);
  IndexedMatrix Q = IndexedMatrix::zero(target, target);

  // Precision of Z over C_i \ v for every clique, kept for the later cliques
  // that take their separator marginals from it.
  std::vector<IndexedMatrix> local(ordering.size());
  local[0] = spd_inverse(sigma_anchor(model_for(models, ordering.cliques[0]).variogram(), v),
                         1e-9);
  add_into(Q, local[0]);
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const auto& S = ordering.separators[i];
    const auto params = a2_limit_params(model_for(models, ordering.cliques[i]), S);
    const VertexSet& D = params.target;
    const VertexSet Sv = set_without(S, v);
    const Eigen::MatrixXd Qc = spd_inverse(params.covariance.values, 1e-9);
    if (Sv.empty()) {
      local[i] = IndexedMatrix(D, Qc);
      add_into(Q, local[i]);
      continue;
    }
    const auto& parent = local[static_cast<std::size_t>(ordering.parents[i])];
    const Eigen::MatrixXd P =
        spd_inverse(IndexedMatrix(parent.rows, spd_inverse(parent.values, 1e-9)).sub(Sv).values,
                    1e-9);
    const Eigen::MatrixXd A = params.linear_map.block(D, Sv).values;
    const VertexSet block = set_union(D, Sv);
    IndexedMatrix Qi = IndexedMatrix::zero(block, block);
    const auto pd = positions_of(block, D);
    const auto ps = positions_of(block, Sv);
    Qi.values(pd, pd) = Qc;
    Qi.values(pd, ps) = -Qc * A;
    Qi.values(ps, pd) = -(A.transpose() * Qc);
    Qi.values(ps, ps) = P + A.transpose() * Qc * A;
    local[i] = Qi;
    add_into(Q, Qi);
    add_into(Q, IndexedMatrix(Sv, P), -1.0);
  }
  Q.values = 0.5 * (Q.values + Q.values.transpose());
  if (!is_spd(Q.values, 1e-9)) {
    throw Error(ErrorCode::NotSPD, "assembled tail-model precision is not positive definite");
  }
  return Q;
}

ConventionProbe probe_bivariate_convention(const HRCliqueModel& model, Vertex s,
                                           double t, const FiniteDifference& fd) {
  if (model.clique().size() != 2) {
    throw Error(ErrorCode::InvalidArgument, "convention probe needs a bivariate clique");
  }
  const Vertex other = model.clique()[0] == s ? model.clique()[1] : model.clique()[0];
  const double gamma = model.variogram()(s, other);
  ConventionProbe probe{0.0, 0.0, ""};
  for (int k = -2; k <= 2; ++k) {
    const double w = -0.5 * gamma + k * std::sqrt(gamma);
    const double kernel =
        transition_kernel(model, {s}, IndexedVector({s}, Eigen::VectorXd::Constant(1, t)),
                          IndexedVector({other}, Eigen::VectorXd::Constant(1, t + w)), fd);
    const double half = normal_cdf((w + 0.5 * gamma) / std::sqrt(gamma));
    const double full = normal_cdf((w + gamma) / std::sqrt(2.0 * gamma));
    probe.half_discrepancy = std::max(probe.half_discrepancy, std::fabs(kernel - half));
    probe.full_discrepancy = std::max(probe.full_discrepancy, std::fabs(kernel - full));
  }
  probe.matched = probe.half_discrepancy <= probe.full_discrepancy ? "half" : "full";
  return probe;
}

}  // namespace tailgraph
