#include "tailgraph/mvn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "tailgraph/error.hpp"
#include "tailgraph/normal.hpp"
#include "tailgraph/parallel.hpp"
#include "tailgraph/random.hpp"

namespace tailgraph {

namespace {

constexpr std::array<double, 8> kPrimes{2, 3, 5, 7, 11, 13, 17, 19};

double genz_integrand(const Eigen::VectorXd& b, const Eigen::MatrixXd& L,
                      const double* w, Eigen::VectorXd& y) {
  const Eigen::Index d = b.size();
  double f = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) s += L(i, j) * y(j);
    const double e = normal_cdf((b(i) - s) / L(i, i));
    f *= e;
    if (f == 0.0) return 0.0;
    if (i + 1 < d) {
      const double u = std::clamp(w[i] * e, 1e-300, 1.0 - 1e-16);
      y(i) = normal_quantile(u);
    }
  }
  return f;
}

Estimate lattice_cdf(const Eigen::VectorXd& b, const Eigen::MatrixXd& cov,
                        const MvnOptions& options) {
  const Eigen::Index d = b.size();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotSPD, "MVN covariance is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const int batches = std::max(2, options.batches);
  std::vector<std::array<double, kMaxMvnDimension>> shifts(batches);
  for (int k = 0; k < batches; ++k) {
    RandomStream rng(options.seed, static_cast<std::uint64_t>(k));
    for (auto& s : shifts[k]) s = rng.uniform();
  }
  std::array<double, kMaxMvnDimension> generator{};
  for (Eigen::Index i = 0; i < d; ++i) {
    const double root = std::sqrt(kPrimes[static_cast<std::size_t>(i)]);
    generator[static_cast<std::size_t>(i)] = root - std::floor(root);
  }
  Eigen::VectorXd y(d);
  std::array<double, kMaxMvnDimension> w{};
  Estimate result{0.0, std::numeric_limits<double>::infinity()};
  for (int points = std::max(16, options.initial_points);; points *= 2) {
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < batches; ++k) {
      double batch = 0.0;
      for (int p = 1; p <= points; ++p) {
        for (Eigen::Index i = 0; i + 1 < d; ++i) {
          const auto ii = static_cast<std::size_t>(i);
          double x = p * generator[ii] + shifts[k][ii];
          x -= std::floor(x);
          w[ii] = 1.0 - std::fabs(2.0 * x - 1.0);
        }
        batch += genz_integrand(b, L, w.data(), y);
      }
      batch /= points;
      sum += batch;
      sum_sq += batch * batch;
    }
    const double mean = sum / batches;
    const double var = std::max(0.0, (sum_sq - batches * mean * mean) / (batches - 1));
    result = {std::clamp(mean, 0.0, 1.0), std::sqrt(var / batches)};
    if (result.error <= options.accuracy || points * 2 > options.max_points) break;
  }
  return result;
}

}  // namespace

Estimate mvn_cdf(const Eigen::VectorXd& upper, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& covariance, const MvnOptions& options) {
  const Eigen::Index d = upper.size();
  if (mean.size() != d || covariance.rows() != d || covariance.cols() != d) {
    throw Error(ErrorCode::InvalidArgument, "MVN arguments have mismatched sizes");
  }
  if (d > kMaxMvnDimension) {
    throw Error(ErrorCode::DimensionTooLarge,
                "MVN dimension " + std::to_string(d) + " exceeds " +
                    std::to_string(kMaxMvnDimension));
  }
  if (!(options.accuracy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "MVN accuracy must be positive");
  }
  if (!is_spd(covariance)) {
    throw Error(ErrorCode::NotSPD, "MVN covariance is not symmetric positive definite");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::isnan(upper(i))) throw Error(ErrorCode::InvalidArgument, "NaN MVN limit");
    if (upper(i) == -std::numeric_limits<double>::infinity()) return {0.0, 0.0};
    if (upper(i) != std::numeric_limits<double>::infinity()) keep.push_back(i);
  }
  if (keep.empty()) return {1.0, 0.0};
  const Eigen::VectorXd b = upper(keep) - mean(keep);
  const Eigen::MatrixXd cov = covariance(keep, keep);
  if (keep.size() == 1) return {normal_cdf(b(0) / std::sqrt(cov(0, 0))), 0.0};
  if (keep.size() == 2) {
    const double s0 = std::sqrt(cov(0, 0)), s1 = std::sqrt(cov(1, 1));
    return {bivariate_normal_cdf(b(0) / s0, b(1) / s1, cov(0, 1) / (s0 * s1)), 0.0};
  }
  return lattice_cdf(b, cov, options);
}

Estimate mvn_cdf(const IndexedVector& upper, const GaussianLaw& law,
                    const MvnOptions& options) {
  if (upper.index != law.index()) {
    throw Error(ErrorCode::InvalidArgument, "MVN limit labels do not match the law");
  }
  return mvn_cdf(upper.values, law.mean.values, law.covariance.values, options);
}

SampleMatrix mvn_sample(const GaussianLaw& law, std::size_t n, std::uint64_t seed,
                        int workers) {
  const Eigen::Index d = static_cast<Eigen::Index>(law.dimension());
  SampleMatrix out;
  out.columns = law.index();
  out.rows.resize(static_cast<Eigen::Index>(n), d);
  out.meta.seed = seed;
  out.meta.route = "mvn";
  out.meta.margins = "gaussian";
  if (n == 0 || d == 0) return out;
  Eigen::LLT<Eigen::MatrixXd> llt(law.covariance.values);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotSPD, "covariance is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  parallel_rows(n, workers, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(d);
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(seed, r);
      for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
      out.rows.row(static_cast<Eigen::Index>(r)) = (law.mean.values + L * z).transpose();
    }
  });
  return out;
}

Eigen::Index SampleMatrix::column_position(Vertex v) const {
  return position_of(columns, v);
}

}  // namespace tailgraph
