#pragma once

#include <cstdint>

#include "tailgraph/indexed.hpp"
#include "tailgraph/sample_matrix.hpp"

namespace tailgraph {

struct MvnOptions {
  double accuracy = 1e-6;       // target standard error for the lattice rule
  std::uint64_t seed = 0x6d766e;
  int batches = 8;              // random shifts
  int initial_points = 1024;    // lattice size of the first pass, doubled on demand
  int max_points = 1 << 18;
};

struct Estimate {
  double value;
  double error;  // standard error; 0 for the closed-form paths
};

constexpr int kMaxMvnDimension = 8;

// P(X <= upper) for X ~ law.  Coordinates with upper = +inf are marginalised
// out; any -inf gives 0.  Dimensions one and two after marginalisation are
// evaluated in closed form; higher ones use a randomised Richtmyer lattice on
// Genz's separation-of-variables integrand.  Throws DimensionTooLarge above
// kMaxMvnDimension.
Estimate mvn_cdf(const IndexedVector& upper, const GaussianLaw& law,
                    const MvnOptions& options = {});
Estimate mvn_cdf(const Eigen::VectorXd& upper, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& covariance, const MvnOptions& options = {});

// Row r uses stream (seed, r): the output is independent of `workers`.
SampleMatrix mvn_sample(const GaussianLaw& law, std::size_t n, std::uint64_t seed,
                        int workers = 1);

}  // namespace tailgraph
