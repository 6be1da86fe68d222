#pragma once

namespace tailgraph {

constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x);
double normal_cdf(double x);
// 1 - Φ(x) without cancellation for large x.
double normal_sf(double x);
// log(1 - Φ(x)), accurate far into the upper tail.
double log_normal_sf(double x);

// Φ^{-1}(p) by Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double normal_quantile(double p);
// Φ^{-1}(p) for p = exp(log_p) when p <= 0.5; avoids underflow of p itself.
double normal_quantile_log(double log_p);

// P(X > h, Y > k) for a standard bivariate normal with correlation r
// (Drezner-Wesolowsky with Genz's refinements; about 1e-15 absolute).
double bivariate_normal_upper(double h, double k, double r);
// P(X <= h, Y <= k).
double bivariate_normal_cdf(double h, double k, double r);

}  // namespace tailgraph
