#include "tailgraph/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace tailgraph {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// AS241 tail branch; r = sqrt(-log(min(p, 1-p))).  Returns |Φ^{-1}| magnitude.
double quantile_tail(double r) {
  if (r <= 5.0) {
    r -= 1.6;
    return (((((((r * 7.7454501427834140764e-4 + .0227238449892691845833) * r +
                 .24178072517745061177) * r + 1.27045825245236838258) * r +
               3.64784832476320460504) * r + 5.7694972214606914055) * r +
             4.6303378461565452959) * r + 1.42343711074968357734) /
           (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                 .0151986665636164571966) * r + .14810397642748007459) * r +
               .68976733498510000455) * r + 1.6763848301838038494) * r +
             2.05319162663775882187) * r + 1.0);
  }
  r -= 5.0;
  return (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
               .0012426609473880784386) * r + .026532189526576123093) * r +
             .29656057182850489123) * r + 1.7848265399172913358) * r +
           5.4637849111641143699) * r + 6.6579046435011037772) /
         (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
               1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
             .0148753612908506148525) * r + .13692988092273580531) * r +
           .59983220655588793769) * r + 1.0);
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_normal_sf(double x) {
  if (x < 30.0) return std::log(normal_sf(x));
  const double x2 = 1.0 / (x * x);
  const double series = 1.0 - x2 * (1.0 - 3.0 * x2 * (1.0 - 5.0 * x2 * (1.0 - 7.0 * x2)));
  return -0.5 * x * x - std::log(x) - 0.91893853320467274178 + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0)) return p == 0.0 ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::quiet_NaN();
  if (!(p < 1.0)) return p == 1.0 ? std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::quiet_NaN();
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  const double tail = q < 0 ? p : 1.0 - p;
  const double value = quantile_tail(std::sqrt(-std::log(tail)));
  return q < 0 ? -value : value;
}

double normal_quantile_log(double log_p) {
  if (log_p >= -700.0) return normal_quantile(std::exp(log_p));
  // The AS241 tail fit is only calibrated down to p ~ 1e-300; polish with
  // Newton steps on log Φ(x), whose slope is φ(x)/Φ(x).
  double x = -quantile_tail(std::sqrt(-log_p));
  for (int k = 0; k < 3; ++k) {
    const double log_cdf = log_normal_sf(-x);
    const double slope = std::exp(-0.5 * x * x - 0.5 * std::log(2.0 * kPi) - log_cdf);
    x -= (log_cdf - log_p) / slope;
  }
  return x;
}

double bivariate_normal_upper(double h, double k, double r) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (h == inf || k == inf) return 0.0;
  if (h == -inf) return k == -inf ? 1.0 : normal_sf(k);
  if (k == -inf) return normal_sf(h);
  if (r == 0.0) return normal_sf(h) * normal_sf(k);

  static constexpr std::array<double, 3> w6{0.1713244923791705, 0.3607615730481384,
                                            0.4679139345726904};
  static constexpr std::array<double, 3> x6{0.9324695142031522, 0.6612093864662647,
                                            0.2386191860831970};
  static constexpr std::array<double, 6> w12{
      .04717533638651177, 0.1069393259953183, 0.1600783285433464,
      0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
  static constexpr std::array<double, 6> x12{
      0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
      0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
  static constexpr std::array<double, 10> w20{
      .01761400713915212, .04060142980038694, .06267204833410906,
      .08327674157670475, 0.1019301198172404, 0.1181945319615184,
      0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
      0.1527533871307259};
  static constexpr std::array<double, 10> x20{
      0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
      0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
      0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
      0.07652652113349733};

  const double* w;
  const double* x;
  int lg;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    w = w6.data(); x = x6.data(); lg = 3;
  } else if (ar < 0.75) {
    w = w12.data(); x = x12.data(); lg = 6;
  } else {
    w = w20.data(); x = x20.data(); lg = 10;
  }
  constexpr double tp = 2.0 * kPi;
  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double sn = std::sin(asr * (1.0 + is * x[i]));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return bvn * asr / tp + normal_sf(h) * normal_sf(k);
  }
  if (r < 0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0)
      bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
                                 c * d * as * as / 5.0);
    if (hk > -100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(tp) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        double xs = a * (1.0 + is * x[i]);
        xs *= xs;
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / tp;
  }
  if (r > 0) return std::clamp(bvn + normal_sf(std::max(h, k)), 0.0, 1.0);
  bvn = -bvn;
  if (k > h) bvn += h < 0 ? normal_cdf(k) - normal_cdf(h) : normal_sf(h) - normal_sf(k);
  return std::clamp(bvn, 0.0, 1.0);
}

double bivariate_normal_cdf(double h, double k, double r) {
  return bivariate_normal_upper(-h, -k, r);
}

}  // namespace tailgraph
