#include "cklcop/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace cklcop {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;       // sqrt(2)
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2 pi))

// AS 241 (Wichura 1988), rational approximation PPND16; coefficients
// as published, accurate to ~1 part in 1e16 before polishing.
double as241(double p) {
  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {  // 0.075 <= p <= 0.925
    double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) *
                    r +
                45921.953931549871457) *
                   r +
               13731.693765509461125) *
                  r +
              1971.5909503065514427) *
                 r +
             133.14166789178437745) *
                r +
            3.387132872796366608) /
           (((((((r * 5226.495278852854561 + 28729.085735721942674) * r +
                 39307.89580009271061) *
                    r +
                21213.794301586595867) *
                   r +
               5394.1960214247511077) *
                  r +
              687.1870074920579083) *
                 r +
             42.313330701600911252) *
                r +
            1.0);
  }
  double r = q > 0 ? 1.0 - p : p;  // min(p, 1-p) < 0.075
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {  // min(p,1-p) >= exp(-25)
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) *
                   r +
               1.27045825245236838258) *
                  r +
              3.64784832476320460504) *
                 r +
             5.7694972214606914055) *
                r +
            4.6303378461565452959) *
               r +
           1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) *
                   r +
               0.14810397642748007459) *
                  r +
              0.68976733498510000455) *
                 r +
             1.6763848301838038494) *
                r +
            2.05319162663775882187) *
               r +
           1.0);
  } else {  // very close to 0 or 1
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) *
                   r +
               0.026532189526576123093) *
                  r +
              0.29656057182850489123) *
                 r +
             1.7848265399172913358) *
                r +
            5.4637849111641143699) *
               r +
           6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) *
                   r +
               7.868691311456132591e-4) *
                  r +
              0.0148753612908506148525) *
                 r +
             0.13692988092273580531) *
                r +
            0.59983220655588793769) *
               r +
           1.0);
  }
  return q < 0 ? -val : val;
}

}  // namespace

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double std_normal_log_pdf(double z) { return -kLogSqrt2Pi - 0.5 * z * z; }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_quantile: p must lie strictly in (0,1)");
  }
  double z = as241(p);
  // One Newton step against the erfc-based cdf. The residual is formed
  // in whichever tail keeps all quantities small, so no cancellation.
  double pdf = std::exp(std_normal_log_pdf(z));
  if (pdf > 1e-300) {
    double residual = p < 0.5 ? 0.5 * std::erfc(-z / kSqrt2) - p
                              : (1.0 - p) - 0.5 * std::erfc(z / kSqrt2);
    z -= residual / pdf;
  }
  return z;
}

double std_normal_quantile_extended(double p) {
  if (p == 0.0) return -HUGE_VAL;
  if (p == 1.0) return HUGE_VAL;
  return std_normal_quantile(p);
}

}  // namespace cklcop
