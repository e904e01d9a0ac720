#pragma once

// Standard normal cdf / log-pdf / quantile.

namespace cklcop {

// Phi(z), computed through erfc so both tails keep full relative accuracy.
double std_normal_cdf(double z);

// log phi(z), evaluated analytically (never underflows for finite z).
double std_normal_log_pdf(double z);

// Phi^{-1}(p) for p strictly inside (0,1).
// Wichura's AS 241 rational approximation polished by one Newton step
// against the erfc-based cdf; |Phi(result) - p| stays below 1e-12.
// Throws std::domain_error for p outside (0,1) or NaN.
double std_normal_quantile(double p);

// Limit-extended variant used by basis functions: returns -inf at 0 and
// +inf at 1 instead of throwing. Still throws outside [0,1].
double std_normal_quantile_extended(double p);

}  // namespace cklcop
