#pragma once

namespace nqkv {

// Standard normal CDF.
double normal_cdf(double z);

// Inverse of normal_cdf. Throws ErrorKind::kDomain unless 0 < p < 1.
// Absolute error is below 1e-12 over (1e-300, 1 - 1e-16).
double normal_quantile(double p);

}  // namespace nqkv
