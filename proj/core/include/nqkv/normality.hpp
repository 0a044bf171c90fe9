#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nqkv/matrix.hpp"

namespace nqkv {

struct NormalityReport {
  std::size_t block_index = 0;
  std::size_t n = 0;
  double skew_z = 0.0;
  double kurt_z = 0.0;
  double k2 = 0.0;
  double p_value = 1.0;
  bool normal_at_alpha = true;
};

// Mean 0, sample standard deviation (n-1 divisor) 1.
std::vector<double> standardize(std::span<const double> sample);
std::vector<double> standardize(std::span<const float> sample);

struct QqPoint {
  double theoretical = 0.0;
  double empirical = 0.0;
};

// Sorted standardized sample against normal quantiles at (i + 0.5) / n.
std::vector<QqPoint> qq_points(std::span<const double> sample);

struct MomentTest {
  double skewness = 0.0;  // g1 = m3 / m2^1.5
  double kurtosis = 0.0;  // b2 = m4 / m2^2 (not excess)
};
MomentTest sample_moments(std::span<const double> sample);

// Normal-approximation z of the sample skewness (D'Agostino transform).
double skewness_z(double g1, std::size_t n);
// Normal-approximation z of the sample kurtosis (Anscombe-Glynn transform).
double kurtosis_z(double b2, std::size_t n);

// D'Agostino-Pearson omnibus test. n >= 20.
NormalityReport dap_test(std::span<const double> sample, double alpha);

struct BlockSelector {
  // Row tested per block; ignored when pooled.
  std::size_t token = 0;
  // Pool the block's columns across every row.
  bool pooled = false;
};

std::vector<NormalityReport> block_normality_report(const Matrix& m,
                                                    std::size_t block_size,
                                                    double alpha,
                                                    BlockSelector selector = {});

// Aligned text table with columns block | pvalue | >alpha?
std::string format_normality_table(std::span<const NormalityReport> reports,
                                   double alpha);

}  // namespace nqkv
