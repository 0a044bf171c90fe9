#include "nqkv/normality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "nqkv/error.hpp"
#include "nqkv/normal.hpp"

namespace nqkv {

namespace {

struct Summary {
  double mean = 0.0;
  double m2 = 0.0;  // population central moments
  double m3 = 0.0;
  double m4 = 0.0;
};

Summary central_moments(std::span<const double> x) {
  Summary s;
  const double n = static_cast<double>(x.size());
  for (double v : x) s.mean += v;
  s.mean /= n;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    s.m2 += d2;
    s.m3 += d2 * d;
    s.m4 += d2 * d2;
  }
  s.m2 /= n;
  s.m3 /= n;
  s.m4 /= n;
  return s;
}

}  // namespace

std::vector<double> standardize(std::span<const double> sample) {
  require(sample.size() >= 2, ErrorKind::kSampleSize, "standardize needs n >= 2");
  for (double v : sample) {
    if (!std::isfinite(v)) fail(ErrorKind::kData, "non-finite value in sample");
  }
  const auto s = central_moments(sample);
  const double n = static_cast<double>(sample.size());
  const double sd = std::sqrt(s.m2 * n / (n - 1.0));
  require(sd > 0.0 && std::isfinite(sd), ErrorKind::kDegenerateData,
          "sample has zero variance");
  std::vector<double> out(sample.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (sample[i] - s.mean) / sd;
  return out;
}

std::vector<double> standardize(std::span<const float> sample) {
  const std::vector<double> wide(sample.begin(), sample.end());
  return standardize(std::span<const double>(wide));
}

std::vector<QqPoint> qq_points(std::span<const double> sample) {
  require(sample.size() >= 3, ErrorKind::kSampleSize, "Q-Q plot needs n >= 3");
  auto z = standardize(sample);
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  std::vector<QqPoint> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i].theoretical = normal_quantile((static_cast<double>(i) + 0.5) / n);
    out[i].empirical = z[i];
  }
  return out;
}

MomentTest sample_moments(std::span<const double> sample) {
  const auto s = central_moments(sample);
  require(s.m2 > 0.0, ErrorKind::kDegenerateData, "sample has zero variance");
  return MomentTest{s.m3 / std::pow(s.m2, 1.5), s.m4 / (s.m2 * s.m2)};
}

double skewness_z(double g1, std::size_t count) {
  const double n = static_cast<double>(count);
  const double y = g1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  return delta * std::asinh(y / alpha);
}

double kurtosis_z(double b2, std::size_t count) {
  const double n = static_cast<double>(count);
  const double mean = 3.0 * (n - 1.0) / (n + 1.0);
  const double var = 24.0 * n * (n - 2.0) * (n - 3.0) /
                     ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - mean) / std::sqrt(var);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) /
                                      (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_beta1 *
                             (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  require(denom != 0.0, ErrorKind::kDegenerateData, "kurtosis transform is singular");
  const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::fabs(denom)), denom);
  return (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
}

NormalityReport dap_test(std::span<const double> sample, double alpha) {
  require(sample.size() >= 20, ErrorKind::kSampleSize,
          "D'Agostino-Pearson test needs n >= 20, got " + std::to_string(sample.size()));
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::kDomain, "alpha must be in (0, 1)");
  for (double v : sample) {
    if (!std::isfinite(v)) fail(ErrorKind::kData, "non-finite value in sample");
  }
  const auto m = sample_moments(sample);
  NormalityReport r;
  r.n = sample.size();
  r.skew_z = skewness_z(m.skewness, r.n);
  r.kurt_z = kurtosis_z(m.kurtosis, r.n);
  r.k2 = r.skew_z * r.skew_z + r.kurt_z * r.kurt_z;
  r.p_value = std::exp(-0.5 * r.k2);
  r.normal_at_alpha = r.p_value > alpha;
  return r;
}

std::vector<NormalityReport> block_normality_report(const Matrix& m,
                                                    std::size_t block_size,
                                                    double alpha,
                                                    BlockSelector selector) {
  require(block_size >= 20, ErrorKind::kSampleSize, "block size must be >= 20");
  require(m.rows() >= 1 && m.cols() >= 1, ErrorKind::kShape, "empty matrix");
  require(selector.pooled || selector.token < m.rows(), ErrorKind::kShape,
          "token row " + std::to_string(selector.token) + " out of range (" +
              std::to_string(m.rows()) + " rows)");
  const std::size_t blocks = (m.cols() + block_size - 1) / block_size;
  std::vector<NormalityReport> reports;
  reports.reserve(blocks);
  std::vector<double> sample;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(begin + block_size, m.cols());
    sample.clear();
    const std::size_t r0 = selector.pooled ? 0 : selector.token;
    const std::size_t r1 = selector.pooled ? m.rows() : selector.token + 1;
    for (std::size_t r = r0; r < r1; ++r) {
      for (std::size_t c = begin; c < end; ++c) sample.push_back(m(r, c));
    }
    auto report = dap_test(sample, alpha);
    report.block_index = b;
    reports.push_back(report);
  }
  return reports;
}

std::string format_normality_table(std::span<const NormalityReport> reports,
                                   double alpha) {
  char alpha_text[32];
  std::snprintf(alpha_text, sizeof alpha_text, ">%g?", alpha);
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-6s  %-12s  %-6s\n", "block", "pvalue", alpha_text);
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-6zu  %-12.6g  %-6s\n", r.block_index, r.p_value,
                  r.normal_at_alpha ? "yes" : "no");
    out += line;
  }
  return out;
}

}  // namespace nqkv
