#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "nqkv/error.hpp"
#include "nqkv/normal.hpp"
#include "nqkv/normality.hpp"
#include "nqkv/rng.hpp"

namespace nqkv {
namespace {

std::vector<double> normal_sample(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

TEST(Standardize, TwoPoints) {
  const std::vector<double> x{-1.0, 1.0};
  const auto z = standardize(x);
  EXPECT_NEAR(z[0], -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(z[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Standardize, MeanZeroSampleStdOne) {
  Rng rng(1);
  auto x = normal_sample(rng, 1000);
  for (auto& v : x) v = 5.0 * v + 3.0;
  const auto z = standardize(x);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(ss / (z.size() - 1)), 1.0, 1e-9);
}

TEST(Standardize, SeededNormalNearlyUnchanged) {
  Rng rng(2);
  const auto x = normal_sample(rng, 4096);
  const auto z = standardize(x);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  EXPECT_LT(std::fabs(mean), 0.05);
  double max_shift = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) max_shift = std::max(max_shift, std::fabs(z[i] - x[i]));
  EXPECT_LT(max_shift, 0.25);
}

TEST(Standardize, AffineInvariantAndIdempotent) {
  Rng rng(3);
  const auto x = normal_sample(rng, 500);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.5 * x[i] - 11.0;
  const auto zx = standardize(x);
  const auto zy = standardize(y);
  const auto zz = standardize(zx);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(zx[i], zy[i], 1e-9);
    EXPECT_NEAR(zx[i], zz[i], 1e-9);
  }
}

TEST(Standardize, Errors) {
  const std::vector<double> constant(10, 4.0);
  try {
    standardize(constant);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateData);
  }
  const std::vector<double> one{1.0};
  EXPECT_THROW(standardize(one), Error);
}

TEST(QqPoints, TheoreticalAntisymmetricAndIncreasing) {
  Rng rng(4);
  const auto x = normal_sample(rng, 101);
  const auto pts = qq_points(x);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].theoretical, -pts[pts.size() - 1 - i].theoretical, 1e-12);
    if (i > 0) {
      EXPECT_LT(pts[i - 1].theoretical, pts[i].theoretical);
      EXPECT_LE(pts[i - 1].empirical, pts[i].empirical);
    }
  }
}

TEST(QqPoints, SampleAtTheoreticalQuantilesLiesOnIdentity) {
  const std::size_t n = 200;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = normal_quantile((i + 0.5) / n);
  const auto pts = qq_points(x);
  // Standardization rescales by the sample std, which is slightly below 1.
  double max_dev = 0.0;
  for (const auto& p : pts) max_dev = std::max(max_dev, std::fabs(p.empirical - p.theoretical));
  EXPECT_LT(max_dev, 0.05);
}

TEST(QqPoints, SeededNormalSlopeNearOne) {
  Rng rng(5);
  const auto pts = qq_points(normal_sample(rng, 4096));
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : pts) {
    sxy += p.theoretical * p.empirical;
    sxx += p.theoretical * p.theoretical;
  }
  const double slope = sxy / sxx;  // both sides have mean ~0
  EXPECT_GE(slope, 0.97);
  EXPECT_LE(slope, 1.03);
}

// Frozen from scipy.stats.skewtest / kurtosistest / normaltest (scipy 1.15).
struct ScipyCase {
  std::vector<double> sample;
  double skew_z;
  double kurt_z;
  double k2;
  double p_value;
};

std::vector<ScipyCase> scipy_cases() {
  std::vector<ScipyCase> cases;
  {
    ScipyCase c;
    for (int i = 0; i < 50; ++i) c.sample.push_back((i * i * 31 + 7 * i) % 101);
    c.skew_z = 0.5540778809473704;
    c.kurt_z = -2.4154517180275175;
    c.k2 = 6.141409300277214;
    c.p_value = 0.04638845570631038;
    cases.push_back(c);
  }
  {
    ScipyCase c;
    for (long i = 1; i <= 300; ++i) {
      const double v = static_cast<double>((i * i * i) % 1009);
      c.sample.push_back(v * v);
    }
    c.skew_z = 4.894059208115136;
    c.kurt_z = -2.888134241434676;
    c.k2 = 32.293134929084005;
    c.p_value = 9.719296889748982e-08;
    cases.push_back(c);
  }
  {
    ScipyCase c;
    for (long i = 0; i < 1000; ++i) c.sample.push_back(static_cast<double>((i * 7919) % 1003));
    c.skew_z = -0.06770900294714277;
    c.kurt_z = -26.915424788131606;
    c.k2 = 724.4446760346494;
    c.p_value = 4.884694160895458e-158;
    cases.push_back(c);
  }
  return cases;
}

TEST(DapTest, MatchesScipyReferenceValues) {
  for (const auto& c : scipy_cases()) {
    const auto r = dap_test(c.sample, 0.05);
    EXPECT_NEAR(r.skew_z, c.skew_z, 1e-9 * std::max(1.0, std::fabs(c.skew_z)));
    EXPECT_NEAR(r.kurt_z, c.kurt_z, 1e-9 * std::max(1.0, std::fabs(c.kurt_z)));
    EXPECT_NEAR(r.k2, c.k2, 1e-9 * c.k2);
    EXPECT_NEAR(r.p_value / c.p_value, 1.0, 1e-8);
    EXPECT_EQ(r.normal_at_alpha, c.p_value > 0.05);
  }
}

TEST(DapTest, ExactlySymmetricSampleHasZeroSkewZ) {
  std::vector<double> sample;
  for (long i = 0; i < 1000; ++i) sample.push_back(static_cast<double>((i * 7919) % 1000));
  const auto r = dap_test(sample, 0.05);
  EXPECT_NEAR(r.skew_z, 0.0, 1e-9);
  EXPECT_NEAR(r.kurt_z, -27.109874133278968, 1e-8);
}

TEST(DapTest, PValueIsChiSquaredTwoSurvival) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto r = dap_test(normal_sample(rng, 64), 0.05);
    EXPECT_GE(r.k2, 0.0);
    EXPECT_NEAR(r.p_value, std::exp(-r.k2 / 2.0), 1e-12);
    EXPECT_EQ(r.normal_at_alpha, r.p_value > 0.05);
  }
  EXPECT_EQ(std::exp(-0.0 / 2.0), 1.0);
}

TEST(DapTest, AffineInvariant) {
  Rng rng(7);
  const auto x = normal_sample(rng, 300);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] + 7.0;
  EXPECT_NEAR(dap_test(x, 0.05).k2, dap_test(y, 0.05).k2, 1e-9);
}

TEST(DapTest, Errors) {
  const std::vector<double> small(19, 1.0);
  try {
    dap_test(small, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSampleSize);
  }
  const std::vector<double> constant(50, 2.0);
  try {
    dap_test(constant, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateData);
  }
}

TEST(DapTest, DetectsUniformData) {
  Rng rng(8);
  std::vector<double> x(4096);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  EXPECT_LT(dap_test(x, 0.05).p_value, 1e-6);
}

TEST(BlockReport, SixteenBlocksForTableShape) {
  Rng rng(9);
  const auto m = rng.normal_matrix(2, 4096);
  const auto reports = block_normality_report(m, 256, 0.05);
  ASSERT_EQ(reports.size(), 16u);
  for (std::size_t b = 0; b < 16; ++b) {
    EXPECT_EQ(reports[b].block_index, b);
    EXPECT_EQ(reports[b].n, 256u);
  }
  const auto pooled = block_normality_report(m, 256, 0.05, BlockSelector{0, true});
  EXPECT_EQ(pooled[0].n, 512u);
  const auto table = format_normality_table(reports, 0.05);
  EXPECT_NE(table.find("block"), std::string::npos);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 17);
}

TEST(BlockReport, SingleTokenMatchesDirectTest) {
  Rng rng(10);
  const auto m = rng.normal_matrix(3, 100);
  const auto reports = block_normality_report(m, 50, 0.05, BlockSelector{2, false});
  const std::vector<double> block(m.row(2).begin() + 50, m.row(2).end());
  EXPECT_EQ(reports[1].k2, dap_test(block, 0.05).k2);
}

TEST(BlockReport, UniformBlockIsFlagged) {
  int exact_hits = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(1000 + s);
    auto m = rng.normal_matrix(1, 4096);
    for (std::size_t c = 5 * 256; c < 6 * 256; ++c) m(0, c) = static_cast<float>(rng.uniform(-1, 1));
    const auto reports = block_normality_report(m, 256, 0.05);
    exact_hits += reports[5].normal_at_alpha ? 0 : 1;
  }
  EXPECT_GE(exact_hits, 99);
}

TEST(BlockReport, Errors) {
  Rng rng(11);
  const auto m = rng.normal_matrix(2, 100);
  EXPECT_THROW(block_normality_report(m, 19, 0.05), Error);
  EXPECT_THROW(block_normality_report(m, 50, 0.05, BlockSelector{2, false}), Error);
  // Ragged final block of 10 elements is below the sample-size floor.
  try {
    block_normality_report(m, 45, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSampleSize);
  }
}

}  // namespace
}  // namespace nqkv
