#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "dqa/format.hpp"
#include "dqa/quantkit.hpp"
#include "oracles.hpp"

using namespace dqa;
using namespace dqa::quantkit;

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

// Cell masses for the per-component variance-1/2 source, computed with erfc.
std::vector<double> half_variance_masses(const QuantizerDesign& d) {
  std::vector<double> p;
  for (int j = 0; j < d.levels(); ++j) {
    const double a = d.thresholds[static_cast<std::size_t>(j)];
    const double b = d.thresholds[static_cast<std::size_t>(j) + 1];
    // X ~ N(0, 1/2): P(X <= t) = 0.5 erfc(-t)
    p.push_back(0.5 * std::erfc(-b) - 0.5 * std::erfc(-a));
  }
  return p;
}

}  // namespace

TEST(NormalCdf, ValuesAndSymmetry) {
  EXPECT_DOUBLE_EQ(standard_normal_cdf(0.0), 0.5);
  EXPECT_DOUBLE_EQ(standard_normal_cdf(INFINITY), 1.0);
  EXPECT_DOUBLE_EQ(standard_normal_cdf(-INFINITY), 0.0);
  EXPECT_NEAR(standard_normal_cdf(1.96), 0.9750, 1e-4);
  EXPECT_NEAR(standard_normal_cdf(1.96), oracle::normal_cdf_quadrature(1.96), 1e-10);
  double prev = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    EXPECT_NEAR(standard_normal_cdf(-x), 1.0 - standard_normal_cdf(x), 1e-15);
    EXPECT_GE(standard_normal_cdf(x), prev);
    prev = standard_normal_cdf(x);
  }
}

TEST(NormalCdf, QuantileInvertsCdf) {
  for (double p : {1e-9, 0.01, 0.25, 0.5, 0.8, 0.999}) {
    EXPECT_NEAR(standard_normal_cdf(standard_normal_quantile(p)), p, 1e-12 + 1e-10 * p);
  }
}

TEST(LloydMax, OneBitClosedForm) {
  const auto d = design_lloyd_max(1);
  ASSERT_EQ(d.thresholds.size(), 3u);
  EXPECT_TRUE(std::isinf(d.thresholds[0]) && d.thresholds[0] < 0);
  EXPECT_EQ(d.thresholds[1], 0.0);
  EXPECT_TRUE(std::isinf(d.thresholds[2]) && d.thresholds[2] > 0);
  EXPECT_NEAR(d.labels[0], -0.7979, 1e-4);
  EXPECT_NEAR(d.labels[1], 0.7979, 1e-4);
  EXPECT_NEAR(d.labels[1], kSqrt2OverPi, 1e-12);
}

TEST(LloydMax, TwoBitMatchesPlainLloydIteration) {
  const auto d = design_lloyd_max(2);
  const auto ref = oracle::lloyd_fixed_point(2, 1e-10);
  ASSERT_EQ(d.labels.size(), 4u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(d.interior_threshold(i), ref.thresholds[static_cast<std::size_t>(i)], 1e-8);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(d.labels[static_cast<std::size_t>(j)], ref.labels[static_cast<std::size_t>(j)], 1e-8);
  const double expect_t[] = {-0.9816, 0.0, 0.9816};
  const double expect_l[] = {-1.5104, -0.4528, 0.4528, 1.5104};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(d.interior_threshold(i), expect_t[i], 1e-3);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(d.labels[static_cast<std::size_t>(j)], expect_l[j], 1e-3);
}

TEST(LloydMax, Deterministic) {
  const auto a = design_lloyd_max(1);
  const auto b = design_lloyd_max(1);
  EXPECT_EQ(a.thresholds, b.thresholds);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(design_lloyd_max(7).labels, design_lloyd_max(7).labels);
}

TEST(LloydMax, FixedPointAndShapeForAllDepths) {
  for (int b = kMinBits; b <= kMaxBits; ++b) {
    SCOPED_TRACE(b);
    const auto d = design_lloyd_max(b);
    const int levels = 1 << b;
    ASSERT_EQ(d.levels(), levels);
    ASSERT_EQ(static_cast<int>(d.thresholds.size()), levels + 1);
    EXPECT_TRUE(std::isinf(d.thresholds.front()) && std::isinf(d.thresholds.back()));
    for (int j = 0; j < levels; ++j) {
      const double lo = d.thresholds[static_cast<std::size_t>(j)];
      const double hi = d.thresholds[static_cast<std::size_t>(j) + 1];
      const double l = d.labels[static_cast<std::size_t>(j)];
      EXPECT_LT(lo, hi);
      EXPECT_GT(l, lo);
      EXPECT_LE(l, hi);
      EXPECT_DOUBLE_EQ(l, -d.labels[static_cast<std::size_t>(levels - 1 - j)]);
      // label = conditional mean of its cell
      auto pdf = [](double x) { return std::isinf(x) ? 0.0 : oracle::normal_pdf(x); };
      const double mass = 0.5 * std::erfc(-hi / std::numbers::sqrt2) - 0.5 * std::erfc(-lo / std::numbers::sqrt2);
      if (mass > 1e-12) EXPECT_NEAR(l, (pdf(lo) - pdf(hi)) / mass, 1e-7 * std::max(1.0, std::abs(l)));
    }
    for (int i = 0; i + 1 < levels; ++i) {
      EXPECT_NEAR(d.interior_threshold(i), 0.5 * (d.labels[static_cast<std::size_t>(i)] + d.labels[static_cast<std::size_t>(i) + 1]), 1e-9);
      EXPECT_DOUBLE_EQ(d.interior_threshold(i), -d.interior_threshold(levels - 2 - i));
    }
  }
}

TEST(LloydMax, RejectsBadDepth) {
  EXPECT_THROW(design_lloyd_max(0), std::invalid_argument);
  EXPECT_THROW(design_lloyd_max(13), std::invalid_argument);
}

TEST(LloydMax, NonConvergenceCarriesLastIterate) {
  try {
    design_lloyd_max(6, 1, 1e-14);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 1);
    EXPECT_EQ(e.last_iterate().levels(), 64);
    EXPECT_GT(e.last_change(), 1e-14);
  }
}

TEST(Rescale, OneBit) {
  const auto d = design_quantizer(1);
  EXPECT_NEAR(d.alpha, 0.8862, 1e-4);
  EXPECT_NEAR(d.alpha, 1.0 / (std::numbers::sqrt2 * kSqrt2OverPi), 1e-12);
  EXPECT_NEAR(d.labels[0], -0.7071, 1e-4);
  EXPECT_NEAR(d.labels[1], 0.7071, 1e-4);
}

TEST(Rescale, UnitComplexSecondMomentForAllDepths) {
  for (int b = kMinBits; b <= kMaxBits; ++b) {
    const auto d = design_quantizer(b);
    const auto p = half_variance_masses(d);
    double m2 = 0.0;
    for (int j = 0; j < d.levels(); ++j) m2 += d.labels[static_cast<std::size_t>(j)] * d.labels[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(j)];
    EXPECT_NEAR(2.0 * m2, 1.0, 1e-6) << "b=" << b;
  }
}

TEST(Rescale, ThreeBitAgainstQuadrature) {
  const auto raw = design_lloyd_max(3);
  const auto d = rescale_labels(raw);
  double m2_raw = 0.0;
  for (int j = 0; j < raw.levels(); ++j) {
    const double mass = oracle::cell_mass_quadrature(raw.thresholds[static_cast<std::size_t>(j)], raw.thresholds[static_cast<std::size_t>(j) + 1], 0.5);
    m2_raw += raw.labels[static_cast<std::size_t>(j)] * raw.labels[static_cast<std::size_t>(j)] * mass;
  }
  EXPECT_NEAR(d.alpha, 1.0 / std::sqrt(2.0 * m2_raw), 1e-8);
  EXPECT_NEAR(d.alpha, 0.98736, 1e-4);
  for (int j = 0; j < d.levels(); ++j) EXPECT_DOUBLE_EQ(d.labels[static_cast<std::size_t>(j)], d.alpha * raw.labels[static_cast<std::size_t>(j)]);
}

TEST(Rescale, RejectsMalformedDesign) {
  QuantizerDesign bad;
  bad.bits = 1;
  bad.thresholds = {-INFINITY, 0.0, INFINITY};
  bad.labels = {0.0, 0.0};
  EXPECT_THROW(rescale_labels(bad), std::invalid_argument);
}

TEST(Quantize, SignQuantizerExamples) {
  const auto d = design_quantizer(1);
  const Complex q = quantize(d, Complex{0.3, -0.4}, 1.0);
  EXPECT_NEAR(q.real(), 0.7071, 1e-4);
  EXPECT_NEAR(q.imag(), -0.7071, 1e-4);
  const Complex z = quantize(d, Complex{0.0, 0.0}, 1.0);
  EXPECT_NEAR(z.real(), -0.7071, 1e-4);
  EXPECT_NEAR(z.imag(), -0.7071, 1e-4);
}

TEST(Quantize, ThresholdValueGoesToLowerCell) {
  const auto d = design_quantizer(3);
  for (int i = 0; i + 1 < d.levels(); ++i) {
    EXPECT_EQ(cell_index(d, d.interior_threshold(i)), i);
    EXPECT_EQ(cell_index(d, std::nextafter(d.interior_threshold(i), INFINITY)), i + 1);
  }
}

TEST(Quantize, RejectsNonPositiveVariance) {
  const auto d = design_quantizer(2);
  EXPECT_THROW(quantize(d, Complex{1.0, 0.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(quantize(CVector::Ones(3), d, -1.0), std::invalid_argument);
}

TEST(Quantize, OutputAlphabetAndScaling) {
  const auto d = design_quantizer(2);
  const auto x = oracle::complex_gaussian(20000, 2.0, 11);
  std::set<double> re, im;
  for (const auto& v : x) {
    const Complex q = quantize(d, v, 2.0);
    re.insert(q.real());
    im.insert(q.imag());
    const Complex unit = quantize(d, v / std::sqrt(2.0), 1.0);
    EXPECT_NEAR(q.real(), std::sqrt(2.0) * unit.real(), 1e-12);
  }
  EXPECT_EQ(re.size(), 4u);
  EXPECT_EQ(im.size(), 4u);
}

TEST(Quantize, VectorOverloadMatchesScalar) {
  const auto d = design_quantizer(3);
  const auto x = oracle::complex_gaussian(16, 1.3, 5);
  CVector v(16);
  for (int i = 0; i < 16; ++i) v[i] = x[static_cast<std::size_t>(i)];
  const CVector q = quantize(v, d, 1.3);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(q[i], quantize(d, v[i], 1.3));
}

TEST(Quantize, TwelveBitsIsNearlyTransparent) {
  const auto d = design_quantizer(12);
  const auto x = oracle::complex_gaussian(200000, 1.7, 3);
  double err = 0.0, pow = 0.0;
  for (const auto& v : x) {
    err += std::norm(quantize(d, v, 1.7) - v);
    pow += std::norm(v);
  }
  EXPECT_LT(err / pow, 0.005);
}

TEST(Bussgang, OneBitClosedForm) {
  EXPECT_NEAR(bussgang_gain(design_quantizer(1), 1.0), kSqrt2OverPi, 1e-3);
  EXPECT_NEAR(bussgang_gain(design_quantizer(1), 1.0), kSqrt2OverPi, 1e-12);
}

TEST(Bussgang, HighResolutionLimitAndRange) {
  EXPECT_GE(bussgang_gain(design_quantizer(12), 1.0), 0.999);
  double prev = 0.0;
  for (int b = 1; b <= 12; ++b) {
    const double g = bussgang_gain(design_quantizer(b), 1.0);
    EXPECT_GT(g, 0.0);
    EXPECT_LE(g, 1.0);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(Bussgang, ScaleInvariantAndMatchesCrossCovariance) {
  for (int b : {1, 2, 3}) {
    const auto d = design_quantizer(b);
    const double g1 = bussgang_gain(d, 1.0);
    for (double var : {0.5, 1.0, 2.0}) {
      EXPECT_DOUBLE_EQ(bussgang_gain(d, var), g1);
      const auto x = oracle::complex_gaussian(200000, var, 100 + static_cast<std::uint64_t>(b));
      std::vector<Complex> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = quantize(d, x[i], var);
      const auto est = oracle::cross_covariance_gain(x, y);
      EXPECT_NEAR(est.value, g1, 4.0 * est.std_error) << "b=" << b << " var=" << var;
    }
  }
  EXPECT_THROW(bussgang_gain(design_quantizer(1), 0.0), std::invalid_argument);
}

TEST(Bussgang, DistortionIsUncorrelatedWithInput) {
  for (int b : {1, 2, 3}) {
    const auto d = design_quantizer(b);
    const double g = bussgang_gain(d, 1.0);
    const auto x = oracle::complex_gaussian(1'000'000, 1.0, 77);
    Complex cross{0.0, 0.0};
    double eq = 0.0, ex = 0.0;
    for (const auto& v : x) {
      const Complex q = quantize(d, v, 1.0) - g * v;
      cross += q * std::conj(v);
      eq += std::norm(q);
      ex += std::norm(v);
    }
    EXPECT_LT(std::abs(cross) / std::sqrt(eq * ex), 5e-3) << "b=" << b;
  }
}

TEST(DistortionFactor, Values) {
  EXPECT_NEAR(distortion_factor(1), 0.6802, 1e-4);
  EXPECT_NEAR(distortion_factor(3), 0.04251, 1e-4);
  for (int b = 1; b < 12; ++b) {
    EXPECT_EQ(distortion_factor(b) / distortion_factor(b + 1), 4.0);
    EXPECT_GT(distortion_factor(b), distortion_factor(b + 1));
  }
}

TEST(QuantizationNoise, Examples) {
  EXPECT_EQ(quantization_noise_variance(1.0, 2.0, 2.0), 0.0);
  EXPECT_NEAR(quantization_noise_variance(kSqrt2OverPi, 1.0, 1.0), 1.0 - 2.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(quantization_noise_variance(0.7979, 1.0, 1.0), 0.3634, 1e-3);
  EXPECT_EQ(quantization_noise_variance(1.0, 2.0, 1.0), 0.0);
}

TEST(QuantizationNoise, OneBitMonteCarlo) {
  const auto d = design_quantizer(1);
  const double g = bussgang_gain(d, 1.0);
  const auto x = oracle::complex_gaussian(500000, 1.0, 9);
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(quantize(d, v, 1.0) - g * v);
  EXPECT_NEAR(acc / static_cast<double>(x.size()), quantization_noise_variance(g, 1.0, 1.0), 5e-3);
}

TEST(Distortion, MseDecreasesWithResolution) {
  const auto x = oracle::complex_gaussian(200000, 1.0, 21);
  double prev = INFINITY;
  for (int b = 1; b <= 8; ++b) {
    const auto d = design_quantizer(b);
    double mse = 0.0;
    for (const auto& v : x) mse += std::norm(quantize(d, v, 1.0) - v);
    mse /= static_cast<double>(x.size());
    EXPECT_LT(mse, prev) << "b=" << b;
    prev = mse;
  }
}

TEST(Distortion, RhoHasTheRightOrderOfMagnitude) {
  const auto x = oracle::complex_gaussian(200000, 1.0, 23);
  for (int b = 1; b <= 3; ++b) {
    const auto d = design_quantizer(b);
    double mse = 0.0;
    for (const auto& v : x) mse += std::norm(quantize(d, v, 1.0) - v);
    mse /= static_cast<double>(x.size());
    const double ratio = mse / distortion_factor(b);
    EXPECT_GT(ratio, 0.5) << "b=" << b;
    EXPECT_LT(ratio, 2.0) << "b=" << b;
  }
}

TEST(DistortionModel, OneBitUnitVariance) {
  const auto m = distortion_model(design_quantizer(1), 1.0);
  EXPECT_NEAR(m.gain, kSqrt2OverPi, 1e-12);
  EXPECT_NEAR(m.rho, distortion_factor(1), 0.0);
  EXPECT_NEAR(m.sigma_q_sq, 1.0 - 2.0 / std::numbers::pi, 1e-12);
}

TEST(DesignCsv, TwoBitFormat) {
  std::ostringstream os;
  write_design_csv(os, design_quantizer(2));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "cell_index,tau_low,tau_high,label");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) rows.push_back(split_csv_line(line));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows.front()[1], "-inf");
  EXPECT_EQ(rows.back()[2], "inf");
  EXPECT_EQ(parse_double(rows[1][2]), 0.0);
}
