#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "dqa/analysis.hpp"
#include "dqa/diffusion.hpp"
#include "dqa/netgraph.hpp"
#include "dqa/simkit.hpp"
#include "oracles.hpp"

using namespace dqa;
using namespace dqa::analysis;

namespace {

CMatrix random_psd(int m, std::mt19937_64& eng, double scale) {
  std::normal_distribution<double> nd;
  CMatrix g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = {nd(eng), nd(eng)};
  CMatrix r = scale * (g * g.adjoint()) / m;
  return 0.5 * (r + r.adjoint());
}

CMatrix dense_recursion_matrix(const RMatrix& c, std::span<const double> mu, const CMatrix& r_q, int m) {
  const Eigen::Index nm = c.rows();
  CMatrix d = CMatrix::Zero(nm, nm);
  for (Eigen::Index i = 0; i < nm; ++i) d(i, i) = mu[static_cast<std::size_t>(i / m)];
  return c.cast<Complex>() * (CMatrix::Identity(nm, nm) - d * r_q);
}

}  // namespace

TEST(StabilityBound, IdentityAndDiagonal) {
  const std::vector<CMatrix> eye{CMatrix::Identity(4, 4)};
  EXPECT_NEAR(step_size_bounds(eye)[0], 2.0, 1e-12);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  const std::vector<CMatrix> diag{d};
  EXPECT_NEAR(step_size_bounds(diag)[0], 0.5, 1e-12);
}

TEST(StabilityBound, RejectsNonHermitian) {
  CMatrix r = CMatrix::Identity(2, 2);
  r(0, 1) = Complex{0.3, 0.1};
  const std::vector<CMatrix> v{r};
  EXPECT_THROW(step_size_bounds(v), std::invalid_argument);
  const std::vector<CMatrix> rect{CMatrix::Zero(2, 3)};
  EXPECT_THROW(step_size_bounds(rect), std::invalid_argument);
}

TEST(StabilityBound, ReportFlags) {
  const std::vector<CMatrix> r{CMatrix::Identity(2, 2), 4.0 * CMatrix::Identity(2, 2)};
  const std::vector<double> mu{1.0, 1.0};
  const auto rep = stability_bound(r, mu);
  EXPECT_FALSE(rep.stable);
  EXPECT_NEAR(rep.per_node_mu_max[1], 0.5, 1e-12);
  const std::vector<double> ok{1.0, 0.4};
  EXPECT_TRUE(stability_bound(r, ok).stable);
  const std::vector<double> zero{0.0, 0.4};
  EXPECT_FALSE(stability_bound(r, zero).stable);
}

TEST(StabilityBound, OneBitWhiteInputFromMonteCarloCovariance) {
  simkit::ScenarioConfig cfg;
  cfg.seed = 3;
  simkit::NodeProfile p;
  p.sigma_x_sq = 1.0;
  p.sigma_v_sq = 0.01;
  p.ar_coeff = 0.0;
  const auto sc = simkit::make_scenario(cfg, netgraph::NetworkTopology(1), {p}, simkit::draw_unknown_system(8, 3));
  const auto r = simkit::estimate_quantized_covariance(sc, 1, 100000, 17);
  const double beta = diffusion::stationary_bias_correction(quantkit::design_quantizer(1), 1.0).beta;
  EXPECT_NEAR(beta, 0.687, 1e-3);
  const double mu_max = step_size_bounds(r)[0];
  EXPECT_NEAR(mu_max, 2.0 / (beta * beta), 0.03 * 2.0 / (beta * beta));
  EXPECT_NEAR(mu_max, 4.24, 0.15);
}

TEST(MeanRecursion, ZeroStartStaysZero) {
  const RMatrix c = netgraph::lift_combination(netgraph::CombinationMatrix(RMatrix::Identity(2, 2)), 2);
  const std::vector<double> mu{0.1, 0.2};
  const auto norms = mean_error_recursion(c, mu, CMatrix::Identity(4, 4), CVector::Zero(4), 20);
  ASSERT_EQ(norms.size(), 21u);
  for (double n : norms) EXPECT_EQ(n, 0.0);
}

TEST(MeanRecursion, ScalarGeometricDecay) {
  const double r = 2.0, mu = 0.3;
  RMatrix c(1, 1);
  c(0, 0) = 1.0;
  CMatrix rq(1, 1);
  rq(0, 0) = r;
  CVector w0(1);
  w0[0] = Complex{0.6, -0.8};
  const std::vector<double> mus{mu};
  const auto norms = mean_error_recursion(c, mus, rq, w0, 30);
  for (int i = 0; i <= 30; ++i) EXPECT_NEAR(norms[static_cast<std::size_t>(i)], std::pow(std::abs(1 - mu * r), i), 1e-14);
  for (int i = 1; i <= 30; ++i) EXPECT_LT(norms[static_cast<std::size_t>(i)], norms[static_cast<std::size_t>(i) - 1]);
}

TEST(MeanRecursion, MatchesDenseMatrixPower) {
  RMatrix a(2, 2);
  a << 0.5, 0.5, 0.5, 0.5;
  const int m = 3;
  const RMatrix c = netgraph::lift_combination(netgraph::CombinationMatrix(a), m);
  const CMatrix rq = CMatrix::Identity(6, 6);
  const std::vector<double> mu{0.1, 0.1};
  CVector w0(6);
  w0 << Complex{1, 0}, Complex{-2, 1}, Complex{0.5, 0.5}, Complex{0, 3}, Complex{1, 1}, Complex{-1, 0};
  const auto got = mean_error_recursion(c, mu, rq, w0, 60);
  const auto ref = oracle::matrix_power_norms(dense_recursion_matrix(c, mu, rq, m), w0, m, 60);
  ASSERT_EQ(got.size(), ref.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-12);
}

TEST(MeanRecursion, DimensionMismatchThrows) {
  const RMatrix c = RMatrix::Identity(4, 4);
  const std::vector<double> mu{0.1, 0.1};
  EXPECT_THROW(mean_error_recursion(c, mu, CMatrix::Identity(3, 3), CVector::Zero(4), 3), std::invalid_argument);
  EXPECT_THROW(mean_error_recursion(c, mu, CMatrix::Identity(4, 4), CVector::Zero(5), 3), std::invalid_argument);
  const std::vector<double> mu3{0.1, 0.1, 0.1};
  EXPECT_THROW(mean_error_recursion(c, mu3, CMatrix::Identity(4, 4), CVector::Zero(4), 3), std::invalid_argument);
}

TEST(MeanRecursion, ConvergenceAgreesWithSpectralRadiusOnRandomInstances) {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> factor(0.05, 3.0);
  int stable_seen = 0, unstable_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4, m = 3;
    const auto topo = netgraph::random_geometric_topology(n, 0.7, 300 + static_cast<std::uint64_t>(trial));
    const RMatrix c = netgraph::lift_combination(netgraph::metropolis_weights(topo), m);
    std::vector<CMatrix> blocks;
    for (int k = 0; k < n; ++k) blocks.push_back(random_psd(m, eng, 1.0 + k));
    const auto bounds = step_size_bounds(blocks);
    const double f = factor(eng);
    if (std::abs(f - 1.0) < 0.05) continue;
    std::vector<double> mu;
    for (double b : bounds) mu.push_back(f * b);
    const CMatrix rq = block_diagonal(blocks);
    const double radius = mean_recursion_spectral_radius(c, mu, rq);
    const auto norms = mean_error_recursion(c, mu, rq, CVector::Ones(n * m), 3000);
    const bool converged = norms.back() < 1e-8 * norms.front();
    EXPECT_EQ(converged, radius < 1.0) << "trial " << trial << " radius " << radius;
    if (stability_bound(blocks, mu).stable) {
      EXPECT_LT(radius, 1.0);
      EXPECT_TRUE(converged);
      ++stable_seen;
    } else {
      ++unstable_seen;
    }
  }
  EXPECT_GT(stable_seen, 5);
  EXPECT_GT(unstable_seen, 5);
}

TEST(BlockMaxNorm, PicksLargestBlock) {
  CVector v(6);
  v << Complex{3, 0}, Complex{4, 0}, Complex{1, 0}, Complex{0, 0}, Complex{0, 2}, Complex{0, 0};
  EXPECT_DOUBLE_EQ(block_max_norm(v, 2), 5.0);
  EXPECT_THROW(block_max_norm(v, 4), std::invalid_argument);
  v(5) = Complex{std::nan(""), 0.0};
  EXPECT_TRUE(std::isnan(block_max_norm(v, 2)));
}

TEST(TheoreticalMsd, Examples) {
  const std::vector<double> sv(20, 0.01);
  EXPECT_NEAR(theoretical_msd(0.05, 8, 20, sv), 2.0e-4, 1e-18);
  EXPECT_NEAR(to_db(theoretical_msd(0.05, 8, 20, sv)), -36.99, 0.01);
  EXPECT_DOUBLE_EQ(theoretical_msd(0.1, 8, 20, sv), 2.0 * theoretical_msd(0.05, 8, 20, sv));
  std::vector<double> sv40(40, 0.01);
  EXPECT_DOUBLE_EQ(theoretical_msd(0.05, 8, 40, sv40), 0.5 * theoretical_msd(0.05, 8, 20, sv));
}

TEST(TheoreticalMsd, PermutationInvariant) {
  std::vector<double> sv{0.013, 0.09, 0.021, 0.05, 0.077, 0.031, 0.011, 0.064};
  const double ref = theoretical_msd(0.05, 8, 8, sv);
  std::mt19937_64 eng(1);
  for (int i = 0; i < 50; ++i) {
    std::shuffle(sv.begin(), sv.end(), eng);
    EXPECT_EQ(theoretical_msd(0.05, 8, 8, sv), ref);
  }
}

TEST(Power, PaperParameters) {
  const PowerModel p;
  EXPECT_NEAR(adc_network_power(p, 1), 7.904e-6, 1e-12);
  for (int b = 1; b < 12; ++b) EXPECT_EQ(adc_network_power(p, b + 1), 2.0 * adc_network_power(p, b));
  EXPECT_DOUBLE_EQ(power_reduction(3, 7), 0.9375);
  for (int high = 7; high <= 12; ++high) EXPECT_GE(power_reduction(3, high), 0.9);
  EXPECT_THROW(adc_network_power(p, 0), std::invalid_argument);
}

TEST(Power, LinearInNodesBandwidthAndEnergy) {
  PowerModel p;
  const double base = adc_network_power(p, 4);
  p.n_nodes = 40;
  EXPECT_DOUBLE_EQ(adc_network_power(p, 4), 2.0 * base);
  p = PowerModel{};
  p.bandwidth_hz *= 3.0;
  EXPECT_NEAR(adc_network_power(p, 4), 3.0 * base, 1e-18);
  p = PowerModel{};
  p.conversion_energy_j *= 0.5;
  EXPECT_NEAR(adc_network_power(p, 4), 0.5 * base, 1e-18);
}

TEST(Complexity, SpotValue) {
  const auto c = complexity_count(8, 3, 3);
  EXPECT_EQ(c.total, (OpCount{62, 48, 10, 8}));
}

TEST(Complexity, GridMatchesClosedFormsAndRowSums) {
  for (int m = 1; m <= 16; ++m) {
    for (int nk = 1; nk <= 8; ++nk) {
      for (int b = 1; b <= 8; ++b) {
        const auto c = complexity_count(m, nk, b);
        OpCount sum;
        for (const auto& r : c.rows) sum += r.ops;
        ASSERT_EQ(sum, c.total);
        const long long L = 1LL << b;
        ASSERT_EQ(c.total.mult, (2 + nk) * m + 2 * L + 6);
        ASSERT_EQ(c.total.add, (2 + nk) * m + L);
        ASSERT_EQ(c.total.div, L + 2);
        ASSERT_EQ(c.total.exp, L);
      }
    }
  }
}

TEST(Complexity, ExtraCostOverDlmsGrowsWithLevels) {
  long long prev = 0;
  for (int b = 1; b <= 10; ++b) {
    const auto dqa = complexity_count(8, 3, b).total;
    const auto dlms = dlms_complexity_count(8, 3).total;
    const long long extra = (dqa.mult - dlms.mult) + (dqa.add - dlms.add) + (dqa.div - dlms.div) + (dqa.exp - dlms.exp);
    EXPECT_GT(extra, prev);
    EXPECT_LE(extra, 8 * (1LL << b) + 8);
    EXPECT_GE(extra, 4 * (1LL << b));
    prev = extra;
  }
}
