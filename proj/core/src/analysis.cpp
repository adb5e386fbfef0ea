#include "dqa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dqa::analysis {
namespace {

constexpr double kHermitianTol = 1e-9;

CMatrix step_matrix(const RMatrix& c, std::span<const double> node_mu, const CMatrix& r_q) {
  const Eigen::Index nm = c.rows();
  if (c.cols() != nm || r_q.rows() != nm || r_q.cols() != nm || node_mu.empty() ||
      nm % static_cast<Eigen::Index>(node_mu.size()) != 0) {
    throw std::invalid_argument("mean_error_recursion: inconsistent dimensions");
  }
  const Eigen::Index m = nm / static_cast<Eigen::Index>(node_mu.size());
  CMatrix e = -r_q;
  for (Eigen::Index r = 0; r < nm; ++r) e.row(r) *= node_mu[static_cast<std::size_t>(r / m)];
  e.diagonal().array() += 1.0;
  return c.cast<Complex>() * e;
}

}  // namespace

std::vector<double> step_size_bounds(std::span<const CMatrix> r_kq) {
  std::vector<double> out;
  out.reserve(r_kq.size());
  for (std::size_t k = 0; k < r_kq.size(); ++k) {
    const CMatrix& r = r_kq[k];
    if (r.rows() != r.cols() || r.rows() == 0) {
      throw std::invalid_argument("R_" + std::to_string(k) + " is not square");
    }
    const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale) {
      throw std::invalid_argument("R_" + std::to_string(k) + " is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    out.push_back(lmax > 0.0 ? 2.0 / lmax : INFINITY);
  }
  return out;
}

StabilityReport stability_bound(std::span<const CMatrix> r_kq, std::span<const double> mu) {
  if (mu.size() != r_kq.size()) throw std::invalid_argument("stability_bound: one step size per node");
  StabilityReport rep;
  rep.per_node_mu_max = step_size_bounds(r_kq);
  rep.lambda_max.reserve(r_kq.size());
  for (double b : rep.per_node_mu_max) rep.lambda_max.push_back(std::isinf(b) ? 0.0 : 2.0 / b);
  rep.configured_mu.assign(mu.begin(), mu.end());
  rep.stable = true;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(mu[k] > 0.0 && mu[k] < rep.per_node_mu_max[k])) rep.stable = false;
  }
  return rep;
}

CMatrix block_diagonal(std::span<const CMatrix> blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  CMatrix out = CMatrix::Zero(total, total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    if (b.rows() != b.cols()) throw std::invalid_argument("block_diagonal: blocks must be square");
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

double block_max_norm(const CVector& v, int m) {
  if (m < 1 || v.size() % m != 0) throw std::invalid_argument("block_max_norm: length not a multiple of m");
  double best = 0.0;
  for (Eigen::Index k = 0; k < v.size() / m; ++k) {
    const double n = v.segment(k * m, m).norm();
    if (std::isnan(n)) return n;  // an overflowed iterate must not read as small
    best = std::max(best, n);
  }
  return best;
}

std::vector<double> mean_error_recursion(const RMatrix& c, std::span<const double> node_mu, const CMatrix& r_q,
                                         const CVector& w_tilde0, int steps) {
  const CMatrix step = step_matrix(c, node_mu, r_q);
  if (w_tilde0.size() != c.rows()) throw std::invalid_argument("mean_error_recursion: W~(0) has wrong length");
  if (steps < 0) throw std::invalid_argument("mean_error_recursion: negative step count");
  const int m = static_cast<int>(c.rows() / static_cast<Eigen::Index>(node_mu.size()));

  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(steps) + 1);
  CVector w = w_tilde0;
  norms.push_back(block_max_norm(w, m));
  CVector next(w.size());
  for (int i = 0; i < steps; ++i) {
    next.noalias() = step * w;
    w.swap(next);
    norms.push_back(block_max_norm(w, m));
  }
  return norms;
}

double mean_recursion_spectral_radius(const RMatrix& c, std::span<const double> node_mu, const CMatrix& r_q) {
  Eigen::ComplexEigenSolver<CMatrix> es(step_matrix(c, node_mu, r_q), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double theoretical_msd(double mu, int m, int n, std::span<const double> sigma_v_sq) {
  if (!(mu > 0.0) || m < 1 || n < 1) throw std::invalid_argument("theoretical_msd: inputs must be positive");
  // summed in sorted order so any permutation of sigma_v_sq gives the same bits
  std::vector<double> v(sigma_v_sq.begin(), sigma_v_sq.end());
  std::sort(v.begin(), v.end());
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  return mu * m / (static_cast<double>(n) * n) * sum;
}

double adc_network_power(const PowerModel& model, int bits) {
  if (bits < 1) throw std::invalid_argument("adc_network_power: bits must be >= 1");
  return model.adcs_per_node * model.n_nodes * model.conversion_energy_j * model.bandwidth_hz *
         std::ldexp(1.0, bits);
}

double power_reduction(int b_low, int b_high) {
  return 1.0 - std::ldexp(1.0, b_low - b_high);
}

ComplexityBreakdown complexity_count(int m, int n_k, int bits) {
  if (m < 1 || n_k < 1 || bits < 1) throw std::invalid_argument("complexity_count: inputs must be positive");
  const long long levels = 1LL << bits;
  const long long mm = m;
  const long long nk = n_k;
  ComplexityBreakdown out;
  out.rows = {
      {"bussgang_gain", {2 * levels + 1, levels - 1, levels + 1, levels}},
      {"bias_correction", {2, 1, 1, 0}},
      {"filter_output", {mm + 1, mm - 1, 0, 0}},
      {"error", {0, 1, 0, 0}},
      {"adapt", {mm + 2, mm, 0, 0}},
      {"combine", {nk * mm, nk * mm, 0, 0}},
  };
  for (const auto& r : out.rows) out.total += r.ops;
  return out;
}

ComplexityBreakdown dlms_complexity_count(int m, int n_k) {
  if (m < 1 || n_k < 1) throw std::invalid_argument("dlms_complexity_count: inputs must be positive");
  const long long mm = m;
  const long long nk = n_k;
  ComplexityBreakdown out;
  out.rows = {
      {"filter_output", {mm, mm - 1, 0, 0}},
      {"error", {0, 1, 0, 0}},
      {"adapt", {mm + 1, mm, 0, 0}},
      {"combine", {nk * mm, nk * mm, 0, 0}},
  };
  for (const auto& r : out.rows) out.total += r.ops;
  return out;
}

}  // namespace dqa::analysis
