#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dqa/types.hpp"

namespace dqa::analysis {

// Mean-stability check: 0 < mu_k < 2 / lambda_max(R_{k,Q}) at every node.
struct StabilityReport {
  std::vector<double> lambda_max;
  std::vector<double> per_node_mu_max;
  std::vector<double> configured_mu;
  bool stable = false;
};

// Throws std::invalid_argument when some R is not square or not Hermitian.
std::vector<double> step_size_bounds(std::span<const CMatrix> r_kq);
StabilityReport stability_bound(std::span<const CMatrix> r_kq, std::span<const double> mu);

CMatrix block_diagonal(std::span<const CMatrix> blocks);

// max_k ||v_k|| over the length-m blocks of v.
double block_max_norm(const CVector& v, int m);

// Iterates E[W~(i)] = C (I - D R_Q) E[W~(i-1)] and returns the block maximum
// norm of every iterate, starting with W~(0) (steps + 1 values).
// `node_mu` holds one step size per node; D = diag(mu_k I_M).
std::vector<double> mean_error_recursion(const RMatrix& c, std::span<const double> node_mu, const CMatrix& r_q,
                                         const CVector& w_tilde0, int steps);

// Spectral radius of C (I - D R_Q).
double mean_recursion_spectral_radius(const RMatrix& c, std::span<const double> node_mu, const CMatrix& r_q);

double theoretical_msd(double mu, int m, int n, std::span<const double> sigma_v_sq);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct PowerModel {
  double bandwidth_hz = 200e3;
  double conversion_energy_j = 494e-15;
  int n_nodes = 20;
  int adcs_per_node = 2;
};

double adc_network_power(const PowerModel& model, int bits);

// Fraction of ADC power saved by running at b_low instead of b_high bits.
double power_reduction(int b_low, int b_high);

struct OpCount {
  long long mult = 0;
  long long add = 0;
  long long div = 0;
  long long exp = 0;

  OpCount& operator+=(const OpCount& o) {
    mult += o.mult;
    add += o.add;
    div += o.div;
    exp += o.exp;
    return *this;
  }
  friend bool operator==(const OpCount&, const OpCount&) = default;
};

struct ComplexityRow {
  std::string task;
  OpCount ops;
};

struct ComplexityBreakdown {
  std::vector<ComplexityRow> rows;
  OpCount total;
};

// Per-node, per-iteration operation counts for DQA-LMS with online g.
ComplexityBreakdown complexity_count(int m, int n_k, int bits);
// Same accounting for plain DLMS (error, adapt, combine).
ComplexityBreakdown dlms_complexity_count(int m, int n_k);

}  // namespace dqa::analysis
