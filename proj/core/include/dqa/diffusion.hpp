#pragma once

// Per-agent adaptation for diffusion LMS over quantized data, and the ATC
// combine step.
//
// One time step at node k:
//   DLMS     e = d - w^H x,                 h = w + mu x conj(e)
//   DQA-LMS  e = d_Q - beta w^H x_Q,        h = w + mu beta x_Q conj(e)
//   combine  w_k = sum_{l in N_k} a_lk h_l
//
// beta = g sigma_x^2 / (g sigma_x^2 + sigma_q^2) removes the shrinkage that
// the Bussgang gain g and the distortion variance sigma_q^2 put on the
// quantized error.

#include <memory>
#include <span>
#include <vector>

#include "dqa/netgraph.hpp"
#include "dqa/quantkit.hpp"
#include "dqa/types.hpp"

namespace dqa::diffusion {

inline constexpr double kVarianceForgetting = 0.95;

enum class VarianceMode {
  kOnline,   // track sigma_x^2 from the quantized regressors every step
  kOffline,  // use a known stationary sigma_x^2
};

struct AgentState {
  AgentState(int filter_len, double mu, int bits = kFullResolution,
             std::shared_ptr<const quantkit::QuantizerDesign> design = nullptr);

  bool full_resolution() const { return bits == kFullResolution; }
  int filter_len() const { return static_cast<int>(w.size()); }

  CVector w;
  CVector h;
  double mu;
  double variance_est = 0.0;  // EWMA of ||x_Q||^2 / M
  bool variance_primed = false;
  int bits;
  std::shared_ptr<const quantkit::QuantizerDesign> design;
};

struct StepInputs {
  Eigen::Ref<const CVector> x;
  Complex d;
};

struct BiasCorrection {
  double g = 1.0;
  double beta = 1.0;
  double sigma_q_sq = 0.0;

  static BiasCorrection identity() { return {}; }
};

// Both adapt functions leave w untouched and return the a-priori error.
Complex dlms_adapt(AgentState& state, const StepInputs& inp);
Complex dqa_lms_adapt(AgentState& state, const StepInputs& inp, const BiasCorrection& corr);

// Folds ||x_q||^2 / M into the EWMA and returns the corrected input variance
// estimate variance_est + rho.
double update_variance_estimate(AgentState& state, const CVector& x_q, double rho);

double bias_correction(double g, double sigma_x_sq, double sigma_q_sq);

// Bias correction for a stationary input of known variance (the offline mode).
BiasCorrection stationary_bias_correction(const quantkit::QuantizerDesign& design, double sigma_x_sq);

// Full per-step bias-correction pipeline for one agent: variance tracking,
// Bussgang gain, distortion variance and beta. A full-resolution agent gets
// the identity correction (g = 1, sigma_q^2 = 0, beta = 1).
BiasCorrection compute_bias_correction(AgentState& state, const CVector& x_q, VarianceMode mode,
                                       double known_sigma_x_sq = 0.0);

// w_k = sum_l a_lk h_l for every node.
std::vector<CVector> combine(std::span<const CVector> h_all, const netgraph::CombinationMatrix& a);
void combine(std::span<AgentState> agents, const netgraph::CombinationMatrix& a);

}  // namespace dqa::diffusion
