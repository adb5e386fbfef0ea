#include "dqa/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dqa::diffusion {
namespace {

void check_dims(const AgentState& state, const StepInputs& inp) {
  if (inp.x.size() != state.w.size() || state.h.size() != state.w.size()) {
    throw std::invalid_argument("regressor length " + std::to_string(inp.x.size()) +
                                " does not match filter length " + std::to_string(state.w.size()));
  }
}

}  // namespace

AgentState::AgentState(int filter_len, double mu_, int bits_,
                       std::shared_ptr<const quantkit::QuantizerDesign> design_)
    : w(CVector::Zero(filter_len)),
      h(CVector::Zero(filter_len)),
      mu(mu_),
      bits(bits_),
      design(std::move(design_)) {
  if (filter_len < 1) throw std::invalid_argument("filter length must be >= 1");
  if (!(mu_ >= 0.0)) throw std::invalid_argument("step size must be non-negative");
  if (bits != kFullResolution && !design) {
    throw std::invalid_argument("quantized agent needs a quantizer design");
  }
}

Complex dlms_adapt(AgentState& state, const StepInputs& inp) {
  check_dims(state, inp);
  const Complex e = inp.d - state.w.dot(inp.x);
  state.h.noalias() = state.w + (state.mu * std::conj(e)) * inp.x;
  return e;
}

Complex dqa_lms_adapt(AgentState& state, const StepInputs& inp, const BiasCorrection& corr) {
  check_dims(state, inp);
  const Complex e = inp.d - corr.beta * state.w.dot(inp.x);
  state.h.noalias() = state.w + (state.mu * corr.beta * std::conj(e)) * inp.x;
  return e;
}

double update_variance_estimate(AgentState& state, const CVector& x_q, double rho) {
  if (x_q.size() < 1) throw std::invalid_argument("empty regressor");
  const double inst = x_q.squaredNorm() / static_cast<double>(x_q.size());
  if (state.variance_primed) {
    state.variance_est = kVarianceForgetting * state.variance_est + (1.0 - kVarianceForgetting) * inst;
  } else {
    state.variance_est = inst;
    state.variance_primed = true;
  }
  return state.variance_est + rho;
}

double bias_correction(double g, double sigma_x_sq, double sigma_q_sq) {
  const double num = g * sigma_x_sq;
  const double den = num + sigma_q_sq;
  if (!(den > 0.0)) throw std::invalid_argument("bias_correction: non-positive denominator");
  return num / den;
}

BiasCorrection compute_bias_correction(AgentState& state, const CVector& x_q, VarianceMode mode,
                                       double known_sigma_x_sq) {
  if (state.full_resolution()) return BiasCorrection::identity();

  const auto& design = *state.design;
  const double rho = quantkit::distortion_factor(design.bits);
  const double tracked = update_variance_estimate(state, x_q, rho);
  double sigma_x_sq = mode == VarianceMode::kOffline ? known_sigma_x_sq : tracked;
  if (!(sigma_x_sq > 0.0)) {
    // all-zero regressors so far; any positive scale gives the same g
    sigma_x_sq = 1.0;
  }

  return stationary_bias_correction(design, sigma_x_sq);
}

BiasCorrection stationary_bias_correction(const quantkit::QuantizerDesign& design, double sigma_x_sq) {
  BiasCorrection c;
  c.g = quantkit::bussgang_gain(design, sigma_x_sq);
  // The labels are power-normalized, so the quantizer output carries the
  // input variance and orthogonality leaves (1 - g^2) sigma_x^2 as distortion.
  c.sigma_q_sq = quantkit::quantization_noise_variance(c.g, sigma_x_sq, sigma_x_sq);
  c.beta = bias_correction(c.g, sigma_x_sq, c.sigma_q_sq);
  return c;
}

std::vector<CVector> combine(std::span<const CVector> h_all, const netgraph::CombinationMatrix& a) {
  const int n = a.size();
  if (static_cast<int>(h_all.size()) != n) {
    throw std::invalid_argument("combine: expected " + std::to_string(n) + " intermediate estimates");
  }
  const Eigen::Index m = h_all.empty() ? 0 : h_all[0].size();
  for (const auto& h : h_all) {
    if (h.size() != m) throw std::invalid_argument("combine: estimates differ in length");
  }
  std::vector<CVector> w(static_cast<std::size_t>(n), CVector::Zero(m));
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double c = a(l, k);
      if (c != 0.0) w[static_cast<std::size_t>(k)] += c * h_all[static_cast<std::size_t>(l)];
    }
  }
  return w;
}

void combine(std::span<AgentState> agents, const netgraph::CombinationMatrix& a) {
  const int n = a.size();
  if (static_cast<int>(agents.size()) != n) {
    throw std::invalid_argument("combine: expected " + std::to_string(n) + " agents");
  }
  for (const auto& ag : agents) {
    if (ag.h.size() != agents[0].h.size()) throw std::invalid_argument("combine: estimates differ in length");
  }
  for (int k = 0; k < n; ++k) {
    CVector& w = agents[static_cast<std::size_t>(k)].w;
    w.setZero();
    for (int l = 0; l < n; ++l) {
      const double c = a(l, k);
      if (c != 0.0) w += c * agents[static_cast<std::size_t>(l)].h;
    }
  }
}

}  // namespace dqa::diffusion
