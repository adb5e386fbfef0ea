#pragma once

// Synthetic diffusion-network scenarios and ensemble MSD experiments.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dqa/analysis.hpp"
#include "dqa/diffusion.hpp"
#include "dqa/netgraph.hpp"
#include "dqa/quantkit.hpp"
#include "dqa/rng.hpp"
#include "dqa/types.hpp"

namespace dqa::simkit {

inline constexpr double kDivergenceThreshold = 1e6;

struct NodeProfile {
  double sigma_x_sq = 1.0;  // stationary input power
  double sigma_v_sq = 0.01;
  double ar_coeff = 0.0;    // AR(1) pole, |r| < 1

  void validate() const;
};

struct ProfileRanges {
  double sigma_x_sq_min = 0.5;
  double sigma_x_sq_max = 1.5;
  double sigma_v_sq_min = 0.01;
  double sigma_v_sq_max = 0.1;
  double ar_min = 0.3;
  double ar_max = 0.5;
};

enum class Algorithm {
  kTheory,
  kDlmsFull,
  kDlmsQuantized,
  kDqaLms,
};

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ScenarioConfig {
  std::string name = "custom";
  int n_nodes = 20;
  int filter_len = 8;
  double mu = 0.05;
  int trials = 100;
  int iterations = 2000;
  std::vector<int> bit_depths{1, 2, 3};
  bool full_resolution = true;  // run DLMS on unquantized data
  bool theory = true;           // emit the flat theoretical MSD line
  std::uint64_t seed = 1;
  double topology_radius = 0.35;
  ProfileRanges ranges;
  diffusion::VarianceMode variance_mode = diffusion::VarianceMode::kOnline;
  double steady_state_fraction = 0.1;
  double bandwidth_hz = 200e3;
  double conversion_energy_j = 494e-15;

  // Throws ConfigError naming the offending field.
  void validate() const;
  analysis::PowerModel power_model() const;
};

struct Scenario {
  ScenarioConfig config;
  netgraph::NetworkTopology topology;
  netgraph::CombinationMatrix combination;
  std::vector<NodeProfile> profiles;
  CVector w_o;
  std::vector<double> desired_variance;  // stationary E|d_k|^2, sets the d ADC range

  int n_nodes() const { return topology.size(); }
  int filter_len() const { return static_cast<int>(w_o.size()); }
};

// Draws topology, per-node profiles and w_o from the scenario seed.
Scenario build_scenario(const ScenarioConfig& config);

// Scenario with caller-supplied pieces (config.n_nodes / filter_len are
// overwritten to match). Combination weights default to Metropolis.
Scenario make_scenario(ScenarioConfig config, netgraph::NetworkTopology topology, std::vector<NodeProfile> profiles,
                       CVector w_o);

std::vector<NodeProfile> draw_node_profiles(int n, const ProfileRanges& ranges, std::uint64_t seed);

// Unit-norm circular complex Gaussian vector.
CVector draw_unknown_system(int m, std::uint64_t seed);

// Stationary AR(1) samples u(i) = r u(i-1) + n(i), Var u = sigma_x^2.
// Starts from zero and discards 10 * burn_in_taps warm-up samples.
std::vector<Complex> ar1_sample_stream(const NodeProfile& profile, int length, int burn_in_taps, Rng& rng);

// Tapped-delay-line regressors x(i) = [u(i), u(i-1), ..., u(i-M+1)].
std::vector<CVector> ar1_regressor_stream(const NodeProfile& profile, int m, int iterations, std::uint64_t seed);

// R_x with entries sigma_x^2 r^|i-j|.
RMatrix ar1_covariance(const NodeProfile& profile, int m);
double stationary_desired_variance(const CVector& w_o, const NodeProfile& profile);

Complex desired_signal(const CVector& w_o, const CVector& x, double sigma_v_sq, Rng& rng);

// (1/N) sum_k ||w_o - w_k||^2
double msd(std::span<const CVector> w_all, const CVector& w_o);

// Shared, lazily built design for each bit depth (thread safe).
std::shared_ptr<const quantkit::QuantizerDesign> shared_design(int bits);

// Analog streams for one trial: per node, iterations + M - 1 input samples
// (oldest first) and `iterations` noise samples.
struct TrialSignals {
  std::vector<std::vector<Complex>> input;
  std::vector<std::vector<Complex>> noise;
};

TrialSignals generate_trial_signals(const Scenario& scenario, int trial);

struct RunSpec {
  Algorithm algorithm = Algorithm::kDlmsFull;
  int bits = kFullResolution;
  // Forces beta = 1 in the DQA recursion (bias ablation).
  bool disable_bias_correction = false;
};

struct TrialRun {
  std::vector<double> msd;  // one value per completed iteration
  bool diverged = false;
};

// Called after every combine step with the iteration index and the agents.
using AgentObserver = std::function<void(int, std::span<const diffusion::AgentState>)>;

TrialRun run_trial(const Scenario& scenario, const TrialSignals& signals, const RunSpec& spec,
                   const AgentObserver& observer = {});

struct MsdTrace {
  Algorithm algorithm = Algorithm::kTheory;
  int bits = kFullResolution;
  std::vector<double> values;  // linear MSD per iteration, trial average
  bool diverged = false;

  std::string label() const;
};

struct ExperimentResult {
  std::vector<MsdTrace> traces;
  double theory_msd = 0.0;
  bool diverged = false;
};

// Trials run on `workers` threads; the trial average is reduced in trial
// order, so the output does not depend on the worker count.
ExperimentResult run_experiment(const Scenario& scenario, int workers = 1);
ExperimentResult run_experiment(const ScenarioConfig& config, int workers = 1);

// Mean of the final `fraction` of the trace (linear).
double steady_state(const MsdTrace& trace, double fraction = 0.1);
const MsdTrace* find_trace(const ExperimentResult& result, Algorithm algorithm, int bits);

// Sample estimate of R_{k,Q} = E[beta^2 x_Q x_Q^H] per node from `samples`
// regressors of the node's input process. bits == kFullResolution gives the
// unquantized R_k.
std::vector<CMatrix> estimate_quantized_covariance(const Scenario& scenario, int bits, int samples,
                                                   std::uint64_t seed);

}  // namespace dqa::simkit
