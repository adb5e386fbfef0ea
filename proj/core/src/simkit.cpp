#include "dqa/simkit.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "dqa/format.hpp"

namespace dqa::simkit {
namespace {

constexpr int kBurnInFactor = 10;

std::uint64_t stream_id(Stream s) { return static_cast<std::uint64_t>(s); }

void fill_regressor(const std::vector<Complex>& samples, int i, CVector& x) {
  const Eigen::Index m = x.size();
  for (Eigen::Index j = 0; j < m; ++j) x[j] = samples[static_cast<std::size_t>(i + m - 1 - j)];
}

std::vector<RunSpec> experiment_runs(const ScenarioConfig& c) {
  std::vector<RunSpec> runs;
  if (c.full_resolution) runs.push_back({Algorithm::kDlmsFull, kFullResolution, false});
  for (int b : c.bit_depths) {
    runs.push_back({Algorithm::kDlmsQuantized, b, false});
    runs.push_back({Algorithm::kDqaLms, b, false});
  }
  return runs;
}

}  // namespace

void NodeProfile::validate() const {
  if (!(sigma_x_sq > 0.0)) throw std::invalid_argument("sigma_x_sq must be > 0");
  if (!(sigma_v_sq >= 0.0)) throw std::invalid_argument("sigma_v_sq must be >= 0");
  if (!(ar_coeff > -1.0 && ar_coeff < 1.0)) throw std::invalid_argument("ar_coeff must lie in (-1, 1)");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kTheory: return "theory";
    case Algorithm::kDlmsFull: return "dlms_full";
    case Algorithm::kDlmsQuantized: return "dlms_quantized";
    case Algorithm::kDqaLms: return "dqa_lms";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kTheory, Algorithm::kDlmsFull, Algorithm::kDlmsQuantized, Algorithm::kDqaLms}) {
    if (algorithm_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  if (n_nodes < 1) throw ConfigError("n_nodes", "must be >= 1");
  if (filter_len < 1) throw ConfigError("filter_len", "must be >= 1");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu", "must be a finite value >= 0");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (iterations < 1) throw ConfigError("iterations", "must be >= 1");
  for (int b : bit_depths) {
    if (b < quantkit::kMinBits || b > quantkit::kMaxBits) {
      throw ConfigError("bit_depths", "bit depth " + std::to_string(b) + " outside [1, 12]");
    }
  }
  if (!(topology_radius > 0.0)) throw ConfigError("topology_radius", "must be > 0");
  if (!(ranges.sigma_x_sq_min > 0.0 && ranges.sigma_x_sq_min <= ranges.sigma_x_sq_max)) {
    throw ConfigError("sigma_x_sq_range", "need 0 < min <= max");
  }
  if (!(ranges.sigma_v_sq_min >= 0.0 && ranges.sigma_v_sq_min <= ranges.sigma_v_sq_max)) {
    throw ConfigError("sigma_v_sq_range", "need 0 <= min <= max");
  }
  if (!(ranges.ar_min > -1.0 && ranges.ar_max < 1.0 && ranges.ar_min <= ranges.ar_max)) {
    throw ConfigError("ar_range", "need -1 < min <= max < 1");
  }
  if (!(steady_state_fraction > 0.0 && steady_state_fraction <= 1.0)) {
    throw ConfigError("steady_state_fraction", "must lie in (0, 1]");
  }
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "must be > 0");
  if (!(conversion_energy_j > 0.0)) throw ConfigError("conversion_energy_j", "must be > 0");
}

analysis::PowerModel ScenarioConfig::power_model() const {
  analysis::PowerModel p;
  p.bandwidth_hz = bandwidth_hz;
  p.conversion_energy_j = conversion_energy_j;
  p.n_nodes = n_nodes;
  return p;
}

std::vector<NodeProfile> draw_node_profiles(int n, const ProfileRanges& r, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {stream_id(Stream::kProfiles)}));
  std::vector<NodeProfile> out(static_cast<std::size_t>(n));
  for (auto& p : out) {
    p.sigma_x_sq = rng.uniform(r.sigma_x_sq_min, r.sigma_x_sq_max);
    p.sigma_v_sq = rng.uniform(r.sigma_v_sq_min, r.sigma_v_sq_max);
    p.ar_coeff = rng.uniform(r.ar_min, r.ar_max);
  }
  return out;
}

CVector draw_unknown_system(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("draw_unknown_system: m must be >= 1");
  Rng rng(derive_seed(seed, {stream_id(Stream::kUnknownSystem)}));
  CVector w(m);
  for (Eigen::Index i = 0; i < m; ++i) w[i] = rng.complex_normal(1.0);
  return w / w.norm();
}

std::vector<Complex> ar1_sample_stream(const NodeProfile& profile, int length, int burn_in_taps, Rng& rng) {
  profile.validate();
  const int burn = kBurnInFactor * burn_in_taps;
  const double r = profile.ar_coeff;
  const double drive = profile.sigma_x_sq * (1.0 - r * r);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(length));
  Complex u{0.0, 0.0};
  for (int i = 0; i < burn + length; ++i) {
    u = r * u + rng.complex_normal(drive);
    if (i >= burn) out.push_back(u);
  }
  return out;
}

std::vector<CVector> ar1_regressor_stream(const NodeProfile& profile, int m, int iterations, std::uint64_t seed) {
  if (m < 1 || iterations < 1) throw std::invalid_argument("ar1_regressor_stream: m and iterations must be >= 1");
  Rng rng(seed);
  const auto samples = ar1_sample_stream(profile, iterations + m - 1, m, rng);
  std::vector<CVector> out(static_cast<std::size_t>(iterations), CVector(m));
  for (int i = 0; i < iterations; ++i) fill_regressor(samples, i, out[static_cast<std::size_t>(i)]);
  return out;
}

RMatrix ar1_covariance(const NodeProfile& profile, int m) {
  RMatrix r(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) r(i, j) = profile.sigma_x_sq * std::pow(profile.ar_coeff, std::abs(i - j));
  }
  return r;
}

double stationary_desired_variance(const CVector& w_o, const NodeProfile& profile) {
  const RMatrix r = ar1_covariance(profile, static_cast<int>(w_o.size()));
  return (w_o.adjoint() * r.cast<Complex>() * w_o).value().real() + profile.sigma_v_sq;
}

Complex desired_signal(const CVector& w_o, const CVector& x, double sigma_v_sq, Rng& rng) {
  if (w_o.size() != x.size()) throw std::invalid_argument("desired_signal: dimension mismatch");
  const Complex clean = w_o.dot(x);
  if (sigma_v_sq == 0.0) return clean;
  return clean + rng.complex_normal(sigma_v_sq);
}

double msd(std::span<const CVector> w_all, const CVector& w_o) {
  if (w_all.empty()) throw std::invalid_argument("msd: no estimates");
  double acc = 0.0;
  for (const auto& w : w_all) {
    if (w.size() != w_o.size()) throw std::invalid_argument("msd: dimension mismatch");
    acc += (w_o - w).squaredNorm();
  }
  return acc / static_cast<double>(w_all.size());
}

std::shared_ptr<const quantkit::QuantizerDesign> shared_design(int bits) {
  if (bits < quantkit::kMinBits || bits > quantkit::kMaxBits) {
    throw std::invalid_argument("shared_design: bit depth outside [1, 12]");
  }
  static std::array<std::once_flag, quantkit::kMaxBits + 1> once;
  static std::array<std::shared_ptr<const quantkit::QuantizerDesign>, quantkit::kMaxBits + 1> cache;
  const auto idx = static_cast<std::size_t>(bits);
  std::call_once(once[idx], [&] {
    cache[idx] = std::make_shared<const quantkit::QuantizerDesign>(quantkit::design_quantizer(bits));
  });
  return cache[idx];
}

Scenario make_scenario(ScenarioConfig config, netgraph::NetworkTopology topology, std::vector<NodeProfile> profiles,
                       CVector w_o) {
  if (static_cast<int>(profiles.size()) != topology.size()) {
    throw std::invalid_argument("make_scenario: one profile per node required");
  }
  for (const auto& p : profiles) p.validate();
  config.n_nodes = topology.size();
  config.filter_len = static_cast<int>(w_o.size());
  config.validate();
  auto a = netgraph::metropolis_weights(topology);
  std::vector<double> dvar;
  dvar.reserve(profiles.size());
  for (const auto& p : profiles) dvar.push_back(stationary_desired_variance(w_o, p));
  return Scenario{std::move(config), std::move(topology), std::move(a), std::move(profiles), std::move(w_o),
                  std::move(dvar)};
}

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  auto topology = netgraph::random_geometric_topology(config.n_nodes, config.topology_radius, config.seed);
  auto profiles = draw_node_profiles(config.n_nodes, config.ranges, config.seed);
  auto w_o = draw_unknown_system(config.filter_len, config.seed);
  return make_scenario(config, std::move(topology), std::move(profiles), std::move(w_o));
}

TrialSignals generate_trial_signals(const Scenario& s, int trial) {
  const int n = s.n_nodes();
  const int m = s.filter_len();
  const int iters = s.config.iterations;
  TrialSignals sig;
  sig.input.resize(static_cast<std::size_t>(n));
  sig.noise.resize(static_cast<std::size_t>(n));
  const auto t = static_cast<std::uint64_t>(trial);
  for (int k = 0; k < n; ++k) {
    const auto node = static_cast<std::uint64_t>(k);
    const auto& prof = s.profiles[static_cast<std::size_t>(k)];
    Rng in_rng = Rng::substream(s.config.seed, {t, node, stream_id(Stream::kInput)});
    sig.input[static_cast<std::size_t>(k)] = ar1_sample_stream(prof, iters + m - 1, m, in_rng);
    Rng noise_rng = Rng::substream(s.config.seed, {t, node, stream_id(Stream::kNoise)});
    auto& v = sig.noise[static_cast<std::size_t>(k)];
    v.resize(static_cast<std::size_t>(iters));
    for (auto& z : v) z = prof.sigma_v_sq > 0.0 ? noise_rng.complex_normal(prof.sigma_v_sq) : Complex{};
  }
  return sig;
}

TrialRun run_trial(const Scenario& s, const TrialSignals& sig, const RunSpec& spec, const AgentObserver& observer) {
  const int n = s.n_nodes();
  const int m = s.filter_len();
  const int iters = s.config.iterations;
  const double mu = s.config.mu;

  const bool quantized = spec.bits != kFullResolution &&
                         (spec.algorithm == Algorithm::kDlmsQuantized || spec.algorithm == Algorithm::kDqaLms);
  if (spec.algorithm == Algorithm::kTheory) throw std::invalid_argument("run_trial: theory is not simulated");
  if (spec.algorithm == Algorithm::kDlmsFull && spec.bits != kFullResolution) {
    throw std::invalid_argument("run_trial: dlms_full runs at full resolution");
  }
  std::shared_ptr<const quantkit::QuantizerDesign> design = quantized ? shared_design(spec.bits) : nullptr;

  std::vector<diffusion::AgentState> agents;
  agents.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) agents.emplace_back(m, mu, quantized ? spec.bits : kFullResolution, design);

  // The ADC is a memoryless map of each scalar sample, so quantizing the
  // sample stream once equals quantizing every tapped-delay regressor.
  std::vector<std::vector<Complex>> q_input;
  if (quantized) {
    q_input.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double var = s.profiles[static_cast<std::size_t>(k)].sigma_x_sq;
      const auto& src = sig.input[static_cast<std::size_t>(k)];
      auto& dst = q_input[static_cast<std::size_t>(k)];
      dst.resize(src.size());
      for (std::size_t t = 0; t < src.size(); ++t) dst[t] = quantkit::quantize(*design, src[t], var);
    }
  }

  TrialRun out;
  out.msd.reserve(static_cast<std::size_t>(iters));
  CVector x(m);
  CVector x_q(m);
  for (int i = 0; i < iters; ++i) {
    for (int k = 0; k < n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      auto& agent = agents[ku];
      fill_regressor(sig.input[ku], i, x);
      const Complex d = s.w_o.dot(x) + sig.noise[ku][static_cast<std::size_t>(i)];
      if (!quantized) {
        if (spec.algorithm == Algorithm::kDqaLms) {
          diffusion::dqa_lms_adapt(agent, {x, d}, diffusion::compute_bias_correction(
                                                      agent, x, s.config.variance_mode,
                                                      s.profiles[ku].sigma_x_sq));
        } else {
          diffusion::dlms_adapt(agent, {x, d});
        }
        continue;
      }
      fill_regressor(q_input[ku], i, x_q);
      const Complex d_q = quantkit::quantize(*design, d, s.desired_variance[ku]);
      if (spec.algorithm == Algorithm::kDlmsQuantized) {
        diffusion::dlms_adapt(agent, {x_q, d_q});
      } else {
        auto corr = diffusion::compute_bias_correction(agent, x_q, s.config.variance_mode,
                                                       s.profiles[ku].sigma_x_sq);
        if (spec.disable_bias_correction) corr.beta = 1.0;
        diffusion::dqa_lms_adapt(agent, {x_q, d_q}, corr);
      }
    }
    diffusion::combine(std::span<diffusion::AgentState>(agents), s.combination);
    if (observer) observer(i, std::span<const diffusion::AgentState>(agents));

    double acc = 0.0;
    for (const auto& a : agents) acc += (s.w_o - a.w).squaredNorm();
    const double value = acc / n;
    if (!std::isfinite(value) || value > kDivergenceThreshold) {
      out.diverged = true;
      break;
    }
    out.msd.push_back(value);
  }
  return out;
}

std::string MsdTrace::label() const {
  std::string s(algorithm_name(algorithm));
  if (bits != kFullResolution) s += "_b" + std::to_string(bits);
  return s;
}

ExperimentResult run_experiment(const Scenario& s, int workers) {
  const auto& cfg = s.config;
  const auto runs = experiment_runs(cfg);
  const int trials = cfg.trials;
  for (const auto& r : runs) {
    if (r.bits != kFullResolution) shared_design(r.bits);
  }

  std::vector<std::vector<TrialRun>> per_trial(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        const auto sig = generate_trial_signals(s, t);
        auto& slot = per_trial[static_cast<std::size_t>(t)];
        slot.reserve(runs.size());
        for (const auto& r : runs) slot.push_back(run_trial(s, sig, r));
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_workers = std::clamp(workers, 1, trials);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  std::vector<double> sv;
  for (const auto& p : s.profiles) sv.push_back(p.sigma_v_sq);
  result.theory_msd = cfg.mu > 0.0 ? analysis::theoretical_msd(cfg.mu, s.filter_len(), s.n_nodes(), sv) : 0.0;

  if (cfg.theory) {
    MsdTrace th;
    th.algorithm = Algorithm::kTheory;
    th.values.assign(static_cast<std::size_t>(cfg.iterations), result.theory_msd);
    result.traces.push_back(std::move(th));
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    MsdTrace tr;
    tr.algorithm = runs[r].algorithm;
    tr.bits = runs[r].bits;
    std::size_t len = static_cast<std::size_t>(cfg.iterations);
    for (const auto& trial : per_trial) {
      len = std::min(len, trial[r].msd.size());
      tr.diverged = tr.diverged || trial[r].diverged;
    }
    tr.values.assign(len, 0.0);
    for (const auto& trial : per_trial) {
      for (std::size_t i = 0; i < len; ++i) tr.values[i] += trial[r].msd[i];
    }
    for (double& v : tr.values) v /= trials;
    result.diverged = result.diverged || tr.diverged;
    result.traces.push_back(std::move(tr));
  }
  return result;
}

ExperimentResult run_experiment(const ScenarioConfig& config, int workers) {
  return run_experiment(build_scenario(config), workers);
}

double steady_state(const MsdTrace& trace, double fraction) {
  if (trace.values.empty()) throw std::invalid_argument("steady_state: empty trace");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("steady_state: fraction outside (0, 1]");
  const std::size_t n = trace.values.size();
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * n)));
  double acc = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) acc += trace.values[i];
  return acc / static_cast<double>(tail);
}

const MsdTrace* find_trace(const ExperimentResult& result, Algorithm algorithm, int bits) {
  for (const auto& t : result.traces) {
    if (t.algorithm == algorithm && (algorithm == Algorithm::kTheory || t.bits == bits)) return &t;
  }
  return nullptr;
}

std::vector<CMatrix> estimate_quantized_covariance(const Scenario& s, int bits, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("estimate_quantized_covariance: samples must be >= 1");
  const int m = s.filter_len();
  std::shared_ptr<const quantkit::QuantizerDesign> design =
      bits == kFullResolution ? nullptr : shared_design(bits);
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(s.n_nodes()));
  for (int k = 0; k < s.n_nodes(); ++k) {
    const auto& prof = s.profiles[static_cast<std::size_t>(k)];
    Rng rng = Rng::substream(seed, {static_cast<std::uint64_t>(k), stream_id(Stream::kCovariance)});
    auto u = ar1_sample_stream(prof, samples + m - 1, m, rng);
    double beta = 1.0;
    if (design) {
      for (auto& z : u) z = quantkit::quantize(*design, z, prof.sigma_x_sq);
      beta = diffusion::stationary_bias_correction(*design, prof.sigma_x_sq).beta;
    }
    CMatrix x(m, samples);
    for (int i = 0; i < samples; ++i) {
      for (int j = 0; j < m; ++j) x(j, i) = u[static_cast<std::size_t>(i + m - 1 - j)];
    }
    CMatrix r = (beta * beta / samples) * (x * x.adjoint());
    r = 0.5 * (r + r.adjoint()).eval();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dqa::simkit
