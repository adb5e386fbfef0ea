#include "dqa/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "dqa/format.hpp"
#include "dqa/version.hpp"

namespace dqa::cli {
namespace {

namespace fs = std::filesystem;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::string db_text(double linear) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%8.2f", analysis::to_db(linear));
  return buf;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void try_write_svg(const fs::path& path, const std::function<std::string()>& render, std::ostream& err,
                   std::vector<std::string>& written) {
  try {
    write_file_atomic(path, render());
    written.push_back(path.filename().string());
  } catch (const std::exception& e) {
    err << "warning: plot not written (" << e.what() << ")\n";
  }
}

}  // namespace

std::vector<PowerRow> power_table(const PowerOptions& o) {
  if (o.bits_min < 1 || o.bits_max > 64 || o.bits_min > o.bits_max) {
    throw std::invalid_argument("bits range must satisfy 1 <= min <= max <= 64");
  }
  if (o.n_nodes < 1 || !(o.bandwidth_hz > 0.0) || !(o.conversion_energy_j > 0.0)) {
    throw std::invalid_argument("nodes, bandwidth and conversion energy must be positive");
  }
  analysis::PowerModel model;
  model.n_nodes = o.n_nodes;
  model.bandwidth_hz = o.bandwidth_hz;
  model.conversion_energy_j = o.conversion_energy_j;
  std::vector<PowerRow> rows;
  for (int b = o.bits_min; b <= o.bits_max; ++b) rows.push_back({b, analysis::adc_network_power(model, b)});
  return rows;
}

int cmd_run(const CliConfig& config, const RunOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CliConfig cfg = config;
    if (o.seed) cfg.scenario.seed = *o.seed;
    cfg.scenario.validate();
    ensure_dir(o.out_dir);

    const auto start = std::chrono::steady_clock::now();
    const auto scenario = simkit::build_scenario(cfg.scenario);
    const int workers = resolve_workers(o.workers);
    const auto result = simkit::run_experiment(scenario, workers);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::string> written;
    std::ostringstream csv;
    write_msd_csv(csv, result);
    write_file_atomic(o.out_dir / "msd.csv", csv.str());
    written.push_back("msd.csv");

    std::ostringstream edges, nodes;
    netgraph::write_edge_list_csv(edges, scenario.topology);
    netgraph::write_node_csv(nodes, scenario.topology);
    write_file_atomic(o.out_dir / "topology_edges.csv", edges.str());
    write_file_atomic(o.out_dir / "topology_nodes.csv", nodes.str());
    written.push_back("topology_edges.csv");
    written.push_back("topology_nodes.csv");

    if (o.svg) {
      try_write_svg(o.out_dir / "msd.svg",
                    [&] { return render_msd_svg(result, "Network MSD, " + cfg.scenario.name); }, err, written);
    }

    auto manifest = nlohmann::ordered_json::object();
    manifest["tool"] = "dqa";
    manifest["command"] = "run";
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.scenario.seed;
    manifest["workers"] = workers;
    manifest["config"] = to_json(cfg);
    manifest["artifacts"] = written;
    manifest["wall_clock_seconds"] = elapsed;
    manifest["unstable"] = result.diverged;
    auto steady = nlohmann::ordered_json::object();
    std::vector<std::string> diverged;
    for (const auto& t : result.traces) {
      if (t.diverged) diverged.push_back(t.label());
      if (!t.values.empty()) {
        steady[t.label()] = analysis::to_db(simkit::steady_state(t, cfg.scenario.steady_state_fraction));
      }
    }
    manifest["diverged_curves"] = diverged;
    manifest["steady_state_msd_db"] = steady;
    write_file_atomic(o.out_dir / "manifest.json", manifest.dump(2) + "\n");

    out << "scenario " << cfg.scenario.name << ": N=" << scenario.n_nodes() << " M=" << scenario.filter_len()
        << " mu=" << format_double(cfg.scenario.mu) << " trials=" << cfg.scenario.trials
        << " iterations=" << cfg.scenario.iterations << " seed=" << cfg.scenario.seed << '\n';
    out << "steady-state MSD (dB), last " << format_double(100.0 * cfg.scenario.steady_state_fraction)
        << "% of iterations:\n";
    for (std::size_t i = 0; i < result.traces.size(); ++i) {
      const auto& t = result.traces[i];
      if (t.values.empty()) continue;
      out << "  " << curve_number(result, i) << "  " << db_text(simkit::steady_state(t, cfg.scenario.steady_state_fraction))
          << "  " << curve_legend(t) << (t.diverged ? "  [diverged]" : "") << '\n';
    }
    if (result.diverged) err << "warning: at least one curve diverged; see manifest.json\n";
    out << "wrote " << (o.out_dir / "msd.csv").string() << " in " << format_double(std::round(elapsed * 100) / 100)
        << " s\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_power(const PowerOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto rows = power_table(o);
    ensure_dir(o.out_dir);
    std::ostringstream csv;
    write_power_csv(csv, rows);
    write_file_atomic(o.out_dir / "power.csv", csv.str());
    std::vector<std::string> written{"power.csv"};
    if (o.svg) {
      try_write_svg(o.out_dir / "power.svg", [&] { return render_power_svg(rows, "Total ADC power"); }, err,
                    written);
    }
    out << "bits  watts\n";
    for (const auto& r : rows) out << r.bits << "  " << format_double(r.watts) << '\n';
    if (o.bits_min < o.bits_max) {
      out << "reduction at " << o.bits_min << " bits vs " << o.bits_max
          << " bits: " << format_double(100.0 * analysis::power_reduction(o.bits_min, o.bits_max)) << "%\n";
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_quantizer(int bits, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (bits < quantkit::kMinBits || bits > quantkit::kMaxBits) {
      throw std::invalid_argument("bits must be in [1, 12], got " + std::to_string(bits));
    }
    ensure_dir(out_dir);
    const auto design = quantkit::design_quantizer(bits);
    const auto dm = quantkit::distortion_model(design, 1.0);

    std::ostringstream csv;
    quantkit::write_design_csv(csv, design);
    write_file_atomic(out_dir / "quantizer.csv", csv.str());

    std::ostringstream summary;
    summary << "bits,alpha,gain,rho,sigma_q_sq\n"
            << bits << ',' << format_double(design.alpha) << ',' << format_double(dm.gain) << ','
            << format_double(dm.rho) << ',' << format_double(dm.sigma_q_sq) << '\n';
    write_file_atomic(out_dir / "quantizer_summary.csv", summary.str());

    out << csv.str();
    out << "alpha = " << format_double(design.alpha) << "\ng = " << format_double(dm.gain)
        << "\nrho = " << format_double(dm.rho) << "\nsigma_q^2 = " << format_double(dm.sigma_q_sq) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_analyze(const CliConfig& config, const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CliConfig cfg = config;
    if (o.seed) cfg.scenario.seed = *o.seed;
    cfg.scenario.validate();
    ensure_dir(o.out_dir);
    const auto s = simkit::build_scenario(cfg.scenario);
    const std::vector<double> mu(static_cast<std::size_t>(s.n_nodes()), cfg.scenario.mu);

    bool all_stable = true;
    auto stability = [&](int bits, const std::string& file) {
      const auto r = simkit::estimate_quantized_covariance(s, bits, cfg.covariance_samples, cfg.scenario.seed);
      const auto report = analysis::stability_bound(r, mu);
      std::ostringstream csv;
      write_stability_csv(csv, report);
      write_file_atomic(o.out_dir / file, csv.str());
      double tightest = report.per_node_mu_max.front();
      for (double m : report.per_node_mu_max) tightest = std::min(tightest, m);
      out << "stability " << (bits == kFullResolution ? std::string("full") : std::to_string(bits) + "-bit")
          << ": min mu_max = " << format_double(tightest) << ", mu = " << format_double(cfg.scenario.mu)
          << (report.stable ? ", stable" : ", UNSTABLE") << '\n';
      all_stable = all_stable && report.stable;
    };
    if (cfg.scenario.full_resolution) stability(kFullResolution, "stability_full.csv");
    for (int b : cfg.scenario.bit_depths) stability(b, "stability_b" + std::to_string(b) + ".csv");

    const int n_k = cfg.complexity_n_k > 0 ? cfg.complexity_n_k : s.topology.max_degree();
    std::vector<ComplexityTableRow> rows;
    for (int b : cfg.scenario.bit_depths) {
      rows.push_back({b, analysis::complexity_count(s.filter_len(), n_k, b).total});
    }
    std::ostringstream cx;
    write_complexity_csv(cx, rows);
    write_file_atomic(o.out_dir / "complexity.csv", cx.str());
    out << "complexity per node and iteration (M=" << s.filter_len() << ", n_k=" << n_k << "):\n";
    for (const auto& r : rows) {
      out << "  b=" << r.bits << "  mult " << r.ops.mult << "  add " << r.ops.add << "  div " << r.ops.div
          << "  exp " << r.ops.exp << '\n';
    }

    std::vector<double> sv;
    for (const auto& p : s.profiles) sv.push_back(p.sigma_v_sq);
    const double theory = analysis::theoretical_msd(cfg.scenario.mu, s.filter_len(), s.n_nodes(), sv);
    std::ostringstream th;
    th << "msd_linear,msd_db\n" << format_double(theory) << ',' << format_double(analysis::to_db(theory)) << '\n';
    write_file_atomic(o.out_dir / "theory.csv", th.str());
    out << "theoretical MSD = " << format_double(theory) << " (" << db_text(theory) << " dB)\n";
    if (!all_stable) err << "warning: configured step size violates the stability bound\n";
    return static_cast<int>(kExitOk);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion adaptation over coarsely quantized data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  std::string preset_name;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 1;
  bool svg = true;

  auto add_config_opts = [&](CLI::App* sub) {
    auto* c = sub->add_option("--config", config_path, "Config file (key = value) or a run manifest.json");
    sub->add_option("--preset", preset_name, "Built-in preset: paper_fig4, smoke")->excludes(c);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Override the scenario seed");
  };

  auto* run = app.add_subcommand("run", "Run the Monte-Carlo MSD experiment");
  add_config_opts(run);
  run->add_option("--workers", workers, "Worker threads (0: all hardware threads)")->check(CLI::NonNegativeNumber);
  run->add_flag("--svg,!--no-svg", svg, "Write msd.svg");

  auto* analyze = app.add_subcommand("analyze", "Stability bounds, complexity and theoretical MSD");
  add_config_opts(analyze);

  PowerOptions power_opts;
  std::string power_out = ".";
  auto* power = app.add_subcommand("power", "ADC power table");
  power->add_option("--nodes", power_opts.n_nodes, "Number of nodes N");
  power->add_option("--bandwidth", power_opts.bandwidth_hz, "Bandwidth B in Hz");
  power->add_option("--energy", power_opts.conversion_energy_j, "Energy per conversion step c in J");
  power->add_option("--bits-min", power_opts.bits_min, "Smallest bit depth");
  power->add_option("--bits-max", power_opts.bits_max, "Largest bit depth");
  power->add_option("--out", power_out, "Output directory");
  power->add_flag("--svg,!--no-svg", power_opts.svg, "Write power.svg");

  int q_bits = 0;
  std::string q_out = ".";
  auto* quant = app.add_subcommand("quantizer", "Design a Lloyd-Max quantizer and report g, rho, alpha");
  quant->add_option("--bits", q_bits, "Bit depth (1..12)")->required();
  quant->add_option("--out", q_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return kExitUsage;
  }

  auto load = [&](CLI::App* sub) -> std::optional<CliConfig> {
    try {
      if (!config_path.empty()) return load_config(config_path);
      if (!preset_name.empty()) return preset(preset_name);
      err << "error: " << sub->get_name() << " needs --config or --preset\n";
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
    }
    return std::nullopt;
  };
  const bool seed_given = app.got_subcommand(run) ? run->count("--seed") > 0
                                                  : app.got_subcommand(analyze) && analyze->count("--seed") > 0;

  if (app.got_subcommand(run)) {
    auto cfg = load(run);
    if (!cfg) return kExitUsage;
    RunOptions o;
    o.out_dir = out_dir;
    if (seed_given) o.seed = seed;
    o.workers = workers;
    o.svg = svg;
    return cmd_run(*cfg, o, out, err);
  }
  if (app.got_subcommand(analyze)) {
    auto cfg = load(analyze);
    if (!cfg) return kExitUsage;
    AnalyzeOptions o;
    o.out_dir = out_dir;
    if (seed_given) o.seed = seed;
    return cmd_analyze(*cfg, o, out, err);
  }
  if (app.got_subcommand(power)) {
    power_opts.out_dir = power_out;
    return cmd_power(power_opts, out, err);
  }
  return cmd_quantizer(q_bits, q_out, out, err);
}

}  // namespace dqa::cli
