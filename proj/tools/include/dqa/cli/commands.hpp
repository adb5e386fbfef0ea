#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dqa/cli/config.hpp"
#include "dqa/cli/report.hpp"

namespace dqa::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags, malformed config, out-of-range parameters
  kExitInternal = 2,  // anything unexpected
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int workers = 1;                    // 0: one per hardware thread
  bool svg = true;
};

struct PowerOptions {
  int n_nodes = 20;
  double bandwidth_hz = 200e3;
  double conversion_energy_j = 494e-15;
  int bits_min = 1;
  int bits_max = 12;
  std::filesystem::path out_dir = ".";
  bool svg = true;
};

struct AnalyzeOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
};

// Each command returns an ExitCode; errors are reported on `err`.
int cmd_run(const CliConfig& config, const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_power(const PowerOptions& options, std::ostream& out, std::ostream& err);
int cmd_quantizer(int bits, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);
int cmd_analyze(const CliConfig& config, const AnalyzeOptions& options, std::ostream& out, std::ostream& err);

std::vector<PowerRow> power_table(const PowerOptions& options);

// Full command-line entry point (argv[0] is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dqa::cli
