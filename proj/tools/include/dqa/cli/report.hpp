#pragma once

// Output files written by the dqa tool: CSV tables and self-contained SVG
// plots.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dqa/analysis.hpp"
#include "dqa/simkit.hpp"

namespace dqa::cli {

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// iteration,algorithm,bits,msd_linear,msd_db (bits = 0 for full resolution
// and for the theory line). Iterations are numbered from 1.
void write_msd_csv(std::ostream& os, const simkit::ExperimentResult& result);

struct PowerRow {
  int bits;
  double watts;
};
void write_power_csv(std::ostream& os, const std::vector<PowerRow>& rows);

void write_stability_csv(std::ostream& os, const analysis::StabilityReport& report);

struct ComplexityTableRow {
  int bits;
  analysis::OpCount ops;
};
void write_complexity_csv(std::ostream& os, const std::vector<ComplexityTableRow>& rows);

// Curve numbers: 1 theory, 2 full-resolution DLMS, then DLMS and DQA-LMS
// pairs for each bit depth in order (3/4, 5/6, ...).
int curve_number(const simkit::ExperimentResult& result, std::size_t trace_index);
std::string curve_legend(const simkit::MsdTrace& trace);

std::string render_msd_svg(const simkit::ExperimentResult& result, const std::string& title);
std::string render_power_svg(const std::vector<PowerRow>& rows, const std::string& title);

}  // namespace dqa::cli
