#include "dqa/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dqa/format.hpp"

namespace dqa::cli {
namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 230.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;
constexpr std::size_t kMaxPoints = 800;

const char* const kPalette[] = {"#000000", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f"};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    const double span = x1 > x0 ? x1 - x0 : 1.0;
    return kLeft + (x - x0) / span * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    const double span = y1 > y0 ? y1 - y0 : 1.0;
    return kHeight - kBottom - (y - y0) / span * (kHeight - kTop - kBottom);
  }
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& title, const std::string& xlabel,
          const std::string& ylabel, bool integer_x) {
  svg << "<text x=\"" << fixed(kWidth / 2 - kRight / 2, 1) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";
  const double ystep = nice_step(f.y1 - f.y0, 8);
  for (double y = std::ceil(f.y0 / ystep) * ystep; y <= f.y1 + 1e-9; y += ystep) {
    svg << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(f.py(y), 1) << "\" x2=\""
        << fixed(kWidth - kRight, 1) << "\" y2=\"" << fixed(f.py(y), 1) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fixed(kLeft - 6, 1) << "\" y=\"" << fixed(f.py(y) + 4, 1)
        << "\" text-anchor=\"end\" font-size=\"11\">" << fixed(y, ystep < 1 ? 1 : 0) << "</text>\n";
  }
  double xstep = nice_step(f.x1 - f.x0, 8);
  if (integer_x) xstep = std::max(1.0, std::round(xstep));
  for (double x = std::ceil(f.x0 / xstep) * xstep; x <= f.x1 + 1e-9; x += xstep) {
    svg << "<line x1=\"" << fixed(f.px(x), 1) << "\" y1=\"" << fixed(kTop, 1) << "\" x2=\"" << fixed(f.px(x), 1)
        << "\" y2=\"" << fixed(kHeight - kBottom, 1) << "\" stroke=\"#eeeeee\"/>\n";
    svg << "<text x=\"" << fixed(f.px(x), 1) << "\" y=\"" << fixed(kHeight - kBottom + 16, 1)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fixed(x, 0) << "</text>\n";
  }
  svg << "<rect x=\"" << fixed(kLeft, 1) << "\" y=\"" << fixed(kTop, 1) << "\" width=\""
      << fixed(kWidth - kLeft - kRight, 1) << "\" height=\"" << fixed(kHeight - kTop - kBottom, 1)
      << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  svg << "<text x=\"" << fixed((kLeft + kWidth - kRight) / 2, 1) << "\" y=\"" << fixed(kHeight - 14, 1)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xlabel) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << fixed((kTop + kHeight - kBottom) / 2, 1)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << fixed((kTop + kHeight - kBottom) / 2, 1) << ")\">" << escape(ylabel) << "</text>\n";
}

void legend_entry(std::ostringstream& svg, int row, const std::string& color, bool dashed, const std::string& text) {
  const double x = kWidth - kRight + 14;
  const double y = kTop + 12 + 18.0 * row;
  svg << "<line x1=\"" << fixed(x, 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\"" << fixed(x + 24, 1) << "\" y2=\""
      << fixed(y, 1) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
  svg << "<text x=\"" << fixed(x + 30, 1) << "\" y=\"" << fixed(y + 4, 1) << "\" font-size=\"11\">" << escape(text)
      << "</text>\n";
}

std::string header() {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
    << fixed(kHeight, 0) << "\" viewBox=\"0 0 " << fixed(kWidth, 0) << " " << fixed(kHeight, 0)
    << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  return s.str();
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_msd_csv(std::ostream& os, const simkit::ExperimentResult& result) {
  os << "iteration,algorithm,bits,msd_linear,msd_db\n";
  for (const auto& t : result.traces) {
    const auto name = simkit::algorithm_name(t.algorithm);
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      os << (i + 1) << ',' << name << ',' << t.bits << ',' << format_double(t.values[i]) << ','
         << format_double(analysis::to_db(t.values[i])) << '\n';
    }
  }
}

void write_power_csv(std::ostream& os, const std::vector<PowerRow>& rows) {
  os << "bits,watts\n";
  for (const auto& r : rows) os << r.bits << ',' << format_double(r.watts) << '\n';
}

void write_stability_csv(std::ostream& os, const analysis::StabilityReport& report) {
  os << "node,mu,mu_max,stable\n";
  for (std::size_t k = 0; k < report.per_node_mu_max.size(); ++k) {
    const double mu = report.configured_mu[k];
    const double mu_max = report.per_node_mu_max[k];
    os << k << ',' << format_double(mu) << ',' << format_double(mu_max) << ','
       << ((mu > 0.0 && mu < mu_max) ? "true" : "false") << '\n';
  }
}

void write_complexity_csv(std::ostream& os, const std::vector<ComplexityTableRow>& rows) {
  os << "bits,mult,add,div,exp\n";
  for (const auto& r : rows) {
    os << r.bits << ',' << r.ops.mult << ',' << r.ops.add << ',' << r.ops.div << ',' << r.ops.exp << '\n';
  }
}

int curve_number(const simkit::ExperimentResult& result, std::size_t trace_index) {
  const auto& t = result.traces.at(trace_index);
  if (t.algorithm == simkit::Algorithm::kTheory) return 1;
  if (t.algorithm == simkit::Algorithm::kDlmsFull) return 2;
  std::vector<int> order;
  for (const auto& o : result.traces) {
    const bool q = o.algorithm == simkit::Algorithm::kDlmsQuantized || o.algorithm == simkit::Algorithm::kDqaLms;
    if (q && std::find(order.begin(), order.end(), o.bits) == order.end()) order.push_back(o.bits);
  }
  const auto pos = std::find(order.begin(), order.end(), t.bits) - order.begin();
  return 3 + 2 * static_cast<int>(pos) + (t.algorithm == simkit::Algorithm::kDqaLms ? 1 : 0);
}

std::string curve_legend(const simkit::MsdTrace& t) {
  switch (t.algorithm) {
    case simkit::Algorithm::kTheory: return "Theory";
    case simkit::Algorithm::kDlmsFull: return "DLMS (full resolution)";
    case simkit::Algorithm::kDlmsQuantized: return "DLMS, " + std::to_string(t.bits) + "-bit";
    case simkit::Algorithm::kDqaLms: return "DQA-LMS, " + std::to_string(t.bits) + "-bit";
  }
  return "?";
}

std::string render_msd_svg(const simkit::ExperimentResult& result, const std::string& title) {
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  std::size_t n = 1;
  for (const auto& t : result.traces) {
    n = std::max(n, t.values.size());
    for (double v : t.values) {
      const double db = analysis::to_db(v);
      if (std::isfinite(db)) {
        ymin = std::min(ymin, db);
        ymax = std::max(ymax, db);
      }
    }
  }
  if (!std::isfinite(ymin)) {
    ymin = -10.0;
    ymax = 0.0;
  }
  const Frame f{1.0, static_cast<double>(n), std::floor(ymin / 5.0) * 5.0, std::ceil(ymax / 5.0) * 5.0 + 1e-9};

  std::ostringstream svg;
  svg << header();
  axes(svg, f, title, "Iteration", "MSD (dB)", true);
  for (std::size_t c = 0; c < result.traces.size(); ++c) {
    const auto& t = result.traces[c];
    const int num = curve_number(result, c);
    const std::string color = kPalette[static_cast<std::size_t>(num - 1) % std::size(kPalette)];
    const bool dashed = t.algorithm == simkit::Algorithm::kTheory;
    const std::size_t stride = std::max<std::size_t>(1, t.values.size() / kMaxPoints);
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < t.values.size(); i += stride) {
      const double db = analysis::to_db(t.values[i]);
      if (!std::isfinite(db)) continue;
      svg << fixed(f.px(static_cast<double>(i + 1)), 2) << ',' << fixed(f.py(db), 2) << ' ';
    }
    svg << "\"/>\n";
    legend_entry(svg, static_cast<int>(c), color, dashed, std::to_string(num) + ": " + curve_legend(t));
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_power_svg(const std::vector<PowerRow>& rows, const std::string& title) {
  if (rows.empty()) throw std::invalid_argument("render_power_svg: no rows");
  // y axis in dB relative to 1 W keeps the exponential curve readable
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  for (const auto& r : rows) {
    ymin = std::min(ymin, 10.0 * std::log10(r.watts));
    ymax = std::max(ymax, 10.0 * std::log10(r.watts));
  }
  const Frame f{static_cast<double>(rows.front().bits), static_cast<double>(rows.back().bits),
                std::floor(ymin / 5.0) * 5.0, std::ceil(ymax / 5.0) * 5.0 + 1e-9};
  std::ostringstream svg;
  svg << header();
  axes(svg, f, title, "ADC resolution (bits)", "Total ADC power (dBW)", true);
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& r : rows) {
    svg << fixed(f.px(r.bits), 2) << ',' << fixed(f.py(10.0 * std::log10(r.watts)), 2) << ' ';
  }
  svg << "\"/>\n";
  for (const auto& r : rows) {
    svg << "<circle cx=\"" << fixed(f.px(r.bits), 2) << "\" cy=\"" << fixed(f.py(10.0 * std::log10(r.watts)), 2)
        << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  legend_entry(svg, 0, "#1f77b4", false, "P = 2 N c B 2^b");
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dqa::cli
