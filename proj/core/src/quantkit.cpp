#include "dqa/quantkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "dqa/format.hpp"

namespace dqa::quantkit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::numbers::sqrt2;
const double kInvSqrtPi = std::numbers::inv_sqrtpi;

void check_bits(int bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw std::invalid_argument("bit depth must be in [1, 12], got " + std::to_string(bits));
  }
}

// Conditional mean of N(0,1) restricted to (a, b].
double cell_centroid(double a, double b) {
  const double mass = normal_cell_mass(a, b);
  return (standard_normal_pdf(a) - standard_normal_pdf(b)) / mass;
}

struct CellGeometry {
  std::vector<double> centroid;
  std::vector<double> d_lower;  // d centroid / d lower edge
  std::vector<double> d_upper;  // d centroid / d upper edge
};

// `interior` holds tau_1 .. tau_{L-1}.
CellGeometry cells(const std::vector<double>& interior) {
  const std::size_t levels = interior.size() + 1;
  CellGeometry g;
  g.centroid.resize(levels);
  g.d_lower.resize(levels);
  g.d_upper.resize(levels);
  for (std::size_t j = 0; j < levels; ++j) {
    const double a = j == 0 ? -kInf : interior[j - 1];
    const double b = j + 1 == levels ? kInf : interior[j];
    const double mass = normal_cell_mass(a, b);
    const double c = cell_centroid(a, b);
    g.centroid[j] = c;
    g.d_lower[j] = std::isinf(a) ? 0.0 : standard_normal_pdf(a) * (c - a) / mass;
    g.d_upper[j] = std::isinf(b) ? 0.0 : standard_normal_pdf(b) * (b - c) / mass;
  }
  return g;
}

double residual_norm(const std::vector<double>& interior, const std::vector<double>& centroid) {
  double worst = 0.0;
  for (std::size_t i = 0; i < interior.size(); ++i) {
    worst = std::max(worst, std::abs(interior[i] - 0.5 * (centroid[i] + centroid[i + 1])));
  }
  return worst;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
    if (i > 0 && !(v[i] > v[i - 1])) return false;
  }
  return true;
}

// The source density is even, so the optimal thresholds are odd-symmetric.
void symmetrize(std::vector<double>& interior) {
  const std::size_t n = interior.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (interior[n - 1 - i] - interior[i]);
    interior[i] = -v;
    interior[n - 1 - i] = v;
  }
  if (n % 2 == 1) interior[n / 2] = 0.0;
}

// Solves the tridiagonal Newton system J * delta = -G (Thomas algorithm).
std::vector<double> newton_step(const std::vector<double>& interior, const CellGeometry& g) {
  const std::size_t n = interior.size();
  std::vector<double> sub(n), diag(n), sup(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    // threshold i separates cell i (below) and cell i+1 (above)
    rhs[i] = -(interior[i] - 0.5 * (g.centroid[i] + g.centroid[i + 1]));
    diag[i] = 1.0 - 0.5 * (g.d_upper[i] + g.d_lower[i + 1]);
    sub[i] = i > 0 ? -0.5 * g.d_lower[i] : 0.0;
    sup[i] = i + 1 < n ? -0.5 * g.d_upper[i + 1] : 0.0;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> delta(n);
  delta[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    delta[i] = (rhs[i] - sup[i] * delta[i + 1]) / diag[i];
  }
  return delta;
}

std::vector<double> lloyd_step(const CellGeometry& g) {
  std::vector<double> next(g.centroid.size() - 1);
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = 0.5 * (g.centroid[i] + g.centroid[i + 1]);
  }
  return next;
}

QuantizerDesign make_design(int bits, const std::vector<double>& interior, std::vector<double> labels) {
  QuantizerDesign d;
  d.bits = bits;
  d.thresholds.reserve(interior.size() + 2);
  d.thresholds.push_back(-kInf);
  d.thresholds.insert(d.thresholds.end(), interior.begin(), interior.end());
  d.thresholds.push_back(kInf);
  d.labels = std::move(labels);
  return d;
}

}  // namespace

double standard_normal_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return kInvSqrtPi / kSqrt2 * std::exp(-0.5 * x * x);
}

double standard_normal_cdf(double x) {
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  return 0.5 * std::erfc(-x / kSqrt2);
}

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw std::invalid_argument("quantile probability outside [0, 1]");
  }
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_cell_mass(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
  return 1.0 - 0.5 * std::erfc(b / kSqrt2) - 0.5 * std::erfc(-a / kSqrt2);
}

QuantizerDesign design_lloyd_max(int bits, int max_iters, double tol) {
  check_bits(bits);
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");

  const int levels = 1 << bits;
  std::vector<double> interior(static_cast<std::size_t>(levels - 1));
  for (int p = 1; p < levels; ++p) {
    interior[static_cast<std::size_t>(p - 1)] =
        standard_normal_quantile(static_cast<double>(p) / levels);
  }
  symmetrize(interior);

  CellGeometry geom = cells(interior);
  double change = kInf;
  for (int it = 1; it <= max_iters; ++it) {
    const double res = residual_norm(interior, geom.centroid);

    std::vector<double> next;
    CellGeometry next_geom;
    bool accepted = false;
    const std::vector<double> delta = newton_step(interior, geom);
    double step = 1.0;
    for (int tries = 0; tries < 8 && !accepted; ++tries, step *= 0.5) {
      next = interior;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += step * delta[i];
      symmetrize(next);
      if (!strictly_increasing(next)) continue;
      next_geom = cells(next);
      if (residual_norm(next, next_geom.centroid) < res || res == 0.0) accepted = true;
    }
    if (!accepted) {
      next = lloyd_step(geom);
      symmetrize(next);
      next_geom = cells(next);
    }

    change = 0.0;
    for (std::size_t j = 0; j < geom.centroid.size(); ++j) {
      change = std::max(change, std::abs(next_geom.centroid[j] - geom.centroid[j]));
    }
    interior = std::move(next);
    geom = std::move(next_geom);
    if (change < tol) return make_design(bits, interior, geom.centroid);
  }
  throw ConvergenceError("Lloyd-Max did not converge for b=" + std::to_string(bits) + " within " +
                             std::to_string(max_iters) + " iterations",
                         make_design(bits, interior, geom.centroid), max_iters, change);
}

double rescale_factor(const QuantizerDesign& design) {
  if (design.labels.size() + 1 != design.thresholds.size() || design.labels.empty()) {
    throw std::invalid_argument("malformed quantizer design");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < design.labels.size(); ++j) {
    // mass of (tau_j, tau_{j+1}] for N(0, 1/2) equals N(0,1) mass of the sqrt(2)-scaled cell
    const double p = normal_cell_mass(kSqrt2 * design.thresholds[j], kSqrt2 * design.thresholds[j + 1]);
    acc += design.labels[j] * design.labels[j] * p;
  }
  if (!(acc > 0.0) || !std::isfinite(acc)) {
    throw std::invalid_argument("malformed quantizer design: zero label energy");
  }
  return 1.0 / std::sqrt(2.0 * acc);
}

QuantizerDesign rescale_labels(const QuantizerDesign& design) {
  const double alpha = rescale_factor(design);
  QuantizerDesign out = design;
  for (double& l : out.labels) l *= alpha;
  out.alpha = design.alpha * alpha;
  return out;
}

QuantizerDesign design_quantizer(int bits) {
  return rescale_labels(design_lloyd_max(bits));
}

int cell_index(const QuantizerDesign& design, double u) {
  // first interior threshold >= u; ties land in the lower cell
  const auto first = design.thresholds.begin() + 1;
  const auto last = design.thresholds.end() - 1;
  return static_cast<int>(std::lower_bound(first, last, u) - first);
}

double quantize_component(const QuantizerDesign& design, double u, double scale) {
  return design.labels[static_cast<std::size_t>(cell_index(design, u / scale))] * scale;
}

Complex quantize(const QuantizerDesign& design, Complex x, double sigma_x_sq) {
  if (!(sigma_x_sq > 0.0)) throw std::invalid_argument("quantize: variance must be positive");
  const double scale = std::sqrt(sigma_x_sq);
  return {quantize_component(design, x.real(), scale), quantize_component(design, x.imag(), scale)};
}

CVector quantize(const CVector& x, const QuantizerDesign& design, double sigma_x_sq) {
  if (!(sigma_x_sq > 0.0)) throw std::invalid_argument("quantize: variance must be positive");
  const double scale = std::sqrt(sigma_x_sq);
  CVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[i] = Complex(quantize_component(design, x[i].real(), scale),
                     quantize_component(design, x[i].imag(), scale));
  }
  return out;
}

double bussgang_gain(const QuantizerDesign& design, double sigma_x_sq) {
  if (!(sigma_x_sq > 0.0)) throw std::invalid_argument("bussgang_gain: variance must be positive");
  // Thresholds and labels scale with the signal, so the gain reduces to the
  // unit-variance sum.
  double g = 0.0;
  for (std::size_t j = 0; j < design.labels.size(); ++j) {
    const double lo = design.thresholds[j];
    const double hi = design.thresholds[j + 1];
    g += design.labels[j] * kInvSqrtPi * (std::exp(-lo * lo) - std::exp(-hi * hi));
  }
  return g;
}

double distortion_factor(int bits) {
  return std::numbers::pi * std::sqrt(3.0) / 2.0 * std::ldexp(1.0, -2 * bits);
}

double quantization_noise_variance(double gain, double sigma_x_sq, double sigma_xq_sq) {
  return std::max(0.0, sigma_xq_sq - gain * gain * sigma_x_sq);
}

DistortionModel distortion_model(const QuantizerDesign& design, double sigma_x_sq) {
  DistortionModel m;
  m.rho = distortion_factor(design.bits);
  m.gain = bussgang_gain(design, sigma_x_sq);
  // labels are power-normalized: E|x_Q|^2 == sigma_x^2
  m.sigma_q_sq = quantization_noise_variance(m.gain, sigma_x_sq, sigma_x_sq);
  return m;
}

void write_design_csv(std::ostream& os, const QuantizerDesign& design) {
  os << "cell_index,tau_low,tau_high,label\n";
  for (std::size_t j = 0; j < design.labels.size(); ++j) {
    os << j << ',' << format_double(design.thresholds[j]) << ',' << format_double(design.thresholds[j + 1])
       << ',' << format_double(design.labels[j]) << '\n';
  }
}

}  // namespace dqa::quantkit
