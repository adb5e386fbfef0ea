#pragma once

// Scalar quantizers for Gaussian sources and the Bussgang quantities used by
// the quantization-aware adaptive filters.
//
// A design describes a b-bit quantizer for a unit-variance source: 2^b + 1
// thresholds with infinite endpoints and 2^b labels. Cells are half-open,
// (tau_p, tau_{p+1}], so a value sitting exactly on a threshold falls in the
// lower cell.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqa/types.hpp"

namespace dqa::quantkit {

inline constexpr int kMinBits = 1;
inline constexpr int kMaxBits = 12;
inline constexpr int kDefaultMaxIters = 10'000;
inline constexpr double kDefaultTol = 1e-10;

struct QuantizerDesign {
  int bits = 0;
  std::vector<double> thresholds;  // size 2^b + 1, thresholds.front() == -inf
  std::vector<double> labels;      // size 2^b
  double alpha = 1.0;              // label scale applied by rescale_labels

  int levels() const { return static_cast<int>(labels.size()); }
  double interior_threshold(int i) const { return thresholds[static_cast<std::size_t>(i) + 1]; }
};

struct DistortionModel {
  double rho = 0.0;         // distortion factor
  double sigma_q_sq = 0.0;  // Bussgang distortion variance
  double gain = 1.0;        // scalar Bussgang gain
};

// Thrown when Lloyd-Max does not settle within the iteration budget. Carries
// the last iterate so callers can inspect how far it got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, QuantizerDesign last, int iterations, double last_change)
      : std::runtime_error(what),
        last_(std::move(last)),
        iterations_(iterations),
        last_change_(last_change) {}

  const QuantizerDesign& last_iterate() const { return last_; }
  int iterations() const { return iterations_; }
  double last_change() const { return last_change_; }

 private:
  QuantizerDesign last_;
  int iterations_;
  double last_change_;
};

double standard_normal_pdf(double x);
double standard_normal_cdf(double x);
double standard_normal_quantile(double p);

// Probability mass of (a, b] under N(0, 1), computed on the tail that keeps
// the subtraction well conditioned.
double normal_cell_mass(double a, double b);

// MSE-optimal thresholds/labels for N(0, 1). Each iteration is a Lloyd step
// (centroids, then midpoints) accelerated by a safeguarded Newton step on the
// same fixed-point equations; it stops once no label moves by more than tol.
QuantizerDesign design_lloyd_max(int bits, int max_iters = kDefaultMaxIters, double tol = kDefaultTol);

// alpha = (2 sum_j l_j^2 p_j)^(-1/2) with p_j the mass of cell j for a real
// Gaussian of variance 1/2, i.e. one component of a unit-power complex source.
double rescale_factor(const QuantizerDesign& design);
QuantizerDesign rescale_labels(const QuantizerDesign& design);

// Lloyd-Max followed by label rescaling: the design every ADC in the
// simulator uses.
QuantizerDesign design_quantizer(int bits);

// Index p of the cell (tau_p, tau_{p+1}] containing the normalized value u.
int cell_index(const QuantizerDesign& design, double u);

double quantize_component(const QuantizerDesign& design, double u, double scale);
Complex quantize(const QuantizerDesign& design, Complex x, double sigma_x_sq);
CVector quantize(const CVector& x, const QuantizerDesign& design, double sigma_x_sq);

double bussgang_gain(const QuantizerDesign& design, double sigma_x_sq);
double distortion_factor(int bits);
double quantization_noise_variance(double gain, double sigma_x_sq, double sigma_xq_sq);
DistortionModel distortion_model(const QuantizerDesign& design, double sigma_x_sq);

// cell_index, tau_low, tau_high, label -- infinities as `inf` / `-inf`.
void write_design_csv(std::ostream& os, const QuantizerDesign& design);

}  // namespace dqa::quantkit
