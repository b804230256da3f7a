#pragma once

#include <span>
#include <variant>
#include <vector>

namespace samrf {

// Exponential spectral angle mapper parameters: k(x1,x2) = gain * exp(-angle/scale).
struct EsamParams {
  double gain = 1.0;   // sigma_0^2
  double scale = 1.0;  // sigma_1^2, divides the angle (radians)
};

// Squared exponential parameters: k(x1,x2) = gain * exp(-|x1-x2|^2 / (2 l^2)).
struct SeParams {
  double gain = 1.0;
  double lengthscale = 1.0;
};

using Kernel = std::variant<EsamParams, SeParams>;

// Angle in [0, pi] between two spectra. Dot products and norms accumulate in
// double; the cosine is clamped to [-1, 1] before acos. Identical inputs
// return exactly 0. Rejects inputs whose norm is below 1e-12.
double spectral_angle(std::span<const double> x1, std::span<const double> x2);

double esam(std::span<const double> x1, std::span<const double> x2, const EsamParams& p);

double se_kernel(std::span<const double> x1, std::span<const double> x2, const SeParams& p);

double eval_kernel(std::span<const double> x1, std::span<const double> x2, const Kernel& k);

// Row-major |A| x |B| matrix with entry (i,j) = k(A[i], B[j]). Entries are
// evaluated in a fixed order per entry, so row-partitioned parallel
// evaluation reproduces the serial result bit for bit.
std::vector<double> kernel_matrix(const std::vector<std::vector<double>>& a,
                                  const std::vector<std::vector<double>>& b, const Kernel& k);

}  // namespace samrf
