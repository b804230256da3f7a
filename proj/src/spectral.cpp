#include "samrf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "samrf/error.hpp"

namespace samrf {

namespace {

constexpr double kMinNorm = 1e-12;

void check_params(double gain, double other, const char* other_name, const char* op) {
  if (!(gain > 0.0) || !std::isfinite(gain))
    throw Error(std::string(op) + ": gain must be strictly positive and finite");
  if (!(other > 0.0) || !std::isfinite(other))
    throw Error(std::string(op) + ": " + other_name + " must be strictly positive and finite");
}

void check_lengths(std::span<const double> x1, std::span<const double> x2, const char* op) {
  if (x1.size() != x2.size())
    throw Error(std::string(op) + ": length mismatch (" + std::to_string(x1.size()) + " vs " +
                std::to_string(x2.size()) + ")");
}

}  // namespace

double spectral_angle(std::span<const double> x1, std::span<const double> x2) {
  check_lengths(x1, x2, "spectral_angle");
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    dot += x1[i] * x2[i];
    n1 += x1[i] * x1[i];
    n2 += x2[i] * x2[i];
  }
  if (std::sqrt(n1) < kMinNorm)
    throw Error("spectral_angle: first argument has near-zero norm");
  if (std::sqrt(n2) < kMinNorm)
    throw Error("spectral_angle: second argument has near-zero norm");
  if (std::equal(x1.begin(), x1.end(), x2.begin())) return 0.0;
  const double cosine = std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
  return std::acos(cosine);
}

double esam(std::span<const double> x1, std::span<const double> x2, const EsamParams& p) {
  check_params(p.gain, p.scale, "scale", "esam");
  return p.gain * std::exp(-spectral_angle(x1, x2) / p.scale);
}

double se_kernel(std::span<const double> x1, std::span<const double> x2, const SeParams& p) {
  check_params(p.gain, p.lengthscale, "lengthscale", "se_kernel");
  check_lengths(x1, x2, "se_kernel");
  double sq = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double d = x1[i] - x2[i];
    sq += d * d;
  }
  return p.gain * std::exp(-sq / (2.0 * p.lengthscale * p.lengthscale));
}

double eval_kernel(std::span<const double> x1, std::span<const double> x2, const Kernel& k) {
  if (const auto* e = std::get_if<EsamParams>(&k)) return esam(x1, x2, *e);
  return se_kernel(x1, x2, std::get<SeParams>(k));
}

std::vector<double> kernel_matrix(const std::vector<std::vector<double>>& a,
                                  const std::vector<std::vector<double>>& b, const Kernel& k) {
  std::vector<double> m(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m[i * b.size() + j] = eval_kernel(a[i], b[j], k);
    }
  }
  return m;
}

}  // namespace samrf
