#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "samrf/hypercube.hpp"

namespace samrf {

// Per-pixel, per-class energies, pixel-major: energies[pixel*class_count + (c-1)].
// Units are radians for the SAM provider and nats for probability providers.
struct UnaryField {
  int width = 0;
  int height = 0;
  int class_count = 0;
  std::vector<double> energies;

  int pixel_count() const { return width * height; }

  double at(int pixel, int label) const {
    return energies[static_cast<std::size_t>(pixel) * class_count + label - 1];
  }

  static UnaryField create(int width, int height, int class_count, std::vector<double> energies);
};

// Per-pixel class probabilities, same pixel-major layout as UnaryField.
struct ProbabilityField {
  int width = 0;
  int height = 0;
  int class_count = 0;
  std::vector<double> values;

  int pixel_count() const { return width * height; }
};

struct TrainingSet {
  int bands = 0;
  int class_count = 0;
  std::vector<std::vector<double>> spectra;
  std::vector<int> labels;  // 1..class_count, parallel to spectra

  std::size_t size() const { return spectra.size(); }
};

// Copies the spectra at the given pixel indices out of the cube. Every index
// must carry a nonzero label.
TrainingSet gather_training(const SpectralCube& cube, const LabelMap& labels,
                            const std::vector<int>& pixels);

// energy(i,c) = minimum spectral angle between pixel i and the training
// spectra of class c. Every class needs at least one exemplar. threads > 1
// partitions the image by pixel; results are identical for any partitioning.
UnaryField sam_unary(const SpectralCube& cube, const TrainingSet& train, int threads = 1);

// Multinomial logistic regression with an L2 penalty on the non-bias weights.
struct LrModel {
  int bands = 0;
  int class_count = 0;
  double l2_strength = 0.0;
  std::vector<double> weights;  // class_count rows x (bands+1) cols, last col = bias
  int iterations = 0;
  double grad_inf_norm = 0.0;
  bool converged = false;

  double weight(int label, int col) const {
    return weights[static_cast<std::size_t>(label - 1) * (bands + 1) + col];
  }
};

struct LrOptions {
  int max_iterations = 1000;
  double tolerance = 1e-6;  // on the gradient infinity norm
};

// Deterministic full-batch L-BFGS from a zero start. Training samples are
// canonicalized (sorted by label, then spectrum) before optimization, so any
// permutation of the input produces the identical model. Non-convergence
// within the iteration cap is reported on the model, not thrown.
LrModel train_lr(const TrainingSet& train, double l2_strength, const LrOptions& options = {});

// Regularized negative log-likelihood and (optionally) its gradient at the
// given weights; layout matches LrModel::weights.
double lr_objective(std::span<const double> weights, const TrainingSet& train, double l2_strength,
                    std::vector<double>* gradient = nullptr);

// Softmax class probabilities of every pixel under the model.
ProbabilityField lr_probabilities(const LrModel& model, const SpectralCube& cube);

// energy = -ln(max(p, floor)); keeps energies finite at p = 0.
UnaryField neglog_unary(const ProbabilityField& probs, double floor = 1e-12);

// CSV with one row per pixel (row-major), class_count columns. Rows must sum
// to within [0.9, 1.1] and are renormalized to remove serialization
// round-off. Stand-in for probability outputs of external classifiers.
ProbabilityField load_external_probabilities(const std::filesystem::path& path, int width,
                                             int height, int class_count);

}  // namespace samrf
