#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "samrf/hypercube.hpp"
#include "samrf/mrf.hpp"
#include "samrf/unary.hpp"

namespace samrf {

enum class UnaryProvider { sam, lr, external };

std::string provider_name(UnaryProvider p);
UnaryProvider provider_from_name(const std::string& name);

struct ExperimentConfig {
  std::vector<double> beta_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<int> train_per_class_grid = {10, 20, 30, 40, 50, 60, 70};
  int test_per_class = 50;
  int repetitions = 30;
  std::uint64_t base_seed = 0;
  UnaryProvider provider = UnaryProvider::sam;
  double lr_lambda = 1.0;
  double unary_fraction = 0.7;
  // When true (default) the unary model is refit on the full training set
  // after beta selection; when false the 70% model produces the final map.
  bool retrain_on_full_training = true;
  int threads = 1;

  void validate() const;
};

struct StageTimings {
  double unary_seconds = 0.0;
  double beta_selection_seconds = 0.0;
  double inference_seconds = 0.0;
};

struct TrialResult {
  int trial_index = 0;
  std::uint64_t seed = 0;
  int train_per_class = 0;
  double chosen_beta = 0.0;
  std::vector<double> validation_accuracy_per_beta;  // parallel to the beta grid
  double pixelwise_accuracy = 0.0;
  double mrf_accuracy = 0.0;
  StageTimings timings;
  std::uint64_t split_digest = 0;
};

struct ResultRow {
  int train_per_class = 0;
  double mean_pixelwise = 0.0;  // fractions in [0,1]
  double std_pixelwise = 0.0;
  double mean_mrf = 0.0;
  double std_mrf = 0.0;
  double mean_chosen_beta = 0.0;
  double mean_pixelwise_seconds = 0.0;
  double mean_mrf_seconds = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<TrialResult> trials;

  // CSV with columns trainPerClass, variant (pixelwise|mrf),
  // meanAccuracyPercent, stdAccuracyPercent, meanChosenBeta, meanSeconds.
  // Accuracies are percentages with two decimals.
  std::string to_csv() const;
};

// Fraction of eval_pixels whose predicted label equals ground truth. Every
// eval pixel must be labeled; the set must be non-empty.
double overall_accuracy(const Labeling& predicted, const LabelMap& truth,
                        const std::vector<int>& eval_pixels);

struct BetaSelection {
  double beta = 0.0;
  std::vector<double> validation_accuracy;  // parallel to the candidate grid
};

// Runs full-image alpha-expansion once per candidate beta on the given unary
// field and scores the result on the validation pixels. Ties go to the
// smallest beta (candidates are scanned in ascending order).
BetaSelection select_beta(const UnaryField& unary, const GridGraph& grid, const LabelMap& truth,
                          const std::vector<int>& validation_pixels,
                          const std::vector<double>& beta_grid);

// One randomized trial: seeded split, unary model on the 70% subset, beta
// selection on the held-out 30%, refit on the full training set, full-image
// inference, accuracies on the test pixels. Deterministic given
// (base_seed, trial_index). external_probs is required for the external
// provider and ignored otherwise.
TrialResult run_trial(const SpectralCube& cube, const LabelMap& labels,
                      const ExperimentConfig& config, int train_per_class, int trial_index,
                      const ProbabilityField* external_probs = nullptr);

// The repeated-trial harness: config.repetitions trials per entry of
// config.train_per_class_grid, aggregated into mean / sample standard
// deviation (n-1). Trials may run on config.threads workers; the table is
// identical for any worker count.
ResultTable run_experiment(const SpectralCube& cube, const LabelMap& labels,
                           const ExperimentConfig& config,
                           const ProbabilityField* external_probs = nullptr);

}  // namespace samrf
