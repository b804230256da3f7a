#include "samrf/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

#include "samrf/error.hpp"

namespace samrf {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Sample standard deviation (n-1); a single observation reports 0.
double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) {
    if (values.size() == 1)
      std::cerr << "warning: standard deviation over one repetition reported as 0\n";
    return 0.0;
  }
  const double mean = mean_of(values);
  double ssq = 0.0;
  for (double v : values) ssq += (v - mean) * (v - mean);
  return std::sqrt(ssq / static_cast<double>(values.size() - 1));
}

}  // namespace

std::string provider_name(UnaryProvider p) {
  switch (p) {
    case UnaryProvider::sam: return "sam";
    case UnaryProvider::lr: return "lr";
    case UnaryProvider::external: return "external";
  }
  throw Error("unknown unary provider");
}

UnaryProvider provider_from_name(const std::string& name) {
  if (name == "sam") return UnaryProvider::sam;
  if (name == "lr") return UnaryProvider::lr;
  if (name == "external") return UnaryProvider::external;
  throw Error("unknown unary provider '" + name + "', expected sam, lr or external");
}

void ExperimentConfig::validate() const {
  if (beta_grid.empty()) throw Error("beta grid must not be empty");
  for (double b : beta_grid) {
    if (!std::isfinite(b) || b < 0.0) throw Error("beta grid entries must be finite and >= 0");
  }
  if (train_per_class_grid.empty()) throw Error("train-per-class grid must not be empty");
  for (int t : train_per_class_grid) {
    if (t < 1) throw Error("train-per-class entries must be >= 1");
  }
  if (test_per_class < 1) throw Error("test-per-class must be >= 1");
  if (repetitions < 1) throw Error("repetitions must be >= 1");
  if (!std::isfinite(lr_lambda) || lr_lambda < 0.0)
    throw Error("lambda must be finite and >= 0");
  if (!(unary_fraction > 0.0) || !(unary_fraction < 1.0))
    throw Error("unary fraction must lie strictly between 0 and 1");
  if (threads < 1) throw Error("threads must be >= 1");
}

double overall_accuracy(const Labeling& predicted, const LabelMap& truth,
                        const std::vector<int>& eval_pixels) {
  if (eval_pixels.empty()) throw Error("overall_accuracy: no evaluation pixels");
  if (predicted.size() != static_cast<std::size_t>(truth.pixel_count()))
    throw Error("overall_accuracy: prediction length does not match the label map");
  long correct = 0;
  for (int p : eval_pixels) {
    if (p < 0 || p >= truth.pixel_count())
      throw Error("overall_accuracy: pixel index " + std::to_string(p) + " out of range");
    if (truth.labels[p] == 0)
      throw Error("overall_accuracy: evaluation pixel " + std::to_string(p) + " is unlabeled");
    if (predicted[p] == truth.labels[p]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval_pixels.size());
}

BetaSelection select_beta(const UnaryField& unary, const GridGraph& grid, const LabelMap& truth,
                          const std::vector<int>& validation_pixels,
                          const std::vector<double>& beta_grid) {
  if (beta_grid.empty()) throw Error("select_beta: empty beta grid");
  if (validation_pixels.empty()) throw Error("select_beta: no validation pixels");

  // scan candidates in ascending value so accuracy ties keep the smallest
  std::vector<std::size_t> order(beta_grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return beta_grid[a] < beta_grid[b]; });

  const Labeling init = unary_argmin(unary);
  BetaSelection selection;
  selection.validation_accuracy.assign(beta_grid.size(), 0.0);
  double best_accuracy = -1.0;
  for (std::size_t idx : order) {
    const ExpansionResult expanded =
        alpha_expansion(unary, PottsParams{beta_grid[idx]}, grid, init);
    const double accuracy = overall_accuracy(expanded.labeling, truth, validation_pixels);
    selection.validation_accuracy[idx] = accuracy;
    if (accuracy > best_accuracy) {
      best_accuracy = accuracy;
      selection.beta = beta_grid[idx];
    }
  }
  return selection;
}

namespace {

UnaryField build_unary(const SpectralCube& cube, const LabelMap& labels,
                       const ExperimentConfig& config, const std::vector<int>& train_pixels,
                       const ProbabilityField* external_probs) {
  switch (config.provider) {
    case UnaryProvider::sam: {
      const TrainingSet train = gather_training(cube, labels, train_pixels);
      return sam_unary(cube, train, config.threads);
    }
    case UnaryProvider::lr: {
      const TrainingSet train = gather_training(cube, labels, train_pixels);
      const LrModel model = train_lr(train, config.lr_lambda);
      return neglog_unary(lr_probabilities(model, cube));
    }
    case UnaryProvider::external: {
      if (external_probs == nullptr)
        throw Error("external provider needs a probability field");
      if (external_probs->width != cube.width || external_probs->height != cube.height)
        throw Error("external probabilities do not match the cube dimensions");
      if (external_probs->class_count != labels.class_count)
        throw Error("external probabilities carry " +
                    std::to_string(external_probs->class_count) + " classes, labels have " +
                    std::to_string(labels.class_count));
      return neglog_unary(*external_probs);
    }
  }
  throw Error("unknown unary provider");
}

void check_disjoint(const Split& split) {
  std::vector<int> train = split.all_training();
  std::vector<int> test = split.all_test();
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  std::vector<int> overlap;
  std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty())
    throw Error("split leaks test pixel " + std::to_string(overlap.front()) +
                " into the training set");
}

}  // namespace

TrialResult run_trial(const SpectralCube& cube, const LabelMap& labels,
                      const ExperimentConfig& config, int train_per_class, int trial_index,
                      const ProbabilityField* external_probs) {
  config.validate();
  if (trial_index < 0) throw Error("trial index must be >= 0");
  if (cube.width != labels.width || cube.height != labels.height)
    throw Error("cube and label map dimensions disagree");

  TrialResult result;
  result.trial_index = trial_index;
  result.train_per_class = train_per_class;
  result.seed = config.base_seed + static_cast<std::uint64_t>(trial_index);

  SplitSpec spec;
  spec.train_per_class = train_per_class;
  spec.test_per_class = config.test_per_class;
  spec.unary_fraction = config.unary_fraction;
  spec.seed = result.seed;
  const Split split = make_split(labels, spec);
  check_disjoint(split);
  result.split_digest = split.digest();

  const GridGraph grid(cube.width, cube.height);

  auto start = std::chrono::steady_clock::now();
  UnaryField unary = build_unary(cube, labels, config, split.all_unary_train(), external_probs);
  result.timings.unary_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const BetaSelection selection =
      select_beta(unary, grid, labels, split.all_beta_validation(), config.beta_grid);
  result.chosen_beta = selection.beta;
  result.validation_accuracy_per_beta = selection.validation_accuracy;
  result.timings.beta_selection_seconds = seconds_since(start);

  if (config.retrain_on_full_training && config.provider != UnaryProvider::external) {
    start = std::chrono::steady_clock::now();
    unary = build_unary(cube, labels, config, split.all_training(), external_probs);
    result.timings.unary_seconds += seconds_since(start);
  }

  start = std::chrono::steady_clock::now();
  const Labeling pixelwise = unary_argmin(unary);
  const ExpansionResult expanded =
      alpha_expansion(unary, PottsParams{result.chosen_beta}, grid, pixelwise);
  result.timings.inference_seconds = seconds_since(start);

  const std::vector<int> test_pixels = split.all_test();
  result.pixelwise_accuracy = overall_accuracy(pixelwise, labels, test_pixels);
  result.mrf_accuracy = overall_accuracy(expanded.labeling, labels, test_pixels);
  return result;
}

ResultTable run_experiment(const SpectralCube& cube, const LabelMap& labels,
                           const ExperimentConfig& config,
                           const ProbabilityField* external_probs) {
  config.validate();

  struct Task {
    int grid_index;
    int repetition;
  };
  std::vector<Task> tasks;
  for (int g = 0; g < static_cast<int>(config.train_per_class_grid.size()); ++g) {
    for (int r = 0; r < config.repetitions; ++r) tasks.push_back({g, r});
  }

  std::vector<TrialResult> trials(tasks.size());
  const int workers =
      std::max(1, std::min<int>(config.threads, static_cast<int>(tasks.size())));
  // with several trial workers the inner unary stage stays single-threaded
  ExperimentConfig trial_config = config;
  if (workers > 1) trial_config.threads = 1;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      try {
        trials[t] = run_trial(cube, labels, trial_config,
                              config.train_per_class_grid[tasks[t].grid_index],
                              tasks[t].repetition, external_probs);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ResultTable table;
  table.trials = std::move(trials);
  for (int g = 0; g < static_cast<int>(config.train_per_class_grid.size()); ++g) {
    std::vector<double> pixelwise, mrf, betas, pixel_seconds, mrf_seconds;
    for (const TrialResult& trial : table.trials) {
      if (trial.train_per_class != config.train_per_class_grid[g]) continue;
      pixelwise.push_back(trial.pixelwise_accuracy);
      mrf.push_back(trial.mrf_accuracy);
      betas.push_back(trial.chosen_beta);
      pixel_seconds.push_back(trial.timings.unary_seconds);
      mrf_seconds.push_back(trial.timings.unary_seconds + trial.timings.beta_selection_seconds +
                            trial.timings.inference_seconds);
    }
    ResultRow row;
    row.train_per_class = config.train_per_class_grid[g];
    row.mean_pixelwise = mean_of(pixelwise);
    row.std_pixelwise = sample_std(pixelwise);
    row.mean_mrf = mean_of(mrf);
    row.std_mrf = sample_std(mrf);
    row.mean_chosen_beta = mean_of(betas);
    row.mean_pixelwise_seconds = mean_of(pixel_seconds);
    row.mean_mrf_seconds = mean_of(mrf_seconds);
    table.rows.push_back(row);
  }
  return table;
}

std::string ResultTable::to_csv() const {
  std::string csv =
      "trainPerClass,variant,meanAccuracyPercent,stdAccuracyPercent,meanChosenBeta,meanSeconds\n";
  for (const ResultRow& row : rows) {
    const std::string prefix = std::to_string(row.train_per_class);
    const std::string beta = format("%.6g", row.mean_chosen_beta);
    csv += prefix + ",pixelwise," + format("%.2f", row.mean_pixelwise * 100.0) + "," +
           format("%.2f", row.std_pixelwise * 100.0) + "," + beta + "," +
           format("%.6f", row.mean_pixelwise_seconds) + "\n";
    csv += prefix + ",mrf," + format("%.2f", row.mean_mrf * 100.0) + "," +
           format("%.2f", row.std_mrf * 100.0) + "," + beta + "," +
           format("%.6f", row.mean_mrf_seconds) + "\n";
  }
  return csv;
}

}  // namespace samrf
