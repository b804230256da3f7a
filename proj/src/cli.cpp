#include "samrf/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "samrf/error.hpp"
#include "samrf/hypercube.hpp"
#include "samrf/mrf.hpp"
#include "samrf/protocol.hpp"
#include "samrf/render.hpp"
#include "samrf/unary.hpp"

namespace samrf::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct CommonOptions {
  std::string cube_path;
  std::string labels_path;
  std::string provider = "sam";
  std::string ext_probs_path;
  std::string out_dir;
  double lr_lambda = 1.0;
  int threads = 1;
  bool no_normalize = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--cube", opt.cube_path, "cube header file")->required();
  cmd->add_option("--labels", opt.labels_path, "ground-truth label CSV")->required();
  cmd->add_option("--provider", opt.provider, "unary provider: sam, lr or external")
      ->default_val("sam");
  cmd->add_option("--ext-probs", opt.ext_probs_path,
                  "per-pixel class probability CSV for the external provider");
  cmd->add_option("--lambda", opt.lr_lambda, "L2 strength of the lr provider")->default_val(1.0);
  cmd->add_option("--threads", opt.threads, "worker thread cap")->default_val(1);
  cmd->add_flag("--no-normalize", opt.no_normalize, "skip per-band z-scoring of the cube");
  cmd->add_option("--out-dir", opt.out_dir, "output directory")->required();
}

struct LoadedScene {
  SpectralCube cube;
  LabelMap labels;
  std::optional<ProbabilityField> external;
};

LoadedScene load_scene(const CommonOptions& opt) {
  LoadedScene scene;
  scene.cube = load_cube(opt.cube_path);
  if (!opt.no_normalize) scene.cube = normalize_bands(scene.cube);
  scene.labels = load_labels(opt.labels_path, scene.cube.width, scene.cube.height);
  if (provider_from_name(opt.provider) == UnaryProvider::external) {
    if (opt.ext_probs_path.empty())
      throw Error("provider external needs --ext-probs");
    scene.external = load_external_probabilities(opt.ext_probs_path, scene.cube.width,
                                                 scene.cube.height, scene.labels.class_count);
  }
  return scene;
}

json common_config_json(const CommonOptions& opt) {
  json j;
  j["cube"] = opt.cube_path;
  j["labels"] = opt.labels_path;
  j["provider"] = opt.provider;
  if (!opt.ext_probs_path.empty()) j["extProbs"] = opt.ext_probs_path;
  j["lambda"] = opt.lr_lambda;
  j["threads"] = opt.threads;
  j["normalize"] = !opt.no_normalize;
  j["outDir"] = opt.out_dir;
  return j;
}

char hex_digit(unsigned v) { return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10); }

std::string hex64(std::uint64_t v) {
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = hex_digit(static_cast<unsigned>(v & 0xf));
    v >>= 4;
  }
  return s;
}

struct ClassifyOptions {
  CommonOptions common;
  int train_per_class = 50;
  int test_per_class = 50;
  std::uint64_t seed = 0;
  double beta = 0.0;
};

int cmd_classify(const ClassifyOptions& opt) {
  const LoadedScene scene = load_scene(opt.common);
  const fs::path out_dir(opt.common.out_dir);
  fs::create_directories(out_dir);

  ExperimentConfig provider_config;
  provider_config.provider = provider_from_name(opt.common.provider);
  provider_config.lr_lambda = opt.common.lr_lambda;
  provider_config.threads = opt.common.threads;

  SplitSpec spec;
  spec.train_per_class = opt.train_per_class;
  spec.test_per_class = opt.test_per_class;
  spec.seed = opt.seed;
  const Split split = make_split(scene.labels, spec);

  auto start = std::chrono::steady_clock::now();
  UnaryField unary;
  switch (provider_config.provider) {
    case UnaryProvider::sam: {
      const TrainingSet train = gather_training(scene.cube, scene.labels, split.all_training());
      unary = sam_unary(scene.cube, train, provider_config.threads);
      break;
    }
    case UnaryProvider::lr: {
      const TrainingSet train = gather_training(scene.cube, scene.labels, split.all_training());
      const LrModel model = train_lr(train, provider_config.lr_lambda);
      unary = neglog_unary(lr_probabilities(model, scene.cube));
      break;
    }
    case UnaryProvider::external: {
      unary = neglog_unary(*scene.external);
      break;
    }
  }
  const double unary_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const GridGraph grid(scene.cube.width, scene.cube.height);
  const Labeling pixelwise = unary_argmin(unary);
  const ExpansionResult expanded = alpha_expansion(unary, PottsParams{opt.beta}, grid, pixelwise);
  const double inference_seconds = seconds_since(start);

  const Palette palette = Palette::standard16();
  if (scene.labels.class_count > static_cast<int>(palette.colors.size()))
    throw Error("palette supports up to " + std::to_string(palette.colors.size()) +
                " classes, label map has " + std::to_string(scene.labels.class_count));

  write_labels(expanded.labeling, scene.cube.width, scene.cube.height,
               out_dir / "predicted_labels.csv");
  write_ppm(expanded.labeling, scene.cube.width, scene.cube.height, palette, out_dir / "map.ppm");

  json config = common_config_json(opt.common);
  config["command"] = "classify";
  config["trainPerClass"] = opt.train_per_class;
  config["testPerClass"] = opt.test_per_class;
  config["seed"] = opt.seed;
  config["beta"] = opt.beta;
  write_json(out_dir / "resolved_config.json", config);

  const std::vector<int> test_pixels = split.all_test();
  const double pixel_acc = overall_accuracy(pixelwise, scene.labels, test_pixels);
  const double mrf_acc = overall_accuracy(expanded.labeling, scene.labels, test_pixels);
  std::cout << "provider " << opt.common.provider << ", beta " << opt.beta << "\n"
            << "pixelwise test accuracy: " << percent(pixel_acc) << "%\n"
            << "mrf test accuracy: " << percent(mrf_acc) << "%\n"
            << "unary stage: " << unary_seconds << " s, inference stage: " << inference_seconds
            << " s\n"
            << "wrote " << (out_dir / "predicted_labels.csv").string() << ", "
            << (out_dir / "map.ppm").string() << "\n";
  return 0;
}

struct ExperimentOptions {
  CommonOptions common;
  std::vector<double> beta_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<int> train_per_class = {10, 20, 30, 40, 50, 60, 70};
  int test_per_class = 50;
  int repetitions = 30;
  std::uint64_t seed = 0;
  double unary_fraction = 0.7;
  bool no_retrain = false;
};

json trial_json(const TrialResult& trial, const std::vector<double>& beta_grid) {
  json j;
  j["trialIndex"] = trial.trial_index;
  j["seed"] = trial.seed;
  j["trainPerClass"] = trial.train_per_class;
  j["splitDigest"] = hex64(trial.split_digest);
  j["chosenBeta"] = trial.chosen_beta;
  j["betaGrid"] = beta_grid;
  j["validationAccuracyPerBeta"] = trial.validation_accuracy_per_beta;
  j["pixelwiseAccuracy"] = trial.pixelwise_accuracy;
  j["mrfAccuracy"] = trial.mrf_accuracy;
  j["timings"] = {{"unarySeconds", trial.timings.unary_seconds},
                  {"betaSelectionSeconds", trial.timings.beta_selection_seconds},
                  {"inferenceSeconds", trial.timings.inference_seconds}};
  return j;
}

int cmd_experiment(const ExperimentOptions& opt) {
  const LoadedScene scene = load_scene(opt.common);
  const fs::path out_dir(opt.common.out_dir);
  fs::create_directories(out_dir);

  ExperimentConfig config;
  config.beta_grid = opt.beta_grid;
  config.train_per_class_grid = opt.train_per_class;
  config.test_per_class = opt.test_per_class;
  config.repetitions = opt.repetitions;
  config.base_seed = opt.seed;
  config.provider = provider_from_name(opt.common.provider);
  config.lr_lambda = opt.common.lr_lambda;
  config.unary_fraction = opt.unary_fraction;
  config.retrain_on_full_training = !opt.no_retrain;
  config.threads = opt.common.threads;
  config.validate();

  json resolved = common_config_json(opt.common);
  resolved["command"] = "experiment";
  resolved["betaGrid"] = opt.beta_grid;
  resolved["trainPerClass"] = opt.train_per_class;
  resolved["testPerClass"] = opt.test_per_class;
  resolved["repetitions"] = opt.repetitions;
  resolved["seed"] = opt.seed;
  resolved["unaryFraction"] = opt.unary_fraction;
  resolved["retrainOnFullTraining"] = !opt.no_retrain;
  write_json(out_dir / "resolved_config.json", resolved);

  const ProbabilityField* external = scene.external ? &*scene.external : nullptr;
  const ResultTable table = run_experiment(scene.cube, scene.labels, config, external);

  write_text(out_dir / "results.csv", table.to_csv());
  for (std::size_t t = 0; t < table.trials.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%03zu.json", t);
    write_json(out_dir / name, trial_json(table.trials[t], config.beta_grid));
  }

  std::cout << table.to_csv() << "wrote " << (out_dir / "results.csv").string() << " and "
            << table.trials.size() << " trial logs\n";
  return 0;
}

struct FilterOptions {
  std::string labels_path;
  std::string out_dir;
  int min_pixels = 150;
};

int cmd_filter_classes(const FilterOptions& opt) {
  const LabelMap labels = load_labels(opt.labels_path);
  const ClassFilterResult filtered = filter_classes(labels, opt.min_pixels);
  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  write_labels(filtered.labels, out_dir / "labels.csv");

  json remap;
  remap["minPixels"] = opt.min_pixels;
  remap["originalClassCount"] = labels.class_count;
  remap["classCount"] = filtered.labels.class_count;
  remap["keptOriginal"] = filtered.kept_original;
  remap["originalCounts"] = filtered.original_counts;
  write_json(out_dir / "class_remap.json", remap);

  json resolved;
  resolved["command"] = "filter-classes";
  resolved["labels"] = opt.labels_path;
  resolved["minPixels"] = opt.min_pixels;
  resolved["outDir"] = opt.out_dir;
  write_json(out_dir / "resolved_config.json", resolved);

  std::cout << "kept " << filtered.labels.class_count << " of " << labels.class_count
            << " classes; wrote " << (out_dir / "labels.csv").string() << " and "
            << (out_dir / "class_remap.json").string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"hyperspectral classification with spectral-angle unaries and a Potts MRF"};
  app.require_subcommand(1);

  ClassifyOptions classify;
  CLI::App* classify_cmd =
      app.add_subcommand("classify", "one classification map at a fixed smoothing cost");
  add_common_flags(classify_cmd, classify.common);
  classify_cmd->add_option("--train-per-class", classify.train_per_class)->default_val(50);
  classify_cmd->add_option("--test-per-class", classify.test_per_class)->default_val(50);
  classify_cmd->add_option("--seed", classify.seed)->default_val(0);
  classify_cmd->add_option("--beta", classify.beta, "Potts cost; 0 gives the pixel-wise map")
      ->default_val(0.0);

  ExperimentOptions experiment;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "repeated randomized trials with beta cross-validation");
  add_common_flags(experiment_cmd, experiment.common);
  experiment_cmd->add_option("--beta-grid", experiment.beta_grid)->delimiter(',');
  experiment_cmd->add_option("--train-per-class", experiment.train_per_class)->delimiter(',');
  experiment_cmd->add_option("--test-per-class", experiment.test_per_class)->default_val(50);
  experiment_cmd->add_option("--repetitions", experiment.repetitions)->default_val(30);
  experiment_cmd->add_option("--seed", experiment.seed)->default_val(0);
  experiment_cmd->add_option("--unary-fraction", experiment.unary_fraction)->default_val(0.7);
  experiment_cmd->add_flag("--no-retrain", experiment.no_retrain,
                           "keep the 70% unary model for the final map");

  FilterOptions filter;
  CLI::App* filter_cmd =
      app.add_subcommand("filter-classes", "drop classes under a pixel-count threshold");
  filter_cmd->add_option("--labels", filter.labels_path)->required();
  filter_cmd->add_option("--min-pixels", filter.min_pixels)->default_val(150);
  filter_cmd->add_option("--out-dir", filter.out_dir)->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("samrf");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (classify_cmd->parsed()) return cmd_classify(classify);
    if (experiment_cmd->parsed()) return cmd_experiment(experiment);
    if (filter_cmd->parsed()) return cmd_filter_classes(filter);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace samrf::cli
