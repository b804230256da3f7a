// Acceptance harness: one check per numbered criterion, printed as
//   criterion N: PASS|FAIL|SKIP - detail
// Exit code: 0 all pass (skips allowed unless everything skipped), 1 any
// failure, 77 when the requested work was skipped entirely (ctest skip code).
//
// Criteria 1-4 score the pipeline on the Indian Pines and Pavia University
// scenes and skip cleanly when the converted datasets are absent; see
// docs/datasets.md for the preparation recipe. Criteria 5-10 are
// self-contained property checks.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "samrf/cli.hpp"
#include "samrf/error.hpp"
#include "samrf/hypercube.hpp"
#include "samrf/maxflow.hpp"
#include "samrf/mrf.hpp"
#include "samrf/protocol.hpp"
#include "samrf/rng.hpp"
#include "samrf/spectral.hpp"
#include "samrf/unary.hpp"
#include "testutil.hpp"

namespace {

namespace fs = std::filesystem;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

Outcome pass(std::string detail) { return {Status::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Status::fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Status::skip, std::move(detail)}; }

struct Context {
  fs::path data_dir;
  int threads = 1;
  // MRF gain on Indian Pines in percentage points, filled by criterion 1 so
  // criterion 3 can compare against the measured value in a combined run.
  std::optional<double> ip_gain;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Dataset {
  samrf::SpectralCube cube;
  samrf::LabelMap labels;
};

std::optional<std::string> dataset_missing(const fs::path& dir) {
  for (const char* name : {"cube.header", "labels.csv"}) {
    if (!fs::exists(dir / name)) {
      return "missing " + (dir / name).string() + " (see docs/datasets.md)";
    }
  }
  return std::nullopt;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.cube = samrf::normalize_bands(samrf::load_cube(dir / "cube.header"));
  d.labels = samrf::load_labels(dir / "labels.csv", d.cube.width, d.cube.height);
  return d;
}

struct ExperimentSummary {
  double pixelwise_percent = 0.0;
  double mrf_percent = 0.0;
  double seconds = 0.0;
};

ExperimentSummary run_benchmark(const Dataset& data, samrf::UnaryProvider provider,
                                int threads) {
  samrf::ExperimentConfig config;
  config.train_per_class_grid = {50};
  config.test_per_class = 50;
  config.repetitions = 30;
  config.provider = provider;
  config.threads = threads;

  const auto start = std::chrono::steady_clock::now();
  const samrf::ResultTable table = samrf::run_experiment(data.cube, data.labels, config);
  ExperimentSummary summary;
  summary.seconds = elapsed(start);
  summary.pixelwise_percent = table.rows.at(0).mean_pixelwise * 100.0;
  summary.mrf_percent = table.rows.at(0).mean_mrf * 100.0;
  return summary;
}

// --- criterion 1: Indian Pines, min-angle unaries, 30 repetitions ---------

Outcome criterion_1(Context& ctx) {
  const fs::path dir = ctx.data_dir / "indian_pines";
  if (const auto missing = dataset_missing(dir)) return skip(*missing);
  const Dataset data = load_dataset(dir);
  const ExperimentSummary s = run_benchmark(data, samrf::UnaryProvider::sam, ctx.threads);
  const double gain = s.mrf_percent - s.pixelwise_percent;
  ctx.ip_gain = gain;

  std::string detail = "pixelwise " + fmt(s.pixelwise_percent) + "% (target 62.97 +/- 4), mrf " +
                       fmt(s.mrf_percent) + "% (target 89.28 +/- 5), gain " + fmt(gain) +
                       " points, " + fmt(s.seconds) + " s";
  if (std::abs(s.pixelwise_percent - 62.97) > 4.0) return fail(detail);
  if (std::abs(s.mrf_percent - 89.28) > 5.0) return fail(detail);
  if (gain < 15.0) return fail(detail + "; gain under 15 points");
  if (s.seconds > 1800.0) return fail(detail + "; sweep exceeded 30 minutes");
  return pass(detail);
}

// --- criterion 2: Indian Pines, logistic-regression unaries ---------------

Outcome criterion_2(Context& ctx) {
  const fs::path dir = ctx.data_dir / "indian_pines";
  if (const auto missing = dataset_missing(dir)) return skip(*missing);
  const Dataset data = load_dataset(dir);
  const ExperimentSummary s = run_benchmark(data, samrf::UnaryProvider::lr, ctx.threads);

  const std::string detail = "pixelwise " + fmt(s.pixelwise_percent) +
                             "% (target 69.28 +/- 6), mrf " + fmt(s.mrf_percent) +
                             "% (target 84.42 +/- 6), " + fmt(s.seconds) + " s";
  if (std::abs(s.pixelwise_percent - 69.28) > 6.0) return fail(detail);
  if (std::abs(s.mrf_percent - 84.42) > 6.0) return fail(detail);
  return pass(detail);
}

// --- criterion 3: Pavia University, min-angle unaries ---------------------

Outcome criterion_3(Context& ctx) {
  const fs::path dir = ctx.data_dir / "pavia_university";
  if (const auto missing = dataset_missing(dir)) return skip(*missing);
  const Dataset data = load_dataset(dir);
  const ExperimentSummary s = run_benchmark(data, samrf::UnaryProvider::sam, ctx.threads);
  const double gain = s.mrf_percent - s.pixelwise_percent;

  std::string detail = "pixelwise " + fmt(s.pixelwise_percent) + "% (target 77.47 +/- 4), mrf " +
                       fmt(s.mrf_percent) + "% (target 79.93 +/- 5), gain " + fmt(gain) +
                       " points, " + fmt(s.seconds) + " s";
  if (std::abs(s.pixelwise_percent - 77.47) > 4.0) return fail(detail);
  if (std::abs(s.mrf_percent - 79.93) > 5.0) return fail(detail);
  // The smoothing gain must stay below the Indian Pines gain: the measured
  // value when criterion 1 ran in this invocation, its asserted floor
  // otherwise.
  const double ip_gain = ctx.ip_gain.value_or(15.0);
  detail += ctx.ip_gain ? "; compared against measured indian_pines gain " + fmt(ip_gain)
                        : "; compared against the 15-point indian_pines floor";
  if (gain >= ip_gain) return fail(detail);
  return pass(detail);
}

// --- criterion 4: single-map wall time on Indian Pines --------------------

Outcome criterion_4(Context& ctx) {
  const fs::path dir = ctx.data_dir / "indian_pines";
  if (const auto missing = dataset_missing(dir)) return skip(*missing);
  const Dataset data = load_dataset(dir);

  const auto start = std::chrono::steady_clock::now();
  const samrf::Split split = samrf::make_split(data.labels, samrf::SplitSpec{50, 50, 0.7, 0});
  const samrf::TrainingSet train =
      samrf::gather_training(data.cube, data.labels, split.all_training());
  const samrf::UnaryField unary = samrf::sam_unary(data.cube, train, 1);
  const samrf::GridGraph grid(data.cube.width, data.cube.height);
  const samrf::ExpansionResult result = samrf::alpha_expansion(
      unary, samrf::PottsParams{10.0}, grid, samrf::unary_argmin(unary));
  const double seconds = elapsed(start);

  const std::string detail = "unary + one expansion at beta 10 in " + fmt(seconds) +
                             " s single-threaded (limit 10), final energy " + fmt(result.energy);
  return seconds <= 10.0 ? pass(detail) : fail(detail);
}

// --- criterion 5: expansion against the exhaustive minimizer --------------

Outcome criterion_5(Context&) {
  samrf::Rng rng(505);
  const samrf::GridGraph grid(3, 3);
  const double betas[] = {0.01, 0.1, 1.0};
  const int trials = 100;
  int exact_hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const samrf::UnaryField field = testutil::random_unary(3, 3, 3, rng);
    const samrf::PottsParams potts{betas[trial % 3]};
    const auto [best, best_energy] = samrf::exact_minimize(field, potts, grid);
    const samrf::ExpansionResult r =
        samrf::alpha_expansion(field, potts, grid, samrf::Labeling(9, 1));
    if (r.energy > 2.0 * best_energy + 1e-12) {
      return fail("trial " + std::to_string(trial) + ": expansion energy " +
                  std::to_string(r.energy) + " above twice the optimum " +
                  std::to_string(best_energy));
    }
    if (std::abs(r.energy - best_energy) <= 1e-9) ++exact_hits;

    // beta 0 decomposes per pixel; both minimizers must agree exactly
    const auto [zero_best, zero_energy] =
        samrf::exact_minimize(field, samrf::PottsParams{0.0}, grid);
    const samrf::ExpansionResult z =
        samrf::alpha_expansion(field, samrf::PottsParams{0.0}, grid, samrf::Labeling(9, 1));
    if (z.labeling != zero_best || std::abs(z.energy - zero_energy) > 1e-12) {
      return fail("trial " + std::to_string(trial) + ": beta 0 disagreement");
    }
  }
  const std::string detail = "within 2x optimum on 100/100, exact energy on " +
                             std::to_string(exact_hits) + "/100 (need >= 90), beta 0 exact on "
                             "100/100";
  return exact_hits >= 90 ? pass(detail) : fail(detail);
}

// --- criterion 6: max-flow equals the enumerated minimum cut --------------

Outcome criterion_6(Context&) {
  samrf::Rng rng(606);
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const samrf::FlowNetwork net = testutil::random_network(rng);
    const samrf::CutResult r = samrf::max_flow(net);
    const double oracle = testutil::brute_force_min_cut(net);
    if (r.flow_value != oracle) {
      return fail("trial " + std::to_string(trial) + ": flow " + std::to_string(r.flow_value) +
                  " vs enumerated cut " + std::to_string(oracle));
    }
    if (samrf::cut_capacity(net, r.source_side) != r.flow_value) {
      return fail("trial " + std::to_string(trial) + ": returned side assignment does not pay "
                  "the flow value");
    }
  }
  return pass("flow equals the brute-force minimum cut on 200/200 random networks");
}

// --- criterion 7: partition function normalizes the Gibbs weights ---------

Outcome criterion_7(Context&) {
  samrf::Rng rng(707);
  const struct { int w, h; } shapes[] = {{1, 2}, {2, 2}};
  for (const auto& shape : shapes) {
    for (int trial = 0; trial < 25; ++trial) {
      const samrf::UnaryField field = testutil::random_unary(shape.w, shape.h, 2, rng);
      const samrf::GridGraph grid(shape.w, shape.h);
      const samrf::PottsParams potts{0.25 + 0.5 * (trial % 3)};
      const double z = samrf::partition_function(field, potts, grid);

      // independent energies: unary lookups plus a manual neighbor scan
      const int n = shape.w * shape.h;
      double total = 0.0;
      for (int mask = 0; mask < (1 << n); ++mask) {
        samrf::Labeling y(n);
        for (int p = 0; p < n; ++p) y[p] = 1 + ((mask >> p) & 1);
        double e = 0.0;
        for (int p = 0; p < n; ++p) e += field.at(p, y[p]);
        for (int yy = 0; yy < shape.h; ++yy) {
          for (int xx = 0; xx < shape.w; ++xx) {
            const int p = yy * shape.w + xx;
            if (xx + 1 < shape.w && y[p] != y[p + 1]) e += potts.beta;
            if (yy + 1 < shape.h && y[p] != y[p + shape.w]) e += potts.beta;
          }
        }
        total += std::exp(-e);
      }
      if (std::abs(total / z - 1.0) > 1e-9) {
        return fail(std::to_string(shape.w) + "x" + std::to_string(shape.h) + " trial " +
                    std::to_string(trial) + ": probabilities sum to " +
                    std::to_string(total / z));
      }
    }
  }
  return pass("Gibbs probabilities sum to 1 within 1e-9 on 25 random 1x2 and 25 random 2x2 "
              "instances");
}

// --- criterion 8: spectral angle identities over random pairs -------------

Outcome criterion_8(Context&) {
  samrf::Rng rng(808);
  constexpr double kPi = 3.141592653589793238462643383279502884;
  const int pairs = 100000;
  double worst_scale_drift = 0.0;
  for (int i = 0; i < pairs; ++i) {
    std::vector<double> x(8), y(8);
    for (double& v : x) v = rng.normal();
    for (double& v : y) v = rng.normal();
    // keep the norms comfortably above the rejection threshold
    x[0] += x[0] >= 0.0 ? 1.0 : -1.0;
    y[0] += y[0] >= 0.0 ? 1.0 : -1.0;

    const double a = samrf::spectral_angle(x, y);
    if (!std::isfinite(a) || a < 0.0 || a > kPi) {
      return fail("pair " + std::to_string(i) + ": angle " + std::to_string(a) +
                  " outside [0, pi]");
    }
    if (samrf::spectral_angle(y, x) != a) {
      return fail("pair " + std::to_string(i) + ": asymmetric angle");
    }

    const double c = std::exp(-6.0 + 12.0 * rng.uniform01());
    std::vector<double> scaled = x;
    for (double& v : scaled) v *= c;
    const double drift = std::abs(samrf::spectral_angle(scaled, y) - a);
    worst_scale_drift = std::max(worst_scale_drift, drift);
    if (drift > 1e-10) {
      return fail("pair " + std::to_string(i) + ": scaling by " + std::to_string(c) +
                  " moved the angle by " + std::to_string(drift));
    }

    // near-parallel pair: the clamp must keep acos quiet
    if (i % 100 == 0) {
      const double parallel = samrf::spectral_angle(x, scaled);
      if (!std::isfinite(parallel) || parallel > 1e-6) {
        return fail("pair " + std::to_string(i) + ": near-parallel angle " +
                    std::to_string(parallel));
      }
    }

    if (i % 1000 == 0) {
      const samrf::EsamParams params{1.0 + rng.uniform01(), 0.5 + rng.uniform01()};
      if (samrf::esam(x, x, params) != params.gain) {
        return fail("pair " + std::to_string(i) + ": esam at zero angle is not the gain");
      }
    }
  }
  char drift[32];
  std::snprintf(drift, sizeof(drift), "%.2e", worst_scale_drift);
  return pass("100000 random pairs: symmetric, in range, scale drift <= " + std::string(drift) +
              ", clamped near-parallel, esam(x,x) == gain");
}

// --- criterion 9: logistic regression gradient against finite differences -

Outcome criterion_9(Context&) {
  samrf::Rng rng(909);
  for (int trial = 0; trial < 20; ++trial) {
    const int bands = 2 + static_cast<int>(rng.uniform_below(4));
    const int classes = 2 + static_cast<int>(rng.uniform_below(3));
    const int samples = 4 + static_cast<int>(rng.uniform_below(6));
    samrf::TrainingSet train;
    train.bands = bands;
    train.class_count = classes;
    for (int s = 0; s < samples; ++s) {
      std::vector<double> spectrum(bands);
      for (double& v : spectrum) v = rng.normal();
      train.spectra.push_back(std::move(spectrum));
      train.labels.push_back(1 + static_cast<int>(rng.uniform_below(classes)));
    }
    train.labels[0] = 1;
    train.labels[1] = classes;

    std::vector<double> w(static_cast<std::size_t>(classes) * (bands + 1));
    for (double& v : w) v = 0.5 * rng.normal();
    const double lambda = 0.1 + rng.uniform01();

    std::vector<double> grad;
    samrf::lr_objective(w, train, lambda, &grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::vector<double> wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd =
          (samrf::lr_objective(wp, train, lambda) - samrf::lr_objective(wm, train, lambda)) /
          (2 * h);
      const double denom = std::max({1.0, std::abs(fd), std::abs(grad[i])});
      if (std::abs(grad[i] - fd) / denom > 1e-5) {
        return fail("trial " + std::to_string(trial) + " weight " + std::to_string(i) +
                    ": analytic " + std::to_string(grad[i]) + " vs central difference " +
                    std::to_string(fd));
      }
    }
  }
  return pass("analytic gradient within 1e-5 of central differences on 20 random problems");
}

// --- criterion 10: byte-identical reruns of the command line --------------

// Drops the final (meanSeconds) column of every line so wall-clock noise
// does not defeat the comparison; everything else must match bytewise.
std::string mask_seconds_column(const std::string& csv) {
  std::string out;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    const std::string line = csv.substr(start, end - start);
    const std::size_t comma = line.rfind(',');
    out += comma == std::string::npos ? line : line.substr(0, comma);
    out += '\n';
    start = end + 1;
  }
  return out;
}

Outcome criterion_10(Context&) {
  testutil::TempDir dir("acceptance-determinism");
  const testutil::Scene scene = testutil::striped_scene(12, 12, 2, 4, 0.8, 1010);
  testutil::write_scene(scene, dir.path());
  const std::string cube = dir.file("cube.header").string();
  const std::string labels = dir.file("labels.csv").string();

  auto run_experiment_into = [&](const std::string& out) {
    return samrf::cli::run({"experiment", "--cube", cube, "--labels", labels, "--out-dir", out,
                            "--beta-grid", "0.01,0.1,1", "--train-per-class", "8",
                            "--test-per-class", "6", "--repetitions", "3", "--seed", "99",
                            "--threads", "2"});
  };
  if (run_experiment_into((dir.path() / "exp_a").string()) != 0 ||
      run_experiment_into((dir.path() / "exp_b").string()) != 0) {
    return fail("experiment run exited nonzero");
  }
  const std::string csv_a =
      mask_seconds_column(testutil::read_file(dir.path() / "exp_a" / "results.csv"));
  const std::string csv_b =
      mask_seconds_column(testutil::read_file(dir.path() / "exp_b" / "results.csv"));
  if (csv_a != csv_b) return fail("results.csv differs between identically seeded runs");

  auto run_classify_into = [&](const std::string& out) {
    return samrf::cli::run({"classify", "--cube", cube, "--labels", labels, "--out-dir", out,
                            "--train-per-class", "8", "--test-per-class", "6", "--seed", "99",
                            "--beta", "0.5"});
  };
  if (run_classify_into((dir.path() / "map_a").string()) != 0 ||
      run_classify_into((dir.path() / "map_b").string()) != 0) {
    return fail("classify run exited nonzero");
  }
  for (const char* name : {"predicted_labels.csv", "map.ppm"}) {
    if (testutil::read_file(dir.path() / "map_a" / name) !=
        testutil::read_file(dir.path() / "map_b" / name)) {
      return fail(std::string(name) + " differs between identically seeded runs");
    }
  }
  return pass("results CSV (wall-clock column masked), label CSV and PPM are byte-identical "
              "across reruns");
}

using CriterionFn = Outcome (*)(Context&);

constexpr CriterionFn kCriteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                     criterion_5, criterion_6, criterion_7, criterion_8,
                                     criterion_9, criterion_10};
constexpr int kCriterionCount = static_cast<int>(sizeof(kCriteria) / sizeof(kCriteria[0]));

Outcome run_criterion(int index, Context& ctx) {
  try {
    return kCriteria[index - 1](ctx);
  } catch (const std::exception& e) {
    return fail(std::string("unexpected error: ") + e.what());
  }
}

const char* status_name(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    default: return "SKIP";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int criterion = 0;
  std::string data_dir;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--criterion", criterion, "criterion number (default: all)")
      ->check(CLI::Range(0, kCriterionCount));
  app.add_option("--data-dir", data_dir,
                 "dataset root (default: $SAMRF_DATA_DIR, then ./data)");
  app.add_option("--threads", threads, "worker threads for the dataset benchmarks");
  CLI11_PARSE(app, argc, argv);

  if (data_dir.empty()) {
    const char* env = std::getenv("SAMRF_DATA_DIR");
    data_dir = env != nullptr ? env : "data";
  }

  Context ctx;
  ctx.data_dir = data_dir;
  ctx.threads = threads < 1 ? 1 : threads;

  int failures = 0;
  int skips = 0;
  int runs = 0;
  for (int n = 1; n <= kCriterionCount; ++n) {
    if (criterion != 0 && n != criterion) continue;
    const Outcome outcome = run_criterion(n, ctx);
    std::cout << "criterion " << n << ": " << status_name(outcome.status) << " - "
              << outcome.detail << "\n";
    ++runs;
    if (outcome.status == Status::fail) ++failures;
    if (outcome.status == Status::skip) ++skips;
  }

  if (failures > 0) return 1;
  if (skips == runs) return 77;
  return 0;
}
