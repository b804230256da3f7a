#include "samrf/unary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "samrf/error.hpp"

namespace samrf {

namespace {

constexpr double kMinNorm = 1e-12;

// Cosines above this are within floating noise of 1; only then is the exact
// element-wise comparison worth running.
constexpr double kNearParallel = 0.999999;

}  // namespace

UnaryField UnaryField::create(int width, int height, int class_count,
                              std::vector<double> energies) {
  if (width < 1 || height < 1 || class_count < 1)
    throw Error("UnaryField: width, height and classCount must all be >= 1");
  if (energies.size() != static_cast<std::size_t>(width) * height * class_count)
    throw Error("UnaryField: energy count does not match dimensions");
  for (double e : energies) {
    if (!std::isfinite(e) || e < 0.0)
      throw Error("UnaryField: energies must be finite and >= 0");
  }
  UnaryField f;
  f.width = width;
  f.height = height;
  f.class_count = class_count;
  f.energies = std::move(energies);
  return f;
}

TrainingSet gather_training(const SpectralCube& cube, const LabelMap& labels,
                            const std::vector<int>& pixels) {
  if (labels.width != cube.width || labels.height != cube.height)
    throw Error("gather_training: label map does not match cube dimensions");
  TrainingSet set;
  set.bands = cube.bands;
  set.class_count = labels.class_count;
  set.spectra.reserve(pixels.size());
  set.labels.reserve(pixels.size());
  for (int p : pixels) {
    if (p < 0 || p >= cube.pixel_count())
      throw Error("gather_training: pixel index " + std::to_string(p) + " out of range");
    const int c = labels.labels[p];
    if (c == 0)
      throw Error("gather_training: pixel " + std::to_string(p) + " is unlabeled");
    const auto s = cube.spectrum(p);
    set.spectra.emplace_back(s.begin(), s.end());
    set.labels.push_back(c);
  }
  return set;
}

UnaryField sam_unary(const SpectralCube& cube, const TrainingSet& train, int threads) {
  if (train.class_count < 1) throw Error("sam_unary: training set has no classes");
  if (train.bands != cube.bands)
    throw Error("sam_unary: training spectra have " + std::to_string(train.bands) +
                " bands, cube has " + std::to_string(cube.bands));
  std::vector<int> per_class(train.class_count, 0);
  for (std::size_t t = 0; t < train.size(); ++t) {
    if (train.spectra[t].size() != static_cast<std::size_t>(cube.bands))
      throw Error("sam_unary: training spectrum " + std::to_string(t) + " has wrong length");
    const int c = train.labels[t];
    if (c < 1 || c > train.class_count)
      throw Error("sam_unary: training label " + std::to_string(c) + " out of range");
    ++per_class[c - 1];
  }
  for (int c = 1; c <= train.class_count; ++c) {
    if (per_class[c - 1] == 0)
      throw Error("sam_unary: class " + std::to_string(c) + " has no training exemplar");
  }

  const std::size_t n_train = train.size();
  std::vector<double> train_norm(n_train);
  for (std::size_t t = 0; t < n_train; ++t) {
    double sq = 0.0;
    for (double v : train.spectra[t]) sq += v * v;
    train_norm[t] = std::sqrt(sq);
    if (train_norm[t] < kMinNorm)
      throw Error("sam_unary: training spectrum " + std::to_string(t) + " has near-zero norm");
  }

  const int pixels = cube.pixel_count();
  const int bands = cube.bands;
  const int classes = train.class_count;
  std::vector<double> energies(static_cast<std::size_t>(pixels) * classes);

  auto worker = [&](int lo, int hi) {
    std::vector<double> best_cos(classes);
    for (int p = lo; p < hi; ++p) {
      const double* px = cube.values.data() + static_cast<std::size_t>(p) * bands;
      double sq = 0.0;
      for (int b = 0; b < bands; ++b) sq += px[b] * px[b];
      const double px_norm = std::sqrt(sq);
      if (px_norm < kMinNorm)
        throw Error("sam_unary: pixel (x=" + std::to_string(p % cube.width) +
                    ", y=" + std::to_string(p / cube.width) + ") has near-zero norm");
      std::fill(best_cos.begin(), best_cos.end(), -2.0);
      for (std::size_t t = 0; t < n_train; ++t) {
        const double* ex = train.spectra[t].data();
        double dot = 0.0;
        for (int b = 0; b < bands; ++b) dot += px[b] * ex[b];
        double cosine = dot / (px_norm * train_norm[t]);
        if (cosine > kNearParallel && std::equal(px, px + bands, ex)) cosine = 1.0;
        double& best = best_cos[train.labels[t] - 1];
        best = std::max(best, cosine);
      }
      for (int c = 0; c < classes; ++c) {
        const double cosine = std::clamp(best_cos[c], -1.0, 1.0);
        // acos is decreasing, so the max cosine is the min angle.
        energies[static_cast<std::size_t>(p) * classes + c] =
            cosine == 1.0 ? 0.0 : std::acos(cosine);
      }
    }
  };

  const int workers = std::max(1, std::min(threads, pixels));
  if (workers == 1) {
    worker(0, pixels);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const int chunk = (pixels + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(pixels, lo + chunk);
      pool.emplace_back([&, w, lo, hi] {
        try {
          worker(lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return UnaryField::create(cube.width, cube.height, classes, std::move(energies));
}

UnaryField neglog_unary(const ProbabilityField& probs, double floor) {
  if (!(floor > 0.0)) throw Error("neglog_unary: floor must be > 0");
  std::vector<double> energies(probs.values.size());
  for (std::size_t i = 0; i < probs.values.size(); ++i) {
    const double p = probs.values[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw Error("neglog_unary: probability " + std::to_string(p) + " outside [0, 1]");
    energies[i] = -std::log(std::max(p, floor));
  }
  return UnaryField::create(probs.width, probs.height, probs.class_count, std::move(energies));
}

ProbabilityField load_external_probabilities(const std::filesystem::path& path, int width,
                                             int height, int class_count) {
  std::ifstream in(path);
  if (!in) throw Error("load_external_probabilities: cannot open '" + path.string() + "'");
  const std::size_t pixels = static_cast<std::size_t>(width) * height;

  ProbabilityField field;
  field.width = width;
  field.height = height;
  field.class_count = class_count;
  field.values.reserve(pixels * class_count);

  std::string line;
  std::size_t rows = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (rows == pixels)
      throw Error("load_external_probabilities: more rows than the " + std::to_string(pixels) +
                  " pixels expected");
    row.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw Error("load_external_probabilities: cannot parse '" + cell + "' at row " +
                    std::to_string(rows));
      }
      if (v < 0.0)
        throw Error("load_external_probabilities: negative entry at row " +
                    std::to_string(rows));
      row.push_back(v);
    }
    if (row.size() != static_cast<std::size_t>(class_count))
      throw Error("load_external_probabilities: row " + std::to_string(rows) + " has " +
                  std::to_string(row.size()) + " columns, expected " +
                  std::to_string(class_count));
    double sum = 0.0;
    for (double v : row) sum += v;
    if (sum < 0.9 || sum > 1.1)
      throw Error("load_external_probabilities: row " + std::to_string(rows) + " sums to " +
                  std::to_string(sum) + ", outside [0.9, 1.1]");
    for (double v : row) field.values.push_back(v / sum);
    ++rows;
  }
  if (rows != pixels)
    throw Error("load_external_probabilities: file has " + std::to_string(rows) +
                " rows, expected " + std::to_string(pixels));
  return field;
}

}  // namespace samrf
