#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

#include "samrf/error.hpp"
#include "samrf/unary.hpp"

namespace samrf {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Sorts samples by (label, spectrum) so the accumulation order, and with it
// the optimizer trajectory, is identical for any permutation of the input.
TrainingSet canonicalize(const TrainingSet& train) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (train.labels[a] != train.labels[b]) return train.labels[a] < train.labels[b];
    return std::lexicographical_compare(train.spectra[a].begin(), train.spectra[a].end(),
                                        train.spectra[b].begin(), train.spectra[b].end());
  });
  TrainingSet out;
  out.bands = train.bands;
  out.class_count = train.class_count;
  out.spectra.reserve(train.size());
  out.labels.reserve(train.size());
  for (std::size_t i : order) {
    out.spectra.push_back(train.spectra[i]);
    out.labels.push_back(train.labels[i]);
  }
  return out;
}

void validate_training(const TrainingSet& train, double l2_strength) {
  if (!(l2_strength >= 0.0) || !std::isfinite(l2_strength))
    throw Error("train_lr: l2Strength must be finite and >= 0");
  if (train.class_count < 2) throw Error("train_lr: need at least 2 classes");
  if (train.size() == 0) throw Error("train_lr: empty training set");
  std::vector<bool> seen(train.class_count, false);
  for (std::size_t n = 0; n < train.size(); ++n) {
    const int c = train.labels[n];
    if (c < 1 || c > train.class_count)
      throw Error("train_lr: label " + std::to_string(c) + " out of range");
    seen[c - 1] = true;
    if (train.spectra[n].size() != static_cast<std::size_t>(train.bands))
      throw Error("train_lr: spectrum " + std::to_string(n) + " has wrong length");
    for (double v : train.spectra[n]) {
      if (!std::isfinite(v))
        throw Error("train_lr: non-finite feature in spectrum " + std::to_string(n));
    }
  }
  int present = 0;
  for (bool s : seen) present += s;
  if (present < 2) throw Error("train_lr: need at least 2 classes present in the data");
}

}  // namespace

double lr_objective(std::span<const double> weights, const TrainingSet& train, double l2_strength,
                    std::vector<double>* gradient) {
  const int classes = train.class_count;
  const int bands = train.bands;
  const int cols = bands + 1;
  if (weights.size() != static_cast<std::size_t>(classes) * cols)
    throw Error("lr_objective: weight vector has wrong length");

  if (gradient) gradient->assign(weights.size(), 0.0);
  std::vector<double> scores(classes);
  double objective = 0.0;

  for (std::size_t n = 0; n < train.size(); ++n) {
    const double* x = train.spectra[n].data();
    for (int c = 0; c < classes; ++c) {
      const double* w = weights.data() + static_cast<std::size_t>(c) * cols;
      double z = w[bands];  // bias
      for (int b = 0; b < bands; ++b) z += w[b] * x[b];
      scores[c] = z;
    }
    const double zmax = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(scores[c] - zmax);
    const double lse = zmax + std::log(sum);
    objective += lse - scores[train.labels[n] - 1];

    if (gradient) {
      for (int c = 0; c < classes; ++c) {
        const double coef =
            std::exp(scores[c] - lse) - (c + 1 == train.labels[n] ? 1.0 : 0.0);
        double* g = gradient->data() + static_cast<std::size_t>(c) * cols;
        for (int b = 0; b < bands; ++b) g[b] += coef * x[b];
        g[bands] += coef;
      }
    }
  }

  // L2 penalty on everything except the bias column.
  for (int c = 0; c < classes; ++c) {
    const double* w = weights.data() + static_cast<std::size_t>(c) * cols;
    for (int b = 0; b < bands; ++b) {
      objective += 0.5 * l2_strength * w[b] * w[b];
      if (gradient) (*gradient)[static_cast<std::size_t>(c) * cols + b] += l2_strength * w[b];
    }
  }
  return objective;
}

LrModel train_lr(const TrainingSet& input, double l2_strength, const LrOptions& options) {
  validate_training(input, l2_strength);
  const TrainingSet train = canonicalize(input);
  const int classes = train.class_count;
  const std::size_t dim = static_cast<std::size_t>(classes) * (train.bands + 1);

  std::vector<double> x(dim, 0.0);
  std::vector<double> grad;
  double f = lr_objective(x, train, l2_strength, &grad);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;

  std::vector<double> direction(dim), x_new(dim), grad_new;
  int iterations = 0;
  while (iterations < options.max_iterations && inf_norm(grad) > options.tolerance) {
    // Two-loop recursion.
    direction = grad;
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = memory[k].rho * dot(memory[k].s, direction);
      for (std::size_t i = 0; i < dim; ++i) direction[i] -= alpha[k] * memory[k].y[i];
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : direction) v *= gamma;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, direction);
      for (std::size_t i = 0; i < dim; ++i)
        direction[i] += (alpha[k] - beta) * memory[k].s[i];
    }
    for (double& v : direction) v = -v;

    double descent = dot(direction, grad);
    if (!(descent < 0.0)) {  // curvature went bad, fall back to steepest descent
      memory.clear();
      for (std::size_t i = 0; i < dim; ++i) direction[i] = -grad[i];
      descent = dot(direction, grad);
    }

    double step = iterations == 0 ? 1.0 / std::max(1.0, norm2(grad)) : 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + step * direction[i];
      const double f_new = lr_objective(x_new, train, l2_strength, nullptr);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * step * descent) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // flat to numerical precision

    const double f_new = lr_objective(x_new, train, l2_strength, &grad_new);
    Pair pair;
    pair.s.resize(dim);
    pair.y.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      pair.s[i] = x_new[i] - x[i];
      pair.y[i] = grad_new[i] - grad[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-10 * norm2(pair.s) * norm2(pair.y)) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > kMemory) memory.pop_front();
    }
    x.swap(x_new);
    f = f_new;
    grad.swap(grad_new);
    ++iterations;
  }

  LrModel model;
  model.bands = train.bands;
  model.class_count = classes;
  model.l2_strength = l2_strength;
  model.weights = std::move(x);
  model.iterations = iterations;
  model.grad_inf_norm = inf_norm(grad);
  model.converged = model.grad_inf_norm <= options.tolerance;
  return model;
}

ProbabilityField lr_probabilities(const LrModel& model, const SpectralCube& cube) {
  if (model.bands != cube.bands)
    throw Error("lr_probabilities: model has " + std::to_string(model.bands) +
                " bands, cube has " + std::to_string(cube.bands));
  const int classes = model.class_count;
  const int bands = cube.bands;
  const int cols = bands + 1;

  ProbabilityField field;
  field.width = cube.width;
  field.height = cube.height;
  field.class_count = classes;
  field.values.resize(static_cast<std::size_t>(cube.pixel_count()) * classes);

  std::vector<double> scores(classes);
  for (int p = 0; p < cube.pixel_count(); ++p) {
    const double* x = cube.values.data() + static_cast<std::size_t>(p) * bands;
    for (int c = 0; c < classes; ++c) {
      const double* w = model.weights.data() + static_cast<std::size_t>(c) * cols;
      double z = w[bands];
      for (int b = 0; b < bands; ++b) z += w[b] * x[b];
      scores[c] = z;
    }
    const double zmax = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      scores[c] = std::exp(scores[c] - zmax);
      sum += scores[c];
    }
    double* out = field.values.data() + static_cast<std::size_t>(p) * classes;
    for (int c = 0; c < classes; ++c) out[c] = scores[c] / sum;
  }
  return field;
}

}  // namespace samrf
