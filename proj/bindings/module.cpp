#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "samrf/error.hpp"
#include "samrf/hypercube.hpp"
#include "samrf/maxflow.hpp"
#include "samrf/mrf.hpp"
#include "samrf/protocol.hpp"
#include "samrf/render.hpp"
#include "samrf/spectral.hpp"
#include "samrf/unary.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::vector<double> as_vector(const DoubleArray& arr) {
  return {arr.data(), arr.data() + arr.size()};
}

// (H, W, B) float array -> cube
samrf::SpectralCube cube_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 3) throw samrf::Error("cube array must have shape (height, width, bands)");
  const int height = static_cast<int>(arr.shape(0));
  const int width = static_cast<int>(arr.shape(1));
  const int bands = static_cast<int>(arr.shape(2));
  return samrf::SpectralCube::create(width, height, bands, as_vector(arr));
}

DoubleArray cube_to_array(const samrf::SpectralCube& cube) {
  DoubleArray arr({cube.height, cube.width, cube.bands});
  std::copy(cube.values.begin(), cube.values.end(), arr.mutable_data());
  return arr;
}

samrf::LabelMap labels_from_array(const IntArray& arr) {
  if (arr.ndim() != 2) throw samrf::Error("label array must have shape (height, width)");
  const int height = static_cast<int>(arr.shape(0));
  const int width = static_cast<int>(arr.shape(1));
  return samrf::LabelMap::create(width, height,
                                 std::vector<int>(arr.data(), arr.data() + arr.size()));
}

IntArray labeling_to_array(const samrf::Labeling& labeling, int width, int height) {
  IntArray arr({height, width});
  std::copy(labeling.begin(), labeling.end(), arr.mutable_data());
  return arr;
}

samrf::Labeling labeling_from_array(const IntArray& arr) {
  if (arr.ndim() != 2) throw samrf::Error("labeling array must have shape (height, width)");
  return {arr.data(), arr.data() + arr.size()};
}

// (H, W, C) energies -> UnaryField
samrf::UnaryField unary_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 3)
    throw samrf::Error("unary array must have shape (height, width, classes)");
  return samrf::UnaryField::create(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)),
                                   static_cast<int>(arr.shape(2)), as_vector(arr));
}

DoubleArray unary_to_array(const samrf::UnaryField& unary) {
  DoubleArray arr({unary.height, unary.width, unary.class_count});
  std::copy(unary.energies.begin(), unary.energies.end(), arr.mutable_data());
  return arr;
}

samrf::ProbabilityField probs_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 3)
    throw samrf::Error("probability array must have shape (height, width, classes)");
  samrf::ProbabilityField field;
  field.width = static_cast<int>(arr.shape(1));
  field.height = static_cast<int>(arr.shape(0));
  field.class_count = static_cast<int>(arr.shape(2));
  field.values = as_vector(arr);
  return field;
}

samrf::TrainingSet training_from_arrays(const DoubleArray& spectra, const IntArray& labels) {
  if (spectra.ndim() != 2) throw samrf::Error("training spectra must have shape (n, bands)");
  if (labels.ndim() != 1 || labels.shape(0) != spectra.shape(0))
    throw samrf::Error("training labels must have shape (n,)");
  samrf::TrainingSet train;
  train.bands = static_cast<int>(spectra.shape(1));
  const auto n = spectra.shape(0);
  train.spectra.reserve(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    train.spectra.emplace_back(spectra.data() + i * spectra.shape(1),
                               spectra.data() + (i + 1) * spectra.shape(1));
    const int label = labels.data()[i];
    if (label < 1) throw samrf::Error("training labels must be >= 1");
    train.labels.push_back(label);
    train.class_count = std::max(train.class_count, label);
  }
  return train;
}

samrf::Kernel kernel_from_args(const std::string& kind, double gain, double scale) {
  if (kind == "esam") return samrf::EsamParams{gain, scale};
  if (kind == "se") return samrf::SeParams{gain, scale};
  throw samrf::Error("kernel kind must be 'esam' or 'se'");
}

std::vector<std::vector<double>> spectra_list(const DoubleArray& arr) {
  if (arr.ndim() != 2) throw samrf::Error("spectra must have shape (n, bands)");
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(arr.shape(0)));
  for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
    out.emplace_back(arr.data() + i * arr.shape(1), arr.data() + (i + 1) * arr.shape(1));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_samrf, m) {
  m.doc() = "spectral-angle and probability unaries with Potts MRF smoothing";

  py::register_exception<samrf::Error>(m, "SamrfError");

  m.def(
      "load_cube",
      [](const std::string& path) { return cube_to_array(samrf::load_cube(path)); },
      py::arg("header_path"), "Read a cube header + BSQ payload into an (H, W, B) array.");

  m.def(
      "normalize_bands",
      [](const DoubleArray& cube) {
        return cube_to_array(samrf::normalize_bands(cube_from_array(cube)));
      },
      py::arg("cube"), "Z-score every band over all pixels.");

  m.def(
      "load_labels",
      [](const std::string& path) {
        const samrf::LabelMap labels = samrf::load_labels(path);
        return labeling_to_array(labels.labels, labels.width, labels.height);
      },
      py::arg("path"), "Read a label CSV into an (H, W) int array.");

  m.def(
      "spectral_angle",
      [](const DoubleArray& x1, const DoubleArray& x2) {
        return samrf::spectral_angle({x1.data(), static_cast<std::size_t>(x1.size())},
                                     {x2.data(), static_cast<std::size_t>(x2.size())});
      },
      py::arg("x1"), py::arg("x2"));

  m.def(
      "esam",
      [](const DoubleArray& x1, const DoubleArray& x2, double gain, double scale) {
        return samrf::esam({x1.data(), static_cast<std::size_t>(x1.size())},
                           {x2.data(), static_cast<std::size_t>(x2.size())},
                           samrf::EsamParams{gain, scale});
      },
      py::arg("x1"), py::arg("x2"), py::arg("gain"), py::arg("scale"));

  m.def(
      "se_kernel",
      [](const DoubleArray& x1, const DoubleArray& x2, double gain, double lengthscale) {
        return samrf::se_kernel({x1.data(), static_cast<std::size_t>(x1.size())},
                                {x2.data(), static_cast<std::size_t>(x2.size())},
                                samrf::SeParams{gain, lengthscale});
      },
      py::arg("x1"), py::arg("x2"), py::arg("gain"), py::arg("lengthscale"));

  m.def(
      "kernel_matrix",
      [](const DoubleArray& a, const DoubleArray& b, const std::string& kind, double gain,
         double scale) {
        const auto rows = spectra_list(a);
        const auto cols = spectra_list(b);
        const std::vector<double> values =
            samrf::kernel_matrix(rows, cols, kernel_from_args(kind, gain, scale));
        DoubleArray out({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(cols.size())});
        std::copy(values.begin(), values.end(), out.mutable_data());
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("kind"), py::arg("gain"), py::arg("scale"));

  m.def(
      "sam_unary",
      [](const DoubleArray& cube, const DoubleArray& train_spectra, const IntArray& train_labels,
         int threads) {
        return unary_to_array(samrf::sam_unary(cube_from_array(cube),
                                               training_from_arrays(train_spectra, train_labels),
                                               threads));
      },
      py::arg("cube"), py::arg("train_spectra"), py::arg("train_labels"), py::arg("threads") = 1,
      "Minimum spectral angle per pixel and class, shape (H, W, C).");

  m.def(
      "train_lr",
      [](const DoubleArray& train_spectra, const IntArray& train_labels, double l2_strength,
         int max_iterations, double tolerance) {
        const samrf::TrainingSet train = training_from_arrays(train_spectra, train_labels);
        const samrf::LrModel model =
            samrf::train_lr(train, l2_strength, {max_iterations, tolerance});
        DoubleArray weights({model.class_count, model.bands + 1});
        std::copy(model.weights.begin(), model.weights.end(), weights.mutable_data());
        py::dict out;
        out["weights"] = weights;
        out["iterations"] = model.iterations;
        out["grad_inf_norm"] = model.grad_inf_norm;
        out["converged"] = model.converged;
        return out;
      },
      py::arg("train_spectra"), py::arg("train_labels"), py::arg("l2_strength") = 1.0,
      py::arg("max_iterations") = 1000, py::arg("tolerance") = 1e-6,
      "L2-regularized multinomial logistic regression; weights shape (C, B+1), last column bias.");

  m.def(
      "lr_probabilities",
      [](const DoubleArray& weights, const DoubleArray& cube) {
        if (weights.ndim() != 2) throw samrf::Error("weights must have shape (C, bands+1)");
        samrf::LrModel model;
        model.class_count = static_cast<int>(weights.shape(0));
        model.bands = static_cast<int>(weights.shape(1)) - 1;
        model.weights = as_vector(weights);
        const samrf::ProbabilityField probs =
            samrf::lr_probabilities(model, cube_from_array(cube));
        DoubleArray out({probs.height, probs.width, probs.class_count});
        std::copy(probs.values.begin(), probs.values.end(), out.mutable_data());
        return out;
      },
      py::arg("weights"), py::arg("cube"));

  m.def(
      "neglog_unary",
      [](const DoubleArray& probs, double floor) {
        return unary_to_array(samrf::neglog_unary(probs_from_array(probs), floor));
      },
      py::arg("probs"), py::arg("floor") = 1e-12);

  m.def(
      "max_flow",
      [](int node_count, const DoubleArray& from_source, const DoubleArray& to_sink,
         const DoubleArray& arcs) {
        samrf::FlowNetwork net;
        net.node_count = node_count;
        net.from_source = as_vector(from_source);
        net.to_sink = as_vector(to_sink);
        if (arcs.size() > 0 && (arcs.ndim() != 2 || arcs.shape(1) != 4))
          throw samrf::Error("arcs must have shape (m, 4): u, v, cap_forward, cap_backward");
        for (py::ssize_t i = 0; i < arcs.shape(0); ++i) {
          const double* row = arcs.data() + i * 4;
          net.add_arc(static_cast<int>(row[0]), static_cast<int>(row[1]), row[2], row[3]);
        }
        const samrf::CutResult cut = samrf::max_flow(net);
        py::array_t<bool> side(static_cast<py::ssize_t>(cut.source_side.size()));
        for (std::size_t i = 0; i < cut.source_side.size(); ++i)
          side.mutable_data()[i] = cut.source_side[i];
        return py::make_tuple(cut.flow_value, side);
      },
      py::arg("node_count"), py::arg("from_source"), py::arg("to_sink"), py::arg("arcs"),
      "Returns (flow_value, source_side). Side = residual reachability from the source.");

  m.def(
      "total_energy",
      [](const IntArray& labeling, const DoubleArray& unary, double beta) {
        const samrf::UnaryField field = unary_from_array(unary);
        return samrf::total_energy(labeling_from_array(labeling), field,
                                   samrf::PottsParams{beta},
                                   samrf::GridGraph(field.width, field.height));
      },
      py::arg("labeling"), py::arg("unary"), py::arg("beta"));

  m.def(
      "unary_argmin",
      [](const DoubleArray& unary) {
        const samrf::UnaryField field = unary_from_array(unary);
        return labeling_to_array(samrf::unary_argmin(field), field.width, field.height);
      },
      py::arg("unary"));

  m.def(
      "exact_minimize",
      [](const DoubleArray& unary, double beta) {
        const samrf::UnaryField field = unary_from_array(unary);
        const auto [labeling, energy] = samrf::exact_minimize(
            field, samrf::PottsParams{beta}, samrf::GridGraph(field.width, field.height));
        return py::make_tuple(labeling_to_array(labeling, field.width, field.height), energy);
      },
      py::arg("unary"), py::arg("beta"));

  m.def(
      "partition_function",
      [](const DoubleArray& unary, double beta) {
        const samrf::UnaryField field = unary_from_array(unary);
        return samrf::partition_function(field, samrf::PottsParams{beta},
                                         samrf::GridGraph(field.width, field.height));
      },
      py::arg("unary"), py::arg("beta"));

  m.def(
      "alpha_expansion",
      [](const DoubleArray& unary, double beta, std::optional<IntArray> init, int max_sweeps,
         double relative_tolerance) {
        const samrf::UnaryField field = unary_from_array(unary);
        const samrf::GridGraph grid(field.width, field.height);
        const samrf::Labeling start =
            init ? labeling_from_array(*init) : samrf::unary_argmin(field);
        samrf::ExpansionOptions options;
        options.max_sweeps = max_sweeps;
        options.relative_tolerance = relative_tolerance;
        const samrf::ExpansionResult result =
            samrf::alpha_expansion(field, samrf::PottsParams{beta}, grid, start, options);
        return py::make_tuple(labeling_to_array(result.labeling, field.width, field.height),
                              result.energy, result.sweeps);
      },
      py::arg("unary"), py::arg("beta"), py::arg("init") = std::nullopt,
      py::arg("max_sweeps") = 50, py::arg("relative_tolerance") = 1e-12,
      "Returns (labeling, energy, sweeps); init defaults to the unary argmin.");

  m.def(
      "make_split",
      [](const IntArray& labels, int train_per_class, int test_per_class, double unary_fraction,
         std::uint64_t seed) {
        samrf::SplitSpec spec;
        spec.train_per_class = train_per_class;
        spec.test_per_class = test_per_class;
        spec.unary_fraction = unary_fraction;
        spec.seed = seed;
        const samrf::Split split = samrf::make_split(labels_from_array(labels), spec);
        py::dict out;
        out["unary_train"] = split.all_unary_train();
        out["beta_validation"] = split.all_beta_validation();
        out["test"] = split.all_test();
        return out;
      },
      py::arg("labels"), py::arg("train_per_class"), py::arg("test_per_class"),
      py::arg("unary_fraction") = 0.7, py::arg("seed") = 0,
      "Deterministic per-class split; values are flat pixel indices (y*width + x).");

  m.def(
      "overall_accuracy",
      [](const IntArray& predicted, const IntArray& truth, const std::vector<int>& eval_pixels) {
        return samrf::overall_accuracy(labeling_from_array(predicted),
                                       labels_from_array(truth), eval_pixels);
      },
      py::arg("predicted"), py::arg("truth"), py::arg("eval_pixels"));

  m.def(
      "select_beta",
      [](const DoubleArray& unary, const IntArray& truth, const std::vector<int>& validation_pixels,
         const std::vector<double>& beta_grid) {
        const samrf::UnaryField field = unary_from_array(unary);
        const samrf::BetaSelection selection = samrf::select_beta(
            field, samrf::GridGraph(field.width, field.height), labels_from_array(truth),
            validation_pixels, beta_grid);
        return py::make_tuple(selection.beta, selection.validation_accuracy);
      },
      py::arg("unary"), py::arg("truth"), py::arg("validation_pixels"), py::arg("beta_grid"));

  m.def(
      "run_trial",
      [](const DoubleArray& cube, const IntArray& labels, int train_per_class, int trial_index,
         const std::string& provider, const std::vector<double>& beta_grid, int test_per_class,
         std::uint64_t base_seed, double lr_lambda, int threads) {
        samrf::ExperimentConfig config;
        config.provider = samrf::provider_from_name(provider);
        config.beta_grid = beta_grid;
        config.test_per_class = test_per_class;
        config.base_seed = base_seed;
        config.lr_lambda = lr_lambda;
        config.threads = threads;
        const samrf::TrialResult trial = samrf::run_trial(
            cube_from_array(cube), labels_from_array(labels), config, train_per_class, trial_index);
        py::dict out;
        out["trial_index"] = trial.trial_index;
        out["seed"] = trial.seed;
        out["train_per_class"] = trial.train_per_class;
        out["chosen_beta"] = trial.chosen_beta;
        out["validation_accuracy_per_beta"] = trial.validation_accuracy_per_beta;
        out["pixelwise_accuracy"] = trial.pixelwise_accuracy;
        out["mrf_accuracy"] = trial.mrf_accuracy;
        return out;
      },
      py::arg("cube"), py::arg("labels"), py::arg("train_per_class"), py::arg("trial_index") = 0,
      py::arg("provider") = "sam",
      py::arg("beta_grid") = std::vector<double>{0.01, 0.1, 1.0, 10.0, 100.0},
      py::arg("test_per_class") = 50, py::arg("base_seed") = 0, py::arg("lr_lambda") = 1.0,
      py::arg("threads") = 1);

  m.def(
      "render_ppm",
      [](const IntArray& labeling) {
        if (labeling.ndim() != 2) throw samrf::Error("labeling must have shape (height, width)");
        const std::string payload = samrf::render_ppm(
            std::vector<int>(labeling.data(), labeling.data() + labeling.size()),
            static_cast<int>(labeling.shape(1)), static_cast<int>(labeling.shape(0)),
            samrf::Palette::standard16());
        return py::bytes(payload);
      },
      py::arg("labeling"), "P6 bytes under the fixed 16-color palette; label 0 is black.");

  m.def(
      "filter_classes",
      [](const IntArray& labels, int min_pixels) {
        const samrf::ClassFilterResult result =
            samrf::filter_classes(labels_from_array(labels), min_pixels);
        return py::make_tuple(
            labeling_to_array(result.labels.labels, result.labels.width, result.labels.height),
            result.kept_original, result.original_counts);
      },
      py::arg("labels"), py::arg("min_pixels"),
      "Returns (filtered_labels, kept_original, original_counts).");
}
