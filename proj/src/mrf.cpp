#include "samrf/mrf.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "samrf/error.hpp"
#include "samrf/maxflow.hpp"

namespace samrf {

namespace {

void check_beta(const PottsParams& potts) {
  if (!std::isfinite(potts.beta) || potts.beta < 0.0)
    throw Error("Potts cost must be finite and >= 0");
}

void check_dims(const UnaryField& unary, const GridGraph& grid) {
  if (unary.width != grid.width || unary.height != grid.height)
    throw Error("unary field is " + std::to_string(unary.width) + "x" +
                std::to_string(unary.height) + " but the grid is " + std::to_string(grid.width) +
                "x" + std::to_string(grid.height));
}

void check_labeling(const Labeling& labeling, const UnaryField& unary) {
  if (labeling.size() != static_cast<std::size_t>(unary.pixel_count()))
    throw Error("labeling has " + std::to_string(labeling.size()) + " entries for " +
                std::to_string(unary.pixel_count()) + " pixels");
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (labeling[i] < 1 || labeling[i] > unary.class_count)
      throw Error("label " + std::to_string(labeling[i]) + " at pixel " + std::to_string(i) +
                  " is outside 1.." + std::to_string(unary.class_count));
  }
}

// Number of labelings, saturated at just above the enumeration limit.
double labeling_count(int class_count, int pixel_count) {
  double total = 1.0;
  for (int i = 0; i < pixel_count; ++i) {
    total *= class_count;
    if (total > 2e7) return total;
  }
  return total;
}

constexpr double kEnumerationLimit = 1e7;

template <typename F>
void for_each_labeling(int class_count, int pixel_count, F&& f) {
  Labeling labeling(static_cast<std::size_t>(pixel_count), 1);
  while (true) {
    f(labeling);
    int pos = pixel_count - 1;
    while (pos >= 0 && labeling[pos] == class_count) {
      labeling[pos] = 1;
      --pos;
    }
    if (pos < 0) break;
    ++labeling[pos];
  }
}

}  // namespace

GridGraph::GridGraph(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1)
    throw Error("grid dimensions must be >= 1, got " + std::to_string(w) + "x" +
                std::to_string(h));
}

double potts(int yi, int yj, double beta) { return yi == yj ? 0.0 : beta; }

double total_energy(const Labeling& labeling, const UnaryField& unary, const PottsParams& potts_params,
                    const GridGraph& grid) {
  check_beta(potts_params);
  check_dims(unary, grid);
  check_labeling(labeling, unary);
  double energy = 0.0;
  for (int p = 0; p < unary.pixel_count(); ++p) energy += unary.at(p, labeling[p]);
  grid.for_each_edge([&](int i, int j) { energy += potts(labeling[i], labeling[j], potts_params.beta); });
  return energy;
}

Labeling unary_argmin(const UnaryField& unary) {
  Labeling labeling(static_cast<std::size_t>(unary.pixel_count()));
  for (int p = 0; p < unary.pixel_count(); ++p) {
    int best = 1;
    double best_energy = unary.at(p, 1);
    for (int c = 2; c <= unary.class_count; ++c) {
      const double e = unary.at(p, c);
      if (e < best_energy) {
        best_energy = e;
        best = c;
      }
    }
    labeling[p] = best;
  }
  return labeling;
}

std::pair<Labeling, double> exact_minimize(const UnaryField& unary, const PottsParams& potts_params,
                                           const GridGraph& grid) {
  check_beta(potts_params);
  check_dims(unary, grid);
  if (labeling_count(unary.class_count, unary.pixel_count()) > kEnumerationLimit)
    throw Error("exact_minimize: more than 1e7 labelings, instance too large to enumerate");
  Labeling best;
  double best_energy = 0.0;
  for_each_labeling(unary.class_count, unary.pixel_count(), [&](const Labeling& labeling) {
    const double energy = total_energy(labeling, unary, potts_params, grid);
    // enumeration is lexicographically ascending, so strict < keeps the
    // lexicographically smallest minimizer
    if (best.empty() || energy < best_energy) {
      best = labeling;
      best_energy = energy;
    }
  });
  return {best, best_energy};
}

double partition_function(const UnaryField& unary, const PottsParams& potts_params,
                          const GridGraph& grid) {
  check_beta(potts_params);
  check_dims(unary, grid);
  if (labeling_count(unary.class_count, unary.pixel_count()) > kEnumerationLimit)
    throw Error("partition_function: more than 1e7 labelings, instance too large to enumerate");
  double z = 0.0;
  for_each_labeling(unary.class_count, unary.pixel_count(), [&](const Labeling& labeling) {
    z += std::exp(-total_energy(labeling, unary, potts_params, grid));
  });
  return z;
}

namespace {

// One expansion move: every pixel either keeps its label or switches to
// alpha, the optimum found by a min cut. Pairwise terms follow the standard
// reparameterization for submodular binary energies: for an edge (i, j) with
// costs A = V(yi, yj), B = V(yi, a), C = V(a, yj), D = V(a, a) = 0, the
// arc i->j carries B + C - A - D (>= 0 for Potts) and the remainders fold
// into the terminal capacities.
Labeling expansion_move(const UnaryField& unary, const PottsParams& potts_params,
                        const GridGraph& grid, const Labeling& current, int alpha) {
  const int n = unary.pixel_count();
  FlowNetwork net;
  net.node_count = n;
  net.from_source.resize(n);
  net.to_sink.resize(n);
  net.arcs.reserve(static_cast<std::size_t>(grid.edge_count()));

  std::vector<double> keep_cost(n), take_cost(n);
  for (int p = 0; p < n; ++p) {
    keep_cost[p] = unary.at(p, current[p]);
    take_cost[p] = unary.at(p, alpha);
  }
  grid.for_each_edge([&](int i, int j) {
    const double a = potts(current[i], current[j], potts_params.beta);
    const double b = potts(current[i], alpha, potts_params.beta);
    const double c = potts(alpha, current[j], potts_params.beta);
    take_cost[i] += c - a;
    take_cost[j] += -c;
    net.add_arc(i, j, b + c - a, 0.0);
  });
  // shift per node so both terminal capacities are >= 0; shifting both
  // terminals of one node by the same amount never changes the cut
  for (int p = 0; p < n; ++p) {
    const double shift = std::min(keep_cost[p], take_cost[p]);
    net.from_source[p] = take_cost[p] - shift;
    net.to_sink[p] = keep_cost[p] - shift;
  }

  const CutResult cut = max_flow(net);
  Labeling moved(current);
  for (int p = 0; p < n; ++p) {
    if (!cut.source_side[p]) moved[p] = alpha;
  }
  return moved;
}

}  // namespace

ExpansionResult alpha_expansion(const UnaryField& unary, const PottsParams& potts_params,
                                const GridGraph& grid, const Labeling& init,
                                const ExpansionOptions& options) {
  check_beta(potts_params);
  check_dims(unary, grid);
  check_labeling(init, unary);
  if (options.max_sweeps < 1) throw Error("alpha_expansion: max_sweeps must be >= 1");

  ExpansionResult result;
  result.labeling = init;
  result.energy = total_energy(init, unary, potts_params, grid);

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double sweep_start = result.energy;
    for (int alpha = 1; alpha <= unary.class_count; ++alpha) {
      Labeling moved = expansion_move(unary, potts_params, grid, result.labeling, alpha);
      const double moved_energy = total_energy(moved, unary, potts_params, grid);
      // strict decrease only, so ties never churn the labeling
      if (moved_energy < result.energy) {
        result.labeling = std::move(moved);
        result.energy = moved_energy;
      }
    }
    ++result.sweeps;
    const double improvement = sweep_start - result.energy;
    if (improvement <= options.relative_tolerance * std::max(1.0, std::abs(sweep_start))) return result;
  }
  result.hit_sweep_cap = true;
  std::cerr << "warning: alpha_expansion stopped at the sweep cap (" << options.max_sweeps
            << ") while still improving\n";
  return result;
}

}  // namespace samrf
