#pragma once

#include <utility>
#include <vector>

#include "samrf/unary.hpp"

namespace samrf {

struct PottsParams {
  double beta = 0.0;  // cost of a 4-neighbor pair taking different labels
};

// 4-connected pixel grid. Edges pair each pixel with its right and down
// neighbors, enumerated row-major.
struct GridGraph {
  int width = 0;
  int height = 0;

  GridGraph(int w, int h);

  int pixel_count() const { return width * height; }
  int edge_count() const { return width * (height - 1) + (width - 1) * height; }

  template <typename F>
  void for_each_edge(F&& f) const {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const int p = y * width + x;
        if (x + 1 < width) f(p, p + 1);
        if (y + 1 < height) f(p, p + width);
      }
    }
  }
};

// One class index in 1..C per pixel, row-major.
using Labeling = std::vector<int>;

double potts(int yi, int yj, double beta);

// Eq-style total energy: sum of unaries plus Potts costs over all 4-neighbor
// edges.
double total_energy(const Labeling& labeling, const UnaryField& unary, const PottsParams& potts,
                    const GridGraph& grid);

// Per-pixel argmin of the unary field; ties go to the lowest class index.
// This is the beta = 0 minimizer.
Labeling unary_argmin(const UnaryField& unary);

// Global minimum by exhaustive enumeration, for oracle use on tiny grids.
// Ties break toward the lexicographically smallest labeling. Rejects
// instances with more than 1e7 labelings.
std::pair<Labeling, double> exact_minimize(const UnaryField& unary, const PottsParams& potts,
                                           const GridGraph& grid);

// Z = sum over all labelings of exp(-E(y)). Same size guardrail as
// exact_minimize.
double partition_function(const UnaryField& unary, const PottsParams& potts,
                          const GridGraph& grid);

struct ExpansionOptions {
  int max_sweeps = 50;
  double relative_tolerance = 1e-12;  // stop when a sweep improves less than this
};

struct ExpansionResult {
  Labeling labeling;
  double energy = 0.0;
  int sweeps = 0;
  bool hit_sweep_cap = false;
};

// Alpha-expansion over classes 1..C in ascending order, each binary move
// solved exactly by a min cut. Sweeps repeat until one passes without an
// energy decrease. The returned labeling is optimal with respect to every
// single expansion move, and its energy never exceeds the initial one.
ExpansionResult alpha_expansion(const UnaryField& unary, const PottsParams& potts,
                                const GridGraph& grid, const Labeling& init,
                                const ExpansionOptions& options = {});

}  // namespace samrf
