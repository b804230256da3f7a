#pragma once

#include <vector>

namespace samrf {

// Sparse s-t network over node_count ordinary nodes plus the two implicit
// terminals. Neighbor arcs are stored as pairs with independent capacities
// in each direction.
struct FlowNetwork {
  struct Arc {
    int u = 0;
    int v = 0;
    double cap_forward = 0.0;   // u -> v
    double cap_backward = 0.0;  // v -> u
  };

  int node_count = 0;
  std::vector<double> from_source;  // per node, >= 0
  std::vector<double> to_sink;      // per node, >= 0
  std::vector<Arc> arcs;

  explicit FlowNetwork(int nodes = 0)
      : node_count(nodes), from_source(nodes, 0.0), to_sink(nodes, 0.0) {}

  void add_arc(int u, int v, double cap_forward, double cap_backward);
  void validate() const;
};

struct CutResult {
  double flow_value = 0.0;
  // true = node remains connected to the source in the final residual graph.
  std::vector<bool> source_side;
};

// Maximum s-t flow via the Boykov-Kolmogorov augmenting-path algorithm
// (grown search trees are reused between augmentations). The cut side of
// each node is determined by an explicit residual-graph reachability pass,
// so ties resolve deterministically.
CutResult max_flow(const FlowNetwork& net);

// Capacity of the cut induced by a side assignment: terminal arcs leaving
// the wrong side plus neighbor arcs crossing from source side to sink side.
double cut_capacity(const FlowNetwork& net, const std::vector<bool>& source_side);

}  // namespace samrf
