#include "samrf/maxflow.hpp"

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "samrf/error.hpp"

namespace samrf {

void FlowNetwork::add_arc(int u, int v, double cap_forward, double cap_backward) {
  arcs.push_back(Arc{u, v, cap_forward, cap_backward});
}

void FlowNetwork::validate() const {
  if (node_count < 0) throw Error("FlowNetwork: negative node count");
  if (from_source.size() != static_cast<std::size_t>(node_count) ||
      to_sink.size() != static_cast<std::size_t>(node_count))
    throw Error("FlowNetwork: terminal capacity arrays do not match node count");
  for (int v = 0; v < node_count; ++v) {
    if (!(from_source[v] >= 0.0) || !std::isfinite(from_source[v]) || !(to_sink[v] >= 0.0) ||
        !std::isfinite(to_sink[v]))
      throw Error("FlowNetwork: terminal capacities of node " + std::to_string(v) +
                  " must be finite and >= 0");
  }
  for (const Arc& a : arcs) {
    if (a.u == a.v) throw Error("FlowNetwork: self-loop on node " + std::to_string(a.u));
    if (a.u < 0 || a.u >= node_count || a.v < 0 || a.v >= node_count)
      throw Error("FlowNetwork: arc endpoint out of range");
    if (!(a.cap_forward >= 0.0) || !std::isfinite(a.cap_forward) || !(a.cap_backward >= 0.0) ||
        !std::isfinite(a.cap_backward))
      throw Error("FlowNetwork: arc capacities must be finite and >= 0");
  }
}

namespace {

// Boykov-Kolmogorov max-flow. Search trees rooted at both terminals are
// grown and kept between augmentations; orphans created by saturated path
// arcs are re-adopted instead of rebuilding the trees.
class BkSolver {
 public:
  explicit BkSolver(const FlowNetwork& net)
      : n_(net.node_count),
        first_(n_, -1),
        parent_(n_, kNone),
        in_sink_tree_(n_, 0),
        dist_(n_, 0),
        ts_(n_, 0),
        in_active_(n_, 0),
        tr_cap_(n_, 0.0) {
    head_.reserve(net.arcs.size() * 2);
    next_.reserve(net.arcs.size() * 2);
    rcap_.reserve(net.arcs.size() * 2);
    for (const auto& a : net.arcs) {
      push_arc(a.u, a.v, a.cap_forward);
      push_arc(a.v, a.u, a.cap_backward);
    }
    for (int v = 0; v < n_; ++v) {
      flow_ += std::min(net.from_source[v], net.to_sink[v]);
      tr_cap_[v] = net.from_source[v] - net.to_sink[v];
      if (tr_cap_[v] != 0.0) {
        parent_[v] = kTerminal;
        in_sink_tree_[v] = tr_cap_[v] < 0.0;
        dist_[v] = 1;
        ts_[v] = 0;
        set_active(v);
      }
    }
  }

  double solve() {
    while (!active_.empty()) {
      const int p = pop_active();
      if (p < 0) break;
      if (parent_[p] == kNone) continue;  // became free since it was queued

      const bool p_sink = in_sink_tree_[p];
      for (int a = first_[p]; a != -1; a = next_[a]) {
        const double residual = p_sink ? rcap_[sister(a)] : rcap_[a];
        if (residual <= 0.0) continue;
        const int q = head_[a];
        if (parent_[q] == kNone) {
          // grow the tree
          in_sink_tree_[q] = p_sink;
          parent_[q] = sister(a);
          dist_[q] = dist_[p] + 1;
          ts_[q] = ts_[p];
          set_active(q);
        } else if (in_sink_tree_[q] != p_sink) {
          // trees met; the connecting arc runs source side -> sink side.
          // time_ must advance first: adoption trusts ts_[v] == time_ marks,
          // and stale stamps (including the initial zeros) must not qualify.
          ++time_;
          augment(p_sink ? sister(a) : a);
          set_active(p);
          break;
        } else if (ts_[q] <= ts_[p] && dist_[q] > dist_[p]) {
          // shorter route to the terminal for q
          parent_[q] = sister(a);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
        }
      }
    }
    return flow_;
  }

  // Residual reachability from the source, the documented cut side rule.
  std::vector<bool> source_side() const {
    std::vector<bool> side(n_, false);
    std::deque<int> queue;
    for (int v = 0; v < n_; ++v) {
      if (tr_cap_[v] > 0.0) {
        side[v] = true;
        queue.push_back(v);
      }
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int a = first_[u]; a != -1; a = next_[a]) {
        if (rcap_[a] > 0.0 && !side[head_[a]]) {
          side[head_[a]] = true;
          queue.push_back(head_[a]);
        }
      }
    }
    return side;
  }

 private:
  static constexpr int kNone = -2;
  static constexpr int kTerminal = -1;

  static int sister(int a) { return a ^ 1; }

  void push_arc(int u, int v, double cap) {
    const int idx = static_cast<int>(head_.size());
    head_.push_back(v);
    rcap_.push_back(cap);
    next_.push_back(first_[u]);
    first_[u] = idx;
  }

  void set_active(int v) {
    if (!in_active_[v]) {
      in_active_[v] = 1;
      active_.push_back(v);
    }
  }

  int pop_active() {
    while (!active_.empty()) {
      const int v = active_.front();
      active_.pop_front();
      in_active_[v] = 0;
      if (parent_[v] != kNone) return v;
    }
    return -1;
  }

  int arc_tail(int a) const { return head_[sister(a)]; }

  // connecting arc runs from the source tree into the sink tree
  void augment(int connect) {
    double bottleneck = rcap_[connect];
    {
      int v = arc_tail(connect);
      while (parent_[v] != kTerminal) {
        bottleneck = std::min(bottleneck, rcap_[sister(parent_[v])]);
        v = head_[parent_[v]];
      }
      bottleneck = std::min(bottleneck, tr_cap_[v]);
    }
    {
      int v = head_[connect];
      while (parent_[v] != kTerminal) {
        bottleneck = std::min(bottleneck, rcap_[parent_[v]]);
        v = head_[parent_[v]];
      }
      bottleneck = std::min(bottleneck, -tr_cap_[v]);
    }

    rcap_[connect] -= bottleneck;
    rcap_[sister(connect)] += bottleneck;
    // source tree side; saturated path arcs orphan the node below them
    {
      int v = arc_tail(connect);
      while (true) {
        const int pa = parent_[v];
        if (pa == kTerminal) {
          tr_cap_[v] -= bottleneck;
          if (tr_cap_[v] <= 0.0) make_orphan(v);
          break;
        }
        rcap_[pa] += bottleneck;
        rcap_[sister(pa)] -= bottleneck;
        const int next_v = head_[pa];
        if (rcap_[sister(pa)] <= 0.0) make_orphan(v);
        v = next_v;
      }
    }
    // sink tree side
    {
      int v = head_[connect];
      while (true) {
        const int pa = parent_[v];
        if (pa == kTerminal) {
          tr_cap_[v] += bottleneck;
          if (tr_cap_[v] >= 0.0) make_orphan(v);
          break;
        }
        rcap_[sister(pa)] += bottleneck;
        rcap_[pa] -= bottleneck;
        const int next_v = head_[pa];
        if (rcap_[pa] <= 0.0) make_orphan(v);
        v = next_v;
      }
    }
    flow_ += bottleneck;

    adopt_orphans();
  }

  void make_orphan(int v) {
    parent_[v] = kOrphanMark;
    orphans_.push_back(v);
  }

  static constexpr int kOrphanMark = -3;

  // Distance to the terminal through valid parents; kInvalid if the chain
  // ends in an orphan.
  static constexpr int kInvalid = 1 << 30;

  int origin_distance(int u) {
    int d = 0;
    int v = u;
    while (true) {
      if (ts_[v] == time_) {
        d += dist_[v];
        break;
      }
      const int pa = parent_[v];
      ++d;
      if (pa == kTerminal) break;
      if (pa == kOrphanMark || pa == kNone) return kInvalid;
      v = head_[pa];
    }
    // mark the walked prefix so later walks stop early
    int dd = d;
    for (int w = u; ts_[w] != time_; w = head_[parent_[w]]) {
      ts_[w] = time_;
      dist_[w] = dd--;
      if (parent_[w] == kTerminal) break;
    }
    return d;
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const int v = orphans_.front();
      orphans_.pop_front();
      const bool v_sink = in_sink_tree_[v];

      int best_arc = -1;
      int best_dist = kInvalid;
      for (int a = first_[v]; a != -1; a = next_[a]) {
        const double residual = v_sink ? rcap_[a] : rcap_[sister(a)];
        if (residual <= 0.0) continue;
        const int u = head_[a];
        if (parent_[u] == kNone || in_sink_tree_[u] != v_sink) continue;
        const int d = origin_distance(u);
        if (d < best_dist) {
          best_dist = d;
          best_arc = a;
        }
      }

      if (best_arc != -1) {
        parent_[v] = best_arc;
        ts_[v] = time_;
        dist_[v] = best_dist + 1;
        continue;
      }

      // v leaves the tree; re-examine its neighborhood
      for (int a = first_[v]; a != -1; a = next_[a]) {
        const int u = head_[a];
        if (parent_[u] == kNone || in_sink_tree_[u] != v_sink) continue;
        const double residual = v_sink ? rcap_[a] : rcap_[sister(a)];
        if (residual > 0.0) set_active(u);
        if (parent_[u] >= 0 && head_[parent_[u]] == v) make_orphan(u);
      }
      parent_[v] = kNone;
    }
  }

  int n_;
  std::vector<int> first_, head_, next_;
  std::vector<double> rcap_;
  std::vector<int> parent_;
  std::vector<char> in_sink_tree_;
  std::vector<int> dist_, ts_;
  std::vector<char> in_active_;
  std::vector<double> tr_cap_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  double flow_ = 0.0;
  int time_ = 0;
};

}  // namespace

CutResult max_flow(const FlowNetwork& net) {
  net.validate();
  BkSolver solver(net);
  CutResult result;
  result.flow_value = solver.solve();
  result.source_side = solver.source_side();
  return result;
}

double cut_capacity(const FlowNetwork& net, const std::vector<bool>& source_side) {
  net.validate();
  if (source_side.size() != static_cast<std::size_t>(net.node_count))
    throw Error("cut_capacity: side vector length does not match node count");
  double capacity = 0.0;
  for (int v = 0; v < net.node_count; ++v) {
    capacity += source_side[v] ? net.to_sink[v] : net.from_source[v];
  }
  for (const auto& a : net.arcs) {
    if (source_side[a.u] && !source_side[a.v]) capacity += a.cap_forward;
    if (source_side[a.v] && !source_side[a.u]) capacity += a.cap_backward;
  }
  return capacity;
}

}  // namespace samrf
