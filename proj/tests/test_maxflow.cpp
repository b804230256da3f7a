#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "samrf/maxflow.hpp"
#include "samrf/rng.hpp"
#include "testutil.hpp"

using samrf::CutResult;
using samrf::FlowNetwork;
using testutil::contains;
using testutil::thrown_message;

TEST_CASE("single node saturates the smaller terminal arc") {
  FlowNetwork net(1);
  net.from_source[0] = 3.0;
  net.to_sink[0] = 5.0;
  const CutResult r = samrf::max_flow(net);
  CHECK(r.flow_value == 3.0);
  REQUIRE(r.source_side.size() == 1);
  // the source arc is saturated, so the node is unreachable from the source
  CHECK(r.source_side[0] == false);
  CHECK(samrf::cut_capacity(net, r.source_side) == r.flow_value);
}

TEST_CASE("two nodes route through the neighbor arc") {
  FlowNetwork net(2);
  net.from_source[0] = 2.0;
  net.to_sink[1] = 2.0;
  net.add_arc(0, 1, 1.0, 0.0);
  const CutResult r = samrf::max_flow(net);
  CHECK(r.flow_value == 1.0);
  CHECK(r.source_side == std::vector<bool>{true, false});

  // the minimum over all four assignments is the crossing arc alone
  const double enumerated = testutil::brute_force_min_cut(net);
  CHECK(enumerated == 1.0);
  CHECK(samrf::cut_capacity(net, {true, false}) == 1.0);
  CHECK(samrf::cut_capacity(net, {true, true}) == 2.0);
  CHECK(samrf::cut_capacity(net, {false, true}) == 4.0);
  CHECK(samrf::cut_capacity(net, {false, false}) == 2.0);
}

TEST_CASE("all-zero capacities put every node on the sink side") {
  FlowNetwork net(2);
  net.add_arc(0, 1, 0.0, 0.0);
  const CutResult r = samrf::max_flow(net);
  CHECK(r.flow_value == 0.0);
  CHECK(r.source_side == std::vector<bool>{false, false});
  CHECK(samrf::cut_capacity(net, r.source_side) == 0.0);
}

TEST_CASE("cut_capacity charges terminal arcs on the wrong side") {
  FlowNetwork net(3);
  net.from_source = {1.0, 2.0, 4.0};
  net.to_sink = {8.0, 16.0, 32.0};
  net.add_arc(0, 1, 100.0, 200.0);

  // everything on the source side cuts only the sink arcs
  CHECK(samrf::cut_capacity(net, {true, true, true}) == 8.0 + 16.0 + 32.0);
  // everything on the sink side cuts only the source arcs
  CHECK(samrf::cut_capacity(net, {false, false, false}) == 1.0 + 2.0 + 4.0);
  // one crossing arc in the forward direction
  CHECK(samrf::cut_capacity(net, {true, false, false}) == 8.0 + 2.0 + 4.0 + 100.0);
  // and in the backward direction
  CHECK(samrf::cut_capacity(net, {false, true, false}) == 1.0 + 16.0 + 4.0 + 200.0);
}

TEST_CASE("flow equals the enumerated minimum cut on random networks") {
  samrf::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const FlowNetwork net = testutil::random_network(rng);
    const CutResult r = samrf::max_flow(net);

    // integer capacities keep every comparison exact
    CHECK(r.flow_value == testutil::brute_force_min_cut(net));
    CHECK(samrf::cut_capacity(net, r.source_side) == r.flow_value);

    double supply = 0.0, demand = 0.0;
    for (double c : net.from_source) supply += c;
    for (double c : net.to_sink) demand += c;
    CHECK(r.flow_value <= supply);
    CHECK(r.flow_value <= demand);
  }
}

TEST_CASE("raising one capacity never lowers the flow") {
  samrf::Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    FlowNetwork net = testutil::random_network(rng);
    const double before = samrf::max_flow(net).flow_value;
    switch (rng.uniform_below(3)) {
      case 0:
        net.from_source[rng.uniform_below(static_cast<std::uint64_t>(net.node_count))] += 1.0;
        break;
      case 1:
        net.to_sink[rng.uniform_below(static_cast<std::uint64_t>(net.node_count))] += 1.0;
        break;
      default:
        if (!net.arcs.empty()) {
          net.arcs[rng.uniform_below(net.arcs.size())].cap_forward += 1.0;
        } else {
          net.from_source[0] += 1.0;
        }
        break;
    }
    CHECK(samrf::max_flow(net).flow_value >= before);
  }
}

TEST_CASE("max_flow is deterministic") {
  samrf::Rng rng(99);
  const FlowNetwork net = testutil::random_network(rng);
  const CutResult a = samrf::max_flow(net);
  const CutResult b = samrf::max_flow(net);
  CHECK(a.flow_value == b.flow_value);
  CHECK(a.source_side == b.source_side);
}

TEST_CASE("validate rejects malformed networks") {
  FlowNetwork self(2);
  self.arcs.push_back({1, 1, 1.0, 1.0});
  CHECK(contains(thrown_message([&] { self.validate(); }), "self-loop"));

  FlowNetwork range(2);
  range.arcs.push_back({0, 2, 1.0, 1.0});
  CHECK(contains(thrown_message([&] { range.validate(); }), "out of range"));

  FlowNetwork negative(1);
  negative.from_source[0] = -1.0;
  CHECK(contains(thrown_message([&] { negative.validate(); }), ">= 0"));

  FlowNetwork nan_cap(2);
  nan_cap.arcs.push_back({0, 1, std::numeric_limits<double>::quiet_NaN(), 0.0});
  CHECK(!thrown_message([&] { nan_cap.validate(); }).empty());

  FlowNetwork short_terms(2);
  short_terms.from_source.pop_back();
  CHECK(!thrown_message([&] { short_terms.validate(); }).empty());

  // the solver validates on entry
  CHECK(contains(thrown_message([&] { samrf::max_flow(self); }), "self-loop"));
  CHECK(contains(thrown_message([&] { samrf::cut_capacity(range, {true, false}); }),
                 "out of range"));
}
