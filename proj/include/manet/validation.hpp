// Randomised self-checks the CLI and the acceptance suite share: route
// selection against brute-force path enumeration, and the message-size
// inequalities over random network parameters.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "manet/core.hpp"
#include "manet/messages.hpp"

namespace manet {

struct StaticGraph {
  std::vector<Position> pos;
  std::vector<double> residual;      // J
  std::vector<double> packet_energy; // J
  /// adjacency[i][j] > 0 is the Friis power measured at j for the hop i -> j.
  std::vector<std::vector<double>> hop_power;
  /// Propagation-plus-queueing delay of each directed hop, ms.
  std::vector<std::vector<SimTime>> hop_delay;

  [[nodiscard]] int size() const { return static_cast<int>(pos.size()); }
  [[nodiscard]] bool linked(int i, int j) const { return hop_power[i][j] > 0.0; }
};

/// Connected random graph of `n` nodes with coarse attribute values, so that
/// metric and arrival ties occur often.
StaticGraph random_static_graph(int n, std::uint64_t seed);

/// Every simple path from `s` to `d`.
std::vector<std::vector<int>> simple_paths(const StaticGraph& g, int s, int d);

/// Route the destination picks when every simple path is offered, via the
/// RREQ machinery and select_route. Returns the full path.
std::vector<int> select_via_protocol(Protocol p, const StaticGraph& g, int s, int d);
/// Same choice made by direct enumeration and metric arithmetic.
std::vector<int> select_by_enumeration(Protocol p, const StaticGraph& g, int s, int d);

struct CheckReport {
  std::int64_t cases = 0;
  std::int64_t failures = 0;
  std::vector<std::string> examples;  // first few failures, human readable

  [[nodiscard]] bool ok() const { return failures == 0 && cases > 0; }
};

/// `graphs` random graphs of 3..max_nodes nodes, all five protocols each.
CheckReport check_route_selection(int graphs, int max_nodes, std::uint64_t seed);

/// Network parameters drawn across the scenario ranges (20-100 nodes,
/// 100-1000 m sides, 50-100 m radio range, up to 10 min, 2 to 1000 packets).
BitParams random_bit_params(std::uint64_t seed);

/// Extra RREQ bits < 2 HELLO, link-fail delta < 0, repair permission < 4 HELLO.
CheckReport check_size_bounds(int sets, std::uint64_t seed);

}  // namespace manet
