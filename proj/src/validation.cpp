#include "manet/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "manet/protocols.hpp"
#include "manet/rng.hpp"

namespace manet {

namespace {

bool connected(const StaticGraph& g) {
  std::vector<bool> seen(g.pos.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < g.size(); ++v) {
      if (!seen[v] && g.linked(u, v)) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

NodeView view_of(const StaticGraph& g, int i) {
  NodeView v;
  v.id = NodeId(static_cast<std::uint32_t>(i));
  v.location = g.pos[i];
  v.residual_energy = g.residual[i];
  v.packet_energy = g.packet_energy[i];
  v.min_receive_power = 1.0;
  v.radio_range = 100.0;
  return v;
}

std::string path_string(const std::vector<int>& p) {
  std::string s;
  for (int v : p) s += (s.empty() ? "" : "-") + std::to_string(v);
  return s;
}

}  // namespace

StaticGraph random_static_graph(int n, std::uint64_t seed) {
  if (n < 2) throw InvalidParameter("graph needs at least two nodes");
  Rng rng(splitmix64(seed));
  const auto nn = static_cast<std::size_t>(n);
  while (true) {
    StaticGraph g;
    for (int i = 0; i < n; ++i) {
      g.pos.push_back({25.0 * static_cast<double>(rng.below(5)), 25.0 * static_cast<double>(rng.below(5))});
      g.residual.push_back(1.0 + static_cast<double>(rng.below(6)));
      g.packet_energy.push_back(0.5 * static_cast<double>(1 + rng.below(3)));
    }
    g.hop_power.assign(nn, std::vector<double>(nn, 0.0));
    g.hop_delay.assign(nn, std::vector<SimTime>(nn, 0));
    for (std::size_t i = 0; i < nn; ++i) {
      for (std::size_t j = i + 1; j < nn; ++j) {
        if (rng.uniform() >= 0.5) continue;
        g.hop_power[i][j] = 1.0 + static_cast<double>(rng.below(4));
        g.hop_power[j][i] = 1.0 + static_cast<double>(rng.below(4));
        g.hop_delay[i][j] = 1 + static_cast<SimTime>(rng.below(3));
        g.hop_delay[j][i] = 1 + static_cast<SimTime>(rng.below(3));
      }
    }
    if (connected(g)) return g;
  }
}

std::vector<std::vector<int>> simple_paths(const StaticGraph& g, int s, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> path{s};
  std::vector<bool> on(g.pos.size(), false);
  on[s] = true;
  std::function<void(int)> dfs = [&](int u) {
    if (u == d) {
      out.push_back(path);
      return;
    }
    for (int v = 0; v < g.size(); ++v) {
      if (on[v] || !g.linked(u, v)) continue;
      on[v] = true;
      path.push_back(v);
      dfs(v);
      path.pop_back();
      on[v] = false;
    }
  };
  dfs(s);
  return out;
}

std::vector<int> select_via_protocol(Protocol p, const StaticGraph& g, int s, int d) {
  std::vector<Candidate> candidates;
  for (const auto& path : simple_paths(g, s, d)) {
    Rreq r = originate_rreq(p, view_of(g, s), NodeId(static_cast<std::uint32_t>(d)), 1, 5, 0);
    SimTime now = 0;
    bool dropped = false;
    for (std::size_t k = 1; k < path.size(); ++k) {
      const int from = path[k - 1];
      const int to = path[k];
      now += g.hop_delay[from][to];
      ForwardContext ctx;
      ctx.protocol = p;
      ctx.max_hop_count = g.size();
      ctx.now = now;
      ctx.ttl = std::numeric_limits<SimTime>::max() / 4;
      ctx.hop_power = g.hop_power[from][to];
      ctx.predecessor = NodeId(static_cast<std::uint32_t>(from));
      ctx.predecessor_location = g.pos[from];
      if (to == d) {
        auto c = accept_at_destination(r, view_of(g, to), ctx);
        if (c.reason != DropReason::None) {
          dropped = true;
          break;
        }
        candidates.push_back(c.candidate);
      } else {
        RreqTable table;  // fresh per path: every copy is offered
        auto f = forward_rreq(r, view_of(g, to), ctx, table);
        if (f.reason != DropReason::None) {
          dropped = true;
          break;
        }
        r = f.out;
      }
    }
    if (dropped) throw Error("RREQ dropped on a valid simple path");
  }
  // Arrival order must not matter, so offer the copies shuffled.
  Rng shuffle(splitmix64(candidates.size() * 0x9e37ULL + static_cast<std::uint64_t>(p)));
  for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[shuffle.below(i)]);
  const auto best = select_route(p, candidates, g.pos[s], g.pos[d]);
  if (!best) return {};
  std::vector<int> out{s};
  for (NodeId id : candidates[*best].rreq.router_sequence) out.push_back(static_cast<int>(id.value));
  out.push_back(d);
  return out;
}

std::vector<int> select_by_enumeration(Protocol p, const StaticGraph& g, int s, int d) {
  // Larger score wins; then earlier arrival; then smaller router sequence.
  struct Scored {
    std::vector<double> score;
    SimTime arrival;
    std::vector<int> routers;
    std::vector<int> path;
  };
  const Position ps = g.pos[s];
  const Position pd = g.pos[d];
  const double len = std::hypot(pd.x - ps.x, pd.y - ps.y);
  auto progress = [&](int v) {
    if (len == 0.0) return 0.0;
    return ((g.pos[v].x - ps.x) * (pd.x - ps.x) + (g.pos[v].y - ps.y) * (pd.y - ps.y)) / len;
  };

  std::vector<Scored> all;
  for (const auto& path : simple_paths(g, s, d)) {
    Scored e;
    e.path = path;
    e.routers.assign(path.begin() + 1, path.end() - 1);
    e.arrival = 0;
    for (std::size_t k = 1; k < path.size(); ++k) e.arrival += g.hop_delay[path[k - 1]][path[k]];
    double low = std::numeric_limits<double>::infinity();
    switch (p) {
      case Protocol::AODV: e.score = {-static_cast<double>(path.size() - 1)}; break;
      case Protocol::MMBCR:
        // source and relays; the destination forwards nothing
        for (std::size_t k = 0; k + 1 < path.size(); ++k) low = std::min(low, g.residual[path[k]]);
        e.score = {low};
        break;
      case Protocol::MRPC:
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
          low = std::min(low, std::floor(g.residual[path[k]] / g.packet_energy[path[k]] + 1e-9));
        }
        e.score = {low};
        break;
      case Protocol::MTPR:
        for (std::size_t k = 1; k < path.size(); ++k) low = std::min(low, g.hop_power[path[k - 1]][path[k]]);
        e.score = {-low};
        break;
      case Protocol::MFR:
        for (std::size_t k = 1; k < path.size(); ++k) e.score.push_back(progress(path[k]));
        break;
    }
    all.push_back(std::move(e));
  }
  if (all.empty()) return {};
  const auto best = std::min_element(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.routers < b.routers;
  });
  return best->path;
}

CheckReport check_route_selection(int graphs, int max_nodes, std::uint64_t seed) {
  if (graphs < 1 || max_nodes < 3) throw InvalidParameter("need at least one graph of three or more nodes");
  CheckReport rep;
  Rng rng(splitmix64(seed ^ 0x5eedULL));
  for (int k = 0; k < graphs; ++k) {
    const int n = 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nodes - 2)));
    const StaticGraph g = random_static_graph(n, rng.next_u64());
    const int s = 0;
    const int d = n - 1;
    for (Protocol p : kAllProtocols) {
      ++rep.cases;
      const auto a = select_via_protocol(p, g, s, d);
      const auto b = select_by_enumeration(p, g, s, d);
      if (a != b) {
        ++rep.failures;
        if (rep.examples.size() < 5) {
          rep.examples.push_back("graph " + std::to_string(k) + " " + std::string(to_string(p)) + ": selected " +
                                 path_string(a) + ", enumeration " + path_string(b));
        }
      }
    }
  }
  return rep;
}

BitParams random_bit_params(std::uint64_t seed) {
  Rng rng(splitmix64(seed));
  BitParams p;
  p.N = 20 + rng.below(81);
  p.X = 100 + rng.below(901);
  p.Y = 100 + rng.below(901);
  p.R_min = 50 + rng.below(51);
  p.R_max = p.R_min + rng.below(101 - p.R_min);
  p.TM = 1000 + rng.below(600'000 - 1000 + 1);
  p.PAC = 2 + rng.below(999);
  return p;
}

CheckReport check_size_bounds(int sets, std::uint64_t seed) {
  CheckReport rep;
  for (int k = 0; k < sets; ++k) {
    const BitParams p = random_bit_params(splitmix64(seed) + static_cast<std::uint64_t>(k));
    const int hello = bits_hello(p);
    const bool ok = bits_add_rreq(p) < 2 * hello && bits_link_fail_delta(p) < 0 &&
                    bits_repair_permission(p) < 4 * hello;
    ++rep.cases;
    if (!ok) {
      ++rep.failures;
      if (rep.examples.size() < 5) {
        std::ostringstream os;
        os << "N=" << p.N << " X=" << p.X << " Y=" << p.Y << " Rmin=" << p.R_min << " Rmax=" << p.R_max
           << " TM=" << p.TM << " PAC=" << p.PAC;
        rep.examples.push_back(os.str());
      }
    }
  }
  return rep;
}

}  // namespace manet
