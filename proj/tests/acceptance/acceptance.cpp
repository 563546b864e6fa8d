// Acceptance checks. Prints one PASS/FAIL line per criterion, then details,
// and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "manet/analytics.hpp"
#include "manet/engine.hpp"
#include "manet/harness.hpp"
#include "manet/protocols.hpp"
#include "manet/rng.hpp"
#include "manet/validation.hpp"

using namespace manet;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "  ok    " : "  FAIL  ") + what);
  }
  void note(const std::string& s) { notes.push_back("        " + s); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Criteria 1, 2, 9: the node-count sweep

struct SweepData {
  SweepResult result;
  SweepResult repeat;
  double seconds = 0.0;
};

SweepData node_sweep() {
  SweepSpec spec;
  spec.axis = SweepAxis::NodeCount;
  spec.axis_values = {20, 40, 60, 80, 100};
  spec.protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
  SweepOptions opts;
  opts.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  SweepData d;
  d.result = run_sweep(spec, opts);
  d.repeat = run_sweep(spec, opts);
  d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

const AggregateRow* row(const SweepResult& r, Protocol p, Variant v, int value) {
  for (const auto& a : r.rows) {
    if (a.protocol == p && a.variant == v && a.value == value) return &a;
  }
  return nullptr;
}

Stat stat(const AggregateRow* r, const char* metric) {
  if (!r) return {NAN, NAN, 0};
  const auto it = r->metrics.find(metric);
  return it == r->metrics.end() ? Stat{NAN, NAN, 0} : it->second;
}

Outcome criterion1(const SweepData& d) {
  Outcome o;
  for (Protocol p : kAllProtocols) {
    const Stat c = stat(row(d.result, p, Variant::Classical, 60), kEnergy);
    const Stat m = stat(row(d.result, p, Variant::MinusHello, 60), kEnergy);
    const double gap = c.mean - m.mean;
    const double sd = std::max(c.stddev, m.stddev);
    o.require(c.n == 10 && m.n == 10 && gap > 0 && gap > sd,
              fmt("%-5s energy J classical %.2f (sd %.2f) vs -HELLO %.2f (sd %.2f), gap %.2f",
                  std::string(to_string(p)).c_str(), c.mean, c.stddev, m.mean, m.stddev, gap));
  }
  return o;
}

Outcome criterion2(const SweepData& d) {
  Outcome o;
  for (Protocol p : kAllProtocols) {
    const auto* c = row(d.result, p, Variant::Classical, 60);
    const auto* m = row(d.result, p, Variant::MinusHello, 60);
    const std::string name(to_string(p));
    const Stat lc = stat(c, kLifetime), lm = stat(m, kLifetime);
    const Stat dc = stat(c, kDelay), dm = stat(m, kDelay);
    const Stat tc = stat(c, kThroughput), tm = stat(m, kThroughput);
    o.require(lm.mean > lc.mean, fmt("%-5s first death ms classical %.0f vs -HELLO %.0f", name.c_str(), lc.mean, lm.mean));
    o.require(dm.mean < dc.mean,
              fmt("%-5s delay ms classical %.1f (n=%d) vs -HELLO %.1f (n=%d)", name.c_str(), dc.mean, dc.n, dm.mean, dm.n));
    o.require(tm.mean > tc.mean, fmt("%-5s throughput classical %.3f vs -HELLO %.3f", name.c_str(), tc.mean, tm.mean));
  }
  // Shape: interior maximum of throughput over node count, on the -HELLO
  // curves. The classical curves are HELLO-starved and only fall.
  const std::vector<int> counts{20, 40, 60, 80, 100};
  for (Protocol p : kAllProtocols) {
    for (Variant v : {Variant::MinusHello, Variant::Classical}) {
      std::vector<double> ys;
      std::string curve;
      for (int n : counts) {
        ys.push_back(stat(row(d.result, p, v, n), kThroughput).mean);
        curve += fmt(" %d:%.3f", n, ys.back());
      }
      const auto peak = std::max_element(ys.begin(), ys.end()) - ys.begin();
      const bool interior = peak > 0 && peak + 1 < static_cast<long>(ys.size());
      const std::string label = fmt("%-5s %-11s throughput vs nodes%s", std::string(to_string(p)).c_str(),
                                    std::string(to_string(v)).c_str(), curve.c_str());
      if (v == Variant::MinusHello) {
        o.require(interior, label + (interior ? " (interior maximum)" : " (no interior maximum)"));
      } else {
        o.note(label);
      }
    }
  }
  return o;
}

Outcome criterion9(const SweepData& d) {
  Outcome o;
  std::int64_t loops = 0, conservation = 0, ledger = 0, silent = 0, causality = 0, differ = 0, missing = 0;
  for (std::size_t k = 0; k < d.result.runs.size(); ++k) {
    const auto& a = d.result.runs[k].report;
    const auto& b = d.repeat.runs[k].report;
    if (!a || !b) {
      ++missing;
      continue;
    }
    loops += a->loop_violations;
    ledger += a->energy_ledger_mismatches;
    silent += a->dead_node_transmissions;
    causality += a->causality_violations;
    const std::int64_t outcomes = a->delivered + a->in_flight + a->dropped_queue + a->lost_collision + a->lost_dead_route;
    if (a->conservation_mismatch != 0 || outcomes != a->offered) ++conservation;
    if (a->to_json() != b->to_json()) ++differ;
  }
  const auto runs = static_cast<long long>(d.result.runs.size());
  o.require(missing == 0, fmt("%lld runs completed (%lld failed)", runs - missing, static_cast<long long>(missing)));
  o.require(loops == 0, fmt("loop-freedom: %lld duplicate ids in forwarded router sequences", static_cast<long long>(loops)));
  o.require(conservation == 0, fmt("packet conservation: %lld runs unbalanced", static_cast<long long>(conservation)));
  o.require(ledger == 0, fmt("energy ledger: %lld mismatches", static_cast<long long>(ledger)));
  o.require(silent == 0, fmt("dead-node silence: %lld transmissions after death", static_cast<long long>(silent)));
  o.require(causality == 0, fmt("event causality: %lld violations", static_cast<long long>(causality)));
  o.require(differ == 0, fmt("determinism: %lld of %lld runs differ on re-run", static_cast<long long>(differ), runs));
  return o;
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4

Outcome criterion3() {
  Outcome o;
  const auto rep = check_size_bounds(10'000, 2024);
  o.require(rep.ok(), fmt("%lld parameter sets, %lld counterexamples", static_cast<long long>(rep.cases),
                          static_cast<long long>(rep.failures)));
  for (const auto& e : rep.examples) o.note(e);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto rep = check_route_selection(500, 8, 1);
  o.require(rep.ok(), fmt("500 graphs x 5 protocols: %lld cases, %lld mismatches", static_cast<long long>(rep.cases),
                          static_cast<long long>(rep.failures)));
  for (const auto& e : rep.examples) o.note(e);
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 5

Outcome criterion5() {
  Outcome o;
  const double mu = 0.05;  // per ms: mean service 20 ticks keeps rounding small
  for (double rho : {0.2, 0.5, 0.8}) {
    const double lambda = rho * mu;
    const auto q = run_single_queue(lambda, mu, 200'000, 5);
    const double w = avg_wait(lambda, mu), n = avg_req(lambda, mu);
    const double ew = std::abs(q.mean_wait / w - 1), en = std::abs(q.mean_occupancy / n - 1);
    o.require(q.arrivals >= 100'000 && ew < 0.1 && en < 0.1,
              fmt("rho %.1f: wait %.3f vs %.3f ms (%.1f%%), occupancy %.4f vs %.4f (%.1f%%)", rho, q.mean_wait, w,
                  100 * ew, q.mean_occupancy, n, 100 * en));
  }
  Rng rng(77);
  int violations = 0;
  for (int k = 0; k < 10'000; ++k) {
    const LifetimeParams lp{rng.uniform(0.5, 10), rng.uniform(1e-4, 0.2), rng.uniform(1e-6, 1e-3),
                            rng.uniform(1e-5, 0.1), rng.uniform(1e-5, 1e-2)};
    const double m = rng.uniform(0.001, 1);
    const double l = rng.uniform(0.001, 0.99) * m;
    const QueueParams qp{l, m, rng.uniform(1e-6, 0.999) * (m - l)};
    if (!(lifetime_gain(lp) > 0)) ++violations;
    if (!(wait_gain(qp) > 0)) ++violations;
    if (!(occupancy_gain(qp) > 0)) ++violations;
  }
  o.require(violations == 0, fmt("lifetime, wait and occupancy gains positive over 10000 draws (%d violations)", violations));
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 6

Outcome criterion6() {
  Outcome o;
  const double r = 50;
  const std::pair<double, double> geometries[] = {{500, 500}, {1000, 300}, {800, 800}};
  std::uint64_t seed = 1;
  for (auto [x, y] : geometries) {
    for (double xi : {3.0, 5.0, 8.0}) {
      const int n = static_cast<int>(std::lround(xi * x * y / (std::numbers::pi * r * r)));
      const double closed = expected_hop_count(n, x, y, r);
      const auto mc = greedy_hop_count(n, x, y, r, 300, seed++);
      const double ratio = mc.mean_hops / closed;
      o.require(std::abs(ratio - 1) <= 0.25,
                fmt("%4.0fx%-4.0f xi=%.0f N=%d: greedy %.2f hops vs %.2f (ratio %.3f, %d pairs never connected)", x, y,
                    neighbor_density(n, x, y, r), n, mc.mean_hops, closed, ratio, mc.stuck));
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: the route s-x-w-u-d with the longer alternative s-p-i-j-k-d

const NodeId s(0), x(1), w(2), u(3), d(4), p(5), i(6), j(7), k(8);
const std::vector<Position> kPlaces{{0, 100},  {55, 130}, {110, 130}, {165, 130}, {220, 100},
                                    {40, 50},  {85, 30},  {135, 30},  {180, 50}};

TupleSymbols worked_symbols(Protocol proto) {
  TupleSymbols sym;
  const char* names[] = {"s", "x", "w", "u", "d", "p", "i", "j", "k"};
  for (std::uint32_t n = 0; n < 9; ++n) sym.nodes[NodeId(n)] = names[n];
  sym.positions.push_back({kPlaces[0], "(X_s(100), Y_s(100))"});
  sym.delays[w] = "β_w";
  sym.protocol = proto;
  return sym;
}

NodeView view(NodeId id, double residual_j, double packet_j) {
  NodeView v;
  v.id = id;
  v.location = kPlaces[id.value];
  v.residual_energy = residual_j;
  v.packet_energy = packet_j;
  v.min_receive_power = 100;
  v.radio_range = 70;
  return v;
}

std::vector<std::string> worked_chain(Protocol proto, NodeView vs, NodeView vp, NodeView vi) {
  auto ctx = [&](NodeId from, SimTime now) {
    ForwardContext c;
    c.protocol = proto;
    c.max_hop_count = 9;
    c.now = now;
    c.ttl = 100;
    c.issued_at = 100;
    c.predecessor = from;
    c.predecessor_location = kPlaces[from.value];
    return c;
  };
  RreqTable tp, ti;
  const Rreq r0 = originate_rreq(proto, vs, d, 3, 5, 100);
  const auto r1 = forward_rreq(r0, vp, ctx(s, 104), tp);
  const auto r2 = forward_rreq(r1.out, vi, ctx(p, 108), ti);
  const auto sym = worked_symbols(proto);
  if (r1.reason != DropReason::None || r2.reason != DropReason::None) return {"dropped"};
  return {format_tuple(r0, sym), format_tuple(r1.out, sym), format_tuple(r2.out, sym)};
}

struct ScriptedRun {
  MetricsReport report;
  std::vector<TraceLine> trace;
};

// u drifts out of w's range while the session is live.
ScriptedRun worked_topology() {
  ScenarioConfig c;
  c.node_count = 9;
  c.area_x = 300;
  c.area_y = 300;
  c.sim_time = 3000;
  c.cbr_gap_factor = 30;
  c.protocol = Protocol::AODV;
  c.variant = Variant::MinusHello;
  Script sc;
  using K = ScriptedMobility::Keyframe;
  std::vector<std::vector<K>> paths;
  for (const auto& at : kPlaces) paths.push_back({K{0, at}});
  paths[u.value] = {K{0, kPlaces[u.value]}, K{1300, {200, 150}}};
  sc.mobility = std::make_shared<ScriptedMobility>(paths);
  sc.radio_ranges.assign(9, 70.0);
  sc.energies.assign(9, 10.0);
  sc.tx_powers.assign(9, 400.0);
  sc.rx_powers.assign(9, 100.0);
  sc.random_sessions = false;
  sc.sessions.push_back({100, s, d, 5, 3});
  Simulator sim(c, sc);
  sim.set_trace_symbols(worked_symbols(Protocol::AODV));
  sim.keep_trace(true);
  ScriptedRun out;
  out.report = sim.run();
  out.trace = sim.trace();
  return out;
}

const TraceLine* find_line(const std::vector<TraceLine>& t, const std::string& kind, const std::string& needle = "") {
  for (const auto& l : t) {
    if (l.kind == kind && l.detail.find(needle) != std::string::npos) return &l;
  }
  return nullptr;
}

Outcome criterion7(const ScriptedRun& run) {
  Outcome o;
  auto expect = [&](const std::vector<std::string>& got, const std::vector<std::string>& want, const char* what) {
    const bool ok = got == want;
    o.require(ok, what);
    for (std::size_t n = 0; n < want.size(); ++n) o.note(n < got.size() ? got[n] : "(missing)");
  };
  const std::string head = "<1, s, (X_s(100), Y_s(100)), d, 3, 5, s, 0, ";
  expect(worked_chain(Protocol::AODV, view(s, 5, 0.01), view(p, 5, 0.01), view(i, 5, 0.01)),
         {head + "null, 100>", head + "p, 104>", head + "p, i, 108>"}, "AODV request from s through p and i");
  expect(worked_chain(Protocol::MMBCR, view(s, 4, 0.01), view(p, 2, 0.01), view(i, 5, 0.01)),
         {head + "null, 100, 4>", head + "p, 104, 2>", head + "p, i, 108, 2>"}, "MMBCR residual energy 4 J -> 2 J");
  expect(worked_chain(Protocol::MRPC, view(s, 4, 0.004), view(p, 2, 0.02), view(i, 5, 0.01)),
         {head + "null, 100, 1000>", head + "p, 104, 100>", head + "p, i, 108, 100>"},
         "MRPC packet capacity 1000 -> 100");
  const auto sym = worked_symbols(Protocol::AODV);
  const SessionKey key{s, d, 3};
  expect({format_tuple(make_link_fail(key, u, w), sym), format_tuple(make_repair_request(key, 130, w, 5), sym)},
         {"<4, s, d, u, w, 3>", "<5, s, d, 3, 130, w, β_w>"}, "link-fail and repair-request at t = 130");

  // Same messages out of the engine on the scripted topology.
  const auto* origin = find_line(run.trace, "tx", "rreq to=* " + head + "null, 100>");
  o.require(origin != nullptr, "engine: s broadcasts " + head + "null, 100>");
  const auto* chosen = find_line(run.trace, "route_selected");
  o.require(chosen && chosen->detail == "0-1-2-3-4",
            "engine: d picks the 4-hop route s-x-w-u-d over s-p-i-j-k-d" +
                (chosen ? " (" + chosen->detail + ")" : std::string(" (none)")));
  const auto* lf = find_line(run.trace, "tx", "link_fail to=2 <4, s, d, u, w, 3>");
  o.require(lf != nullptr, "engine: u sends <4, s, d, u, w, 3> to w");
  const auto* rr = find_line(run.trace, "tx", "repair_request to=1 <5, s, d, 3, ");
  const bool rr_ok = rr && rr->detail.ends_with(", w, β_w>");
  o.require(rr_ok, "engine: w sends <5, s, d, 3, t, w, β_w>" + (rr ? " as " + rr->detail.substr(rr->detail.find('<')) : ""));
  return o;
}

Outcome criterion8(const ScriptedRun& run) {
  Outcome o;
  using R = RepairArbiter::Request;
  {
    RepairArbiter a;
    a.submit(R{w, 2, 130, 5, 128});
    a.submit(R{x, 1, 130, 3, 128});
    const auto g = a.decide(130);
    o.require(g == std::vector<NodeId>{x}, "case 1: simultaneous requests from x and w, only x granted");
  }
  {
    RepairArbiter a;
    a.submit(R{x, 1, 130, 3, 128});
    const auto g1 = a.decide(130);
    a.submit(R{w, 2, 136, 5, 128});
    const auto g2 = a.decide(136);
    o.require(g1 == std::vector<NodeId>{x} && g2.empty(), "case 2: x first, then w; w refused");
  }
  {
    RepairArbiter a;
    a.submit(R{w, 2, 130, 5, 128});
    const auto g1 = a.decide(130);
    a.submit(R{x, 1, 145, 3, 140});
    const auto g2 = a.decide(145);
    o.require(g1 == std::vector<NodeId>{w} && g2.empty() && a.grants().size() == 1,
              "case 3: t_w=130, beta_w=5, t_x=145 > 140, only w holds permission");
  }
  {
    RepairArbiter a;
    a.submit(R{w, 2, 130, 10, 128});
    const auto g1 = a.decide(130);
    a.submit(R{x, 1, 145, 3, 140});
    const auto g2 = a.decide(145);
    o.require(g1 == std::vector<NodeId>{w} && g2 == std::vector<NodeId>{x} && a.grants().size() == 2,
              "case 3: t_w=130, beta_w=10, t_x=145 <= 150, x granted as well");
  }
  {
    RepairArbiter a;
    a.submit(R{w, 2, 130, 5, 128});
    a.decide(130);
    o.require(a.rediscovery_deadline(20, 100) == SimTime{130 + 20 + 200}, "case 4: deadline = t + delRoute + 2 TTL = 350");
  }
  // Case 4 in the engine: w's directional repair cannot reach d, so s rediscovers.
  const auto* grant = find_line(run.trace, "repair_grant", "grantee=2");
  const auto* deadline = find_line(run.trace, "repair_deadline");
  const auto* redo = find_line(run.trace, "rediscover");
  bool ok = grant && deadline && redo;
  std::string detail = "engine: missing grant, deadline or rediscovery";
  if (ok) {
    const auto del = std::stoll(deadline->detail.substr(deadline->detail.find("del_route=") + 10));
    const SimTime want = grant->time + del + 2 * ScenarioConfig{}.ttl;
    ok = redo->time == want && find_line(run.trace, "tx", "repair_rreq to=* <2, s, (X_s(100), Y_s(100)), d, 3, ") &&
         run.report.delivered == run.report.offered;
    detail = fmt("engine: grant to w at %lld, delRoute %lld, rediscovery at %lld (expected %lld), %lld/%lld delivered",
                 static_cast<long long>(grant->time), static_cast<long long>(del), static_cast<long long>(redo->time),
                 static_cast<long long>(want), static_cast<long long>(run.report.delivered),
                 static_cast<long long>(run.report.offered));
  }
  o.require(ok, detail);
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 10

StaticTopology topology(std::vector<Position> at, double range) {
  StaticTopology t;
  t.positions = std::move(at);
  t.radios.assign(t.positions.size(), RadioProfile{range, 100, 400});
  return t;
}

LocationLookup lookup_of(const StaticTopology& t) {
  return [&t](NodeId n) -> std::optional<KnownNode> {
    if (n.value >= t.positions.size()) return std::nullopt;
    return KnownNode{t.positions[n.value], t.radios[n.value].radio_range};
  };
}

// Does transmitting self -> rx collide with any ongoing unicast, by geometry?
bool conflicts(const StaticTopology& t, NodeId self, NodeId rx, const std::vector<OngoingTransmission>& ongoing) {
  for (const auto& g : ongoing) {
    if (g.sender == self || g.sender == rx || g.receiver == self || g.receiver == rx) return true;
    if (t.hears(g.sender, rx) || t.hears(self, g.receiver)) return true;
  }
  return false;
}

Outcome criterion10() {
  Outcome o;
  DetectionCost cost;
  cost.hello_rounds = 2;
  cost.budget = BitBudget::from({60, 500, 500, 50, 100, 30'000, 10});
  const NodeId a(0), b(1), c(2), dd(3);

  const auto fig1 = topology({{0, 0}, {60, 0}, {120, 0}}, 70);
  const auto h1 = detect_hidden_terminals(fig1, b, DetectionMode::Classical, cost);
  const auto h2 = detect_hidden_terminals(fig1, b, DetectionMode::MinusHello, cost);
  const std::set<std::pair<NodeId, NodeId>> ac{{a, c}};
  o.require(h1.hidden == ac && h2.hidden == ac, "triangle: b reports (a, c) hidden in both modes");
  o.note(fmt("detection energy: classical %.3g J, -HELLO %.3g J", h1.energy_joules, h2.energy_joules));

  const auto fig2 = topology({{0, 0}, {60, 0}, {120, 0}, {180, 0}}, 70);
  const KnownNode self_c{fig2.positions[2], 70};
  const auto dec = detect_exposed_transmission(c, self_c, dd, {{b, a}}, lookup_of(fig2));
  o.require(dec == ExposedDecision::Proceed, "chain: c -> d proceeds while b -> a is live");

  const auto clique = topology({{0, 0}, {40, 0}, {0, 40}, {40, 40}, {20, 20}}, 70);
  bool no_hidden = true, exact = true;
  for (std::uint32_t n = 0; n < 5; ++n) {
    no_hidden = no_hidden && detect_hidden_terminals(clique, NodeId(n), DetectionMode::MinusHello, cost).hidden.empty();
  }
  int deferrals = 0, idle_deferrals = 0;
  for (std::uint32_t me = 0; me < 5; ++me) {
    for (std::uint32_t rx = 0; rx < 5; ++rx) {
      if (rx == me) continue;
      const KnownNode info{clique.positions[me], 70};
      if (detect_exposed_transmission(NodeId(me), info, NodeId(rx), {}, lookup_of(clique)) != ExposedDecision::Proceed) {
        ++idle_deferrals;
      }
      for (std::uint32_t gs = 0; gs < 5; ++gs) {
        for (std::uint32_t gr = 0; gr < 5; ++gr) {
          if (gs == gr) continue;
          const std::vector<OngoingTransmission> on{{NodeId(gs), NodeId(gr)}};
          const bool defer = detect_exposed_transmission(NodeId(me), info, NodeId(rx), on, lookup_of(clique)) ==
                             ExposedDecision::Defer;
          deferrals += defer;
          if (defer != conflicts(clique, NodeId(me), NodeId(rx), on)) exact = false;
        }
      }
    }
  }
  o.require(no_hidden, "clique: no hidden pairs at any node");
  o.require(exact && idle_deferrals == 0,
            fmt("clique: %d deferrals, all on real conflicts; %d deferrals with an idle medium", deferrals, idle_deferrals));

  // Random topologies: every Defer matches a geometric conflict and every
  // reported hidden pair is a pair of neighbours that cannot hear each other.
  Rng rng(10);
  int false_defer = 0, missed = 0, bad_hidden = 0, cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Position> at;
    for (int n = 0; n < 8; ++n) at.push_back({rng.uniform(0, 200), rng.uniform(0, 200)});
    const auto t = topology(at, 70);
    const auto me = NodeId(static_cast<std::uint32_t>(rng.below(8)));
    const auto found = detect_hidden_terminals(t, me, DetectionMode::MinusHello, cost).hidden;
    std::set<std::pair<NodeId, NodeId>> expected;
    for (NodeId m : t.neighbors(me)) {
      for (NodeId q : t.neighbors(me)) {
        if (m < q && (!t.hears(m, q) || !t.hears(q, m))) expected.insert({m, q});
      }
    }
    if (found != expected) ++bad_hidden;
    const auto nb = t.neighbors(me);
    if (nb.empty()) continue;
    const NodeId rx = nb[rng.below(nb.size())];
    const auto gs = NodeId(static_cast<std::uint32_t>(rng.below(8)));
    const auto gn = t.neighbors(gs);
    if (gn.empty() || gs == me) continue;
    const std::vector<OngoingTransmission> on{{gs, gn[rng.below(gn.size())]}};
    const bool defer = detect_exposed_transmission(me, {t.positions[me.value], 70}, rx, on, lookup_of(t)) ==
                       ExposedDecision::Defer;
    const bool truth = conflicts(t, me, rx, on);
    ++cases;
    if (defer && !truth) ++false_defer;
    if (!defer && truth) ++missed;
  }
  o.require(false_defer == 0 && missed == 0 && bad_hidden == 0,
            fmt("random topologies: %d decisions, %d false deferrals, %d missed conflicts, %d wrong hidden pairs", cases,
                false_defer, missed, bad_hidden));
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  SweepData sweep;
  bool swept = false;
  auto sweep_once = [&]() -> const SweepData& {
    if (!swept) {
      sweep = node_sweep();
      swept = true;
    }
    return sweep;
  };
  ScriptedRun scripted;
  bool scripted_done = false;
  auto scripted_once = [&]() -> const ScriptedRun& {
    if (!scripted_done) {
      scripted = worked_topology();
      scripted_done = true;
    }
    return scripted;
  };

  criteria.emplace_back("1 -HELLO uses less energy at 60 nodes", [&] { return criterion1(sweep_once()); });
  criteria.emplace_back("2 lifetime, delay, throughput and throughput shape", [&] { return criterion2(sweep_once()); });
  criteria.emplace_back("3 message-size inequalities", criterion3);
  criteria.emplace_back("4 route selection equals enumeration", criterion4);
  criteria.emplace_back("5 queueing closed forms", criterion5);
  criteria.emplace_back("6 hop-count estimate", criterion6);
  criteria.emplace_back("7 worked message traces", [&] { return criterion7(scripted_once()); });
  criteria.emplace_back("8 repair arbitration cases", [&] { return criterion8(scripted_once()); });
  criteria.emplace_back("9 invariants on every sweep run", [&] { return criterion9(sweep_once()); });
  criteria.emplace_back("10 hidden and exposed terminals", criterion10);

  std::vector<std::pair<std::string, Outcome>> results;
  for (auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.note(fmt("%.1f s", secs));
    results.emplace_back(name, std::move(out));
  }
  if (swept) std::printf("sweep: %zu runs twice in %.1f s\n\n", sweep.result.runs.size(), sweep.seconds);

  int failed = 0;
  for (const auto& [name, out] : results) {
    std::printf("%s  criterion %s\n", out.pass ? "PASS" : "FAIL", name.c_str());
    failed += !out.pass;
  }
  std::printf("\n");
  for (const auto& [name, out] : results) {
    std::printf("criterion %s\n", name.c_str());
    for (const auto& n : out.notes) std::printf("%s\n", n.c_str());
  }
  std::printf("\n%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
