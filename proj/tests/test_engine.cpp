#include <doctest.h>

#include <cmath>

#include "manet/engine.hpp"
#include "manet/analytics.hpp"

using namespace manet;

namespace {

ScenarioConfig small(Protocol p, Variant v, std::uint64_t seed) {
  ScenarioConfig c;
  c.node_count = 20;
  c.sim_time = 10'000;
  c.protocol = p;
  c.variant = v;
  c.rng_seed = seed;
  return c;
}

void check_invariants(const MetricsReport& r) {
  CHECK(r.loop_violations == 0);
  CHECK(r.dead_node_transmissions == 0);
  CHECK(r.causality_violations == 0);
  CHECK(r.energy_ledger_mismatches == 0);
  CHECK(r.conservation_mismatch == 0);
  CHECK(r.offered == r.delivered + r.in_flight + r.dropped_queue + r.lost_collision + r.lost_dead_route);
  CHECK(r.energy_total == doctest::Approx(r.energy_tx + r.energy_rx + r.energy_hello));
}

}  // namespace

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  q.push(5, 1);
  q.push(3, 2);
  q.push(5, 3);
  q.push(3, 4);
  std::vector<std::uint32_t> kinds;
  while (!q.empty()) kinds.push_back(q.pop().kind);
  CHECK(kinds == std::vector<std::uint32_t>{2, 4, 1, 3});
}

TEST_CASE("message queue capacity") {
  MessageQueue<int> q(2);
  CHECK(q.push(1));
  CHECK(q.push(2));
  CHECK_FALSE(q.push(3));
  CHECK(q.overflows() == 1);
  CHECK(q.pop() == 1);
}

TEST_CASE("runs are deterministic and keep their invariants") {
  for (Protocol p : kAllProtocols) {
    for (Variant v : {Variant::Classical, Variant::MinusHello}) {
      const auto a = run_scenario(small(p, v, 4));
      const auto b = run_scenario(small(p, v, 4));
      CAPTURE(to_string(p));
      CAPTURE(to_string(v));
      CHECK(a.to_json() == b.to_json());
      check_invariants(a);
      CHECK(a.offered > 0);
    }
  }
}

TEST_CASE("HELLO counts follow the variant") {
  const auto classical = run_scenario(small(Protocol::AODV, Variant::Classical, 2));
  const auto minus = run_scenario(small(Protocol::AODV, Variant::MinusHello, 2));
  CHECK(minus.hello_issued == 0);
  CHECK(minus.hello_sent == 0);
  CHECK(minus.energy_hello < classical.energy_hello);
  CHECK(classical.hello_issued > 0);
  // one HELLO per interval per node while it lives
  std::int64_t expected = 0;
  for (SimTime death : classical.death_times) {
    const SimTime alive = death < 0 ? classical.sim_time : death;
    expected += alive / 10;
  }
  const auto n = static_cast<std::int64_t>(classical.death_times.size());
  CHECK(std::llabs(classical.hello_issued - expected) <= n);
  CHECK(minus.energy_total < classical.energy_total);
}

TEST_CASE("no sessions: throughput not applicable") {
  ScenarioConfig c = small(Protocol::AODV, Variant::Classical, 1);
  c.session_arrival_rate = 0.0;
  const auto r = run_scenario(c);
  CHECK(r.offered == 0);
  CHECK_FALSE(r.throughput.has_value());
  CHECK(r.energy_tx == 0.0);
  CHECK(r.energy_hello > 0.0);
  c.variant = Variant::MinusHello;
  const auto m = run_scenario(c);
  CHECK(m.energy_total == 0.0);
  CHECK(m.rreq_sent == 0);
  CHECK(m.proactive_ack_sent == 0);
}

TEST_CASE("hidden senders collide at the middle node") {
  ScenarioConfig c;
  c.node_count = 3;
  c.area_x = 200;
  c.area_y = 50;
  c.sim_time = 500;
  c.carrier_sense_factor = 1.0;
  Script sc;
  sc.mobility = ScriptedMobility::fixed({{0, 0}, {60, 0}, {120, 0}});
  sc.radio_ranges.assign(3, 70.0);
  sc.energies.assign(3, 10.0);
  sc.tx_powers.assign(3, 400.0);
  sc.rx_powers.assign(3, 100.0);
  sc.random_sessions = false;
  sc.sessions.push_back({100, NodeId(0), NodeId(1), 1});
  sc.sessions.push_back({100, NodeId(2), NodeId(1), 1});
  Simulator sim(c, sc);
  sim.keep_trace(true);
  const auto r = sim.run();
  CHECK(r.collisions > 0);
  check_invariants(r);
}

TEST_CASE("out of range receiver hears nothing") {
  ScenarioConfig c;
  c.node_count = 2;
  c.area_x = 200;
  c.area_y = 50;
  c.sim_time = 2000;
  Script sc;
  sc.mobility = ScriptedMobility::fixed({{0, 0}, {71, 0}});
  sc.radio_ranges.assign(2, 70.0);
  sc.energies.assign(2, 10.0);
  sc.tx_powers.assign(2, 400.0);
  sc.rx_powers.assign(2, 100.0);
  sc.random_sessions = false;
  sc.sessions.push_back({100, NodeId(0), NodeId(1), 2});
  const auto r = Simulator(c, sc).run();
  CHECK(r.delivered == 0);
  CHECK(r.energy_rx == 0.0);

  sc.mobility = ScriptedMobility::fixed({{0, 0}, {69, 0}});
  const auto ok = Simulator(c, sc).run();
  CHECK(ok.delivered == 2);
}

TEST_CASE("dead nodes stay silent") {
  ScenarioConfig c = small(Protocol::MMBCR, Variant::Classical, 6);
  c.initial_energy_range = {0.5, 0.8};
  const auto r = run_scenario(c);
  CHECK(r.dead_nodes > 0);
  CHECK_FALSE(r.death_censored);
  CHECK(r.first_node_death < r.sim_time);
  check_invariants(r);
}

TEST_CASE("single queue against the closed forms") {
  for (double rho : {0.2, 0.5, 0.8}) {
    const double mu = 0.05;
    const auto q = run_single_queue(rho * mu, mu, 100'000, 7);
    CAPTURE(rho);
    CHECK(q.arrivals == 100'000);
    CHECK(std::abs(q.mean_wait / avg_wait(rho * mu, mu) - 1) < 0.1);
    CHECK(std::abs(q.mean_occupancy / avg_req(rho * mu, mu) - 1) < 0.1);
  }
}
