#include "manet/engine.hpp"

#include <json.hpp>

#include "manet/rng.hpp"

namespace manet {

void EventQueue::push(SimTime time, std::uint32_t kind, std::uint32_t node, std::uint64_t a, std::uint64_t b) {
  heap_.push(Event{time, next_seq_++, kind, node, a, b});
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["protocol"] = protocol;
  j["variant"] = variant;
  j["seed"] = seed;
  j["node_count"] = node_count;
  j["sim_time_ms"] = sim_time;
  j["energy"] = {{"total_j", energy_total},   {"tx_j", energy_tx},       {"rx_j", energy_rx},
                 {"hello_j", energy_hello},   {"saved_j", energy_saved}, {"per_node_j", energy_per_node}};
  j["lifetime"] = {{"first_node_death_ms", first_node_death},
                   {"death_censored", death_censored},
                   {"partition_ms", partition_time},
                   {"partition_censored", partition_censored},
                   {"dead_nodes", dead_nodes},
                   {"death_times_ms", death_times}};
  j["delay"] = {{"mean_ms", mean_delay}, {"samples", delay_samples}};
  nlohmann::ordered_json packets = {{"offered", offered},
                                    {"delivered", delivered},
                                    {"in_flight", in_flight},
                                    {"dropped_queue", dropped_queue},
                                    {"lost_collision", lost_collision},
                                    {"lost_dead_route", lost_dead_route}};
  if (throughput) {
    packets["throughput"] = *throughput;
  } else {
    packets["throughput"] = nullptr;
  }
  j["packets"] = packets;
  j["counters"] = {{"sessions", sessions},
                   {"sessions_completed", sessions_completed},
                   {"rreq", rreq_sent},
                   {"rrep", rrep_sent},
                   {"hello_issued", hello_issued},
                   {"hello", hello_sent},
                   {"neighbor_ack", neighbor_ack_sent},
                   {"proactive_ack", proactive_ack_sent},
                   {"link_fail", link_fail_sent},
                   {"repair_request", repair_request_sent},
                   {"repair_permission", repair_permission_sent},
                   {"neighbor_info", neighbor_info_sent},
                   {"data", data_sent},
                   {"data_ack", data_ack_sent},
                   {"discoveries", discoveries},
                   {"repairs_granted", repairs_granted},
                   {"repairs_denied", repairs_denied},
                   {"source_rediscoveries", source_rediscoveries},
                   {"queue_drops", queue_drops},
                   {"collisions", collisions},
                   {"exposed_proceeds", exposed_proceeds}};
  j["invariants"] = {{"loop_violations", loop_violations},
                     {"dead_node_transmissions", dead_node_transmissions},
                     {"causality_violations", causality_violations},
                     {"energy_ledger_mismatches", energy_ledger_mismatches},
                     {"conservation_mismatch", conservation_mismatch}};
  j["calibration"] = {{"medium_constant_C", medium_constant_C},
                      {"mw_per_friis_unit_min", calibration_min},
                      {"mw_per_friis_unit_max", calibration_max}};
  return j.dump(2);
}

MetricsReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Simulator sim(cfg);
  return sim.run();
}

QueueRunResult run_single_queue(double lambda, double mu, std::int64_t arrivals, std::uint64_t seed) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw InvalidParameter("rates must be positive");
  if (lambda >= mu) throw InvalidParameter("unstable queue: lambda must be below mu");
  enum : std::uint32_t { kArrival, kDeparture };

  Rng arrivals_rng = Rng::substream(seed, 1);
  Rng service_rng = Rng::substream(seed, 2);
  auto draw = [](Rng& r, double rate) { return static_cast<SimTime>(std::llround(r.exponential(rate))); };

  EventQueue events;
  MessageQueue<SimTime> queue(static_cast<std::size_t>(arrivals) + 1);
  QueueRunResult res;
  bool busy = false;
  SimTime last_change = 0;
  double area = 0.0;  // integral of the waiting count over time
  double wait_sum = 0.0;
  SimTime now = 0;

  events.push(draw(arrivals_rng, lambda), kArrival);
  while (!events.empty()) {
    const Event e = events.pop();
    now = e.time;
    area += static_cast<double>(queue.size()) * static_cast<double>(now - last_change);
    last_change = now;
    if (e.kind == kArrival) {
      ++res.arrivals;
      if (!busy) {
        busy = true;
        events.push(now + draw(service_rng, mu), kDeparture);
      } else {
        queue.push(now);
      }
      if (res.arrivals < arrivals) events.push(now + draw(arrivals_rng, lambda), kArrival);
    } else {
      ++res.served;
      if (queue.empty()) {
        busy = false;
      } else {
        wait_sum += static_cast<double>(now - queue.pop());
        events.push(now + draw(service_rng, mu), kDeparture);
      }
    }
  }
  res.overflows = static_cast<std::int64_t>(queue.overflows());
  res.mean_wait = wait_sum / static_cast<double>(res.served);
  res.mean_occupancy = now > 0 ? area / static_cast<double>(now) : 0.0;
  return res;
}

}  // namespace manet
