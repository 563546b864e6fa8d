// Discrete-event engine: event queue, bounded FIFO message queues, a disk
// broadcast medium with receiver-local collisions, node liveness, and the
// per-run metrics report.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "manet/core.hpp"
#include "manet/energy.hpp"
#include "manet/messages.hpp"
#include "manet/mobility.hpp"

namespace manet {

// ---------------------------------------------------------------------------
// Event queue

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;
  std::uint32_t kind = 0;
  std::uint32_t node = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

/// Min-queue ordered by (time, insertion sequence).
class EventQueue {
 public:
  void push(SimTime time, std::uint32_t kind, std::uint32_t node = 0, std::uint64_t a = 0, std::uint64_t b = 0);
  Event pop();
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }
  [[nodiscard]] SimTime next_time() const { return heap_.top().time; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// FIFO with a hard capacity, mq(i). Overflowing pushes are refused and counted.
template <typename T>
class MessageQueue {
 public:
  explicit MessageQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(T v) {
    if (items_.size() >= capacity_) {
      ++overflows_;
      return false;
    }
    items_.push_back(std::move(v));
    return true;
  }
  void push_front(T v) { items_.push_front(std::move(v)); }
  T pop() {
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }
  [[nodiscard]] T& front() { return items_.front(); }
  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::uint64_t overflows() const { return overflows_; }
  std::deque<T>& items() { return items_; }
  void clear() { items_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  std::uint64_t overflows_ = 0;
};

// ---------------------------------------------------------------------------
// Metrics

struct MetricsReport {
  std::string protocol;
  std::string variant;
  std::uint64_t seed = 0;
  int node_count = 0;
  SimTime sim_time = 0;

  // Energy, joules.
  double energy_total = 0.0;
  double energy_tx = 0.0;
  double energy_rx = 0.0;
  double energy_hello = 0.0;  // neighbour upkeep: HELLOs, their ACKs, RREQ-ACKs, proactive ACKs
  double energy_saved = 0.0;  // draw avoided by power-optimised unicasts
  std::vector<double> energy_per_node;

  // Lifetime, ms. first_node_death equals sim_time when nobody died.
  SimTime first_node_death = 0;
  bool death_censored = true;
  SimTime partition_time = 0;  // sim_time when the network never split
  bool partition_censored = true;
  int dead_nodes = 0;
  std::vector<SimTime> death_times;  // per node, -1 while alive

  // Delay, ms: first packet sent to last packet delivered, per complete session.
  double mean_delay = 0.0;
  int delay_samples = 0;

  // Packets.
  std::int64_t offered = 0;
  std::int64_t delivered = 0;
  std::int64_t in_flight = 0;
  std::int64_t dropped_queue = 0;
  std::int64_t lost_collision = 0;
  std::int64_t lost_dead_route = 0;
  std::optional<double> throughput;  // delivered / offered; empty with no load

  // Traffic and protocol counters.
  std::int64_t sessions = 0;
  std::int64_t sessions_completed = 0;
  std::int64_t rreq_sent = 0;
  std::int64_t rrep_sent = 0;
  std::int64_t hello_issued = 0;  // one per interval per live node (classical)
  std::int64_t hello_sent = 0;    // actually put on the air; a stale queued HELLO is refreshed, not duplicated
  std::int64_t neighbor_ack_sent = 0;
  std::int64_t proactive_ack_sent = 0;
  std::int64_t link_fail_sent = 0;
  std::int64_t repair_request_sent = 0;
  std::int64_t repair_permission_sent = 0;
  std::int64_t neighbor_info_sent = 0;
  std::int64_t data_sent = 0;
  std::int64_t data_ack_sent = 0;
  std::int64_t discoveries = 0;
  std::int64_t repairs_granted = 0;
  std::int64_t repairs_denied = 0;
  std::int64_t source_rediscoveries = 0;
  std::int64_t queue_drops = 0;
  std::int64_t collisions = 0;
  std::int64_t exposed_proceeds = 0;

  // Invariant monitors; all zero in a correct run.
  std::int64_t loop_violations = 0;
  std::int64_t dead_node_transmissions = 0;
  std::int64_t causality_violations = 0;
  std::int64_t energy_ledger_mismatches = 0;
  std::int64_t conservation_mismatch = 0;  // offered minus every outcome bucket

  // Power calibration: milliwatts per Friis unit across nodes.
  double medium_constant_C = 1.0;
  double calibration_min = 0.0;
  double calibration_max = 0.0;

  /// Stable JSON rendering; identical reports give identical strings.
  [[nodiscard]] std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Scripted scenarios

/// Deterministic overrides for hand-built topologies. Any vector left empty
/// falls back to the random draw; a non-empty one must have node_count entries.
struct Script {
  struct Session {
    SimTime at = 0;
    NodeId source;
    NodeId destination;
    int packets = 1;
    std::uint32_t session_id = 0;  // 0 numbers sessions per (source, destination) from 1
  };

  std::shared_ptr<MobilityModel> mobility;
  std::vector<double> energies;      // J
  std::vector<double> radio_ranges;  // m
  std::vector<double> tx_powers;     // mW
  std::vector<double> rx_powers;     // mW
  std::vector<Session> sessions;
  bool random_sessions = true;
  /// Nodes whose batteries are emptied at the given time.
  std::vector<std::pair<SimTime, NodeId>> failures;
};

struct TraceLine {
  SimTime time = 0;
  std::string kind;
  NodeId node;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Simulator

class Simulator {
 public:
  explicit Simulator(ScenarioConfig cfg, Script script = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Writes `time\tkind\tnode\tdetail` lines while running.
  void set_trace(std::ostream* out);
  /// Also keeps trace lines in memory for inspection.
  void keep_trace(bool on);
  /// Node and position names used when trace lines print message tuples.
  void set_trace_symbols(TupleSymbols symbols);
  [[nodiscard]] const std::vector<TraceLine>& trace() const;

  MetricsReport run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Validates the config and runs one scenario.
MetricsReport run_scenario(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Single-queue conformance run

struct QueueRunResult {
  double mean_wait = 0.0;       // ms spent queued before service
  double mean_occupancy = 0.0;  // time-averaged number waiting (excluding the one in service)
  std::int64_t arrivals = 0;
  std::int64_t served = 0;
  std::int64_t overflows = 0;
};

/// One node with Poisson arrivals (rate lambda per ms), exponential service
/// (rate mu per ms) and an unbounded queue, driven by the engine's
/// EventQueue and MessageQueue.
QueueRunResult run_single_queue(double lambda, double mu, std::int64_t arrivals, std::uint64_t seed);

}  // namespace manet
