#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <variant>

#include "manet/engine.hpp"
#include "manet/messages.hpp"
#include "manet/protocols.hpp"
#include "manet/rng.hpp"

namespace manet {

namespace {

enum Ev : std::uint32_t {
  kBackoff,
  kTxEnd,
  kAckTimeout,
  kHelloTick,
  kProactiveTick,
  kSessionArrival,
  kScriptedSession,
  kCbr,
  kDestWindow,
  kDiscoveryTimeout,
  kRepairDeadline,
  kArbiterDecide,
  kBufferTimeout,
  kPartitionCheck,
  kFailure,
};

enum class PState { AtSource, InTransit, Buffered, Delivered, DroppedQueue, LostCollision, LostDeadRoute };
constexpr int kStateCount = 7;
bool is_terminal(PState s) { return s >= PState::Delivered; }

struct Packet {
  std::uint32_t session = 0;
  int seq = 1;
  NodeId holder;
  PState state = PState::AtSource;
  SimTime sent_at = -1;
};

using Path = std::shared_ptr<const std::vector<NodeId>>;

struct Frame {
  ControlMessage msg;
  MessageType type = MessageType::Data;
  NodeId link_dest = kNoNode;  // kNoNode: broadcast
  SimTime airtime = 1;
  SimTime issued_at = 0;
  std::int64_t packet = -1;
  std::uint32_t session = 0;
  Path path;
  int direction = 0;
  NodeId target = kNoNode;
  std::uint64_t uid = 0;
  int attempts = 0;
  bool optimize = false;
  SimTime first_tx = -1;
  bool is_ack = false;
  std::uint64_t ack_uid = 0;
};
using FramePtr = std::shared_ptr<Frame>;

struct Transmission {
  FramePtr frame;
  NodeId sender;
  std::vector<std::pair<std::uint32_t, bool>> receivers;  // node, collided
  std::vector<std::uint32_t> sensers;
};

struct Known {
  Position pos;
  SimTime t = -1;
  Position prev;
  SimTime prev_t = -1;
  double range = 0.0;
};

struct Relay {
  NodeId predecessor = kNoNode;
  NodeId successor = kNoNode;
  SimTime beta = 0;
  bool have_beta = false;
  int forwarded = 0;
  bool broken = false;
  SimTime repair_requested_at = -1;
  std::vector<std::int64_t> buffer;
  std::uint64_t buffer_token = 0;
  Path path;
  Path override_path;
  std::optional<Position> dest_location;
  SimTime last_data = -1;
};

enum class Mac { Idle, Backoff, Tx, AwaitAck };

struct Node {
  NodeId id;
  RadioProfile radio;
  Battery battery;
  bool alive = true;
  SimTime death = -1;
  Rng rng{0};
  MessageQueue<FramePtr> queue{0};
  Mac mac = Mac::Idle;
  std::uint64_t mac_token = 0;
  FramePtr current;
  bool transmitting = false;
  std::vector<std::uint32_t> incoming;  // decodable transmissions in progress
  std::vector<std::uint32_t> sensed;    // every transmission raising carrier sense
  DownlinkNeighborTable neighbors;
  std::unordered_map<std::uint32_t, Known> known;
  std::unordered_map<std::uint32_t, SimTime> heard;
  RreqTable rreqs;
  std::set<std::tuple<std::uint32_t, std::uint32_t, SimTime>> rrep_seen;
  std::map<std::tuple<std::uint32_t, int, std::uint32_t, SimTime>, std::size_t> groups;
  std::map<std::uint32_t, Relay> relays;
  std::map<std::uint32_t, std::map<std::uint32_t, SimTime>> prolinks;  // predecessor -> session -> last data
  std::set<std::pair<std::uint32_t, std::uint32_t>> link_fail_sent;
  bool proactive_running = false;
  bool hello_pending = false;
  std::int64_t drawn_nj = 0;
};

enum class Phase { Discovering, Active, Repairing, Done, Failed };

struct SessionState {
  SessionKey key;
  int total = 0;
  std::vector<std::int64_t> packets;
  std::deque<int> unsent;
  Path path;
  Phase phase = Phase::Discovering;
  int discoveries = 0;
  bool discovering = false;
  std::uint64_t discovery_token = 0;
  std::uint64_t repair_token = 0;
  std::uint64_t cbr_token = 0;
  bool cbr_running = false;
  SimTime first_sent = -1;
  SimTime last_delivery = -1;
  int delivered = 0;
  int resolved = 0;
  SimTime del_route = -1;
  RepairArbiter arbiter;
  bool decide_pending = false;
  bool neighbor_info_sent = false;
};

struct DestGroup {
  NodeId node;
  std::uint32_t session = 0;
  std::vector<Candidate> candidates;
};

EnergyCategory category_of(MessageType t) {
  switch (t) {
    case MessageType::Hello:
    case MessageType::NeighborAck:
    case MessageType::ProactiveAck: return EnergyCategory::Hello;
    default: return EnergyCategory::Tx;
  }
}

EnergyCategory rx_category_of(MessageType t) {
  return category_of(t) == EnergyCategory::Hello ? EnergyCategory::Hello : EnergyCategory::Rx;
}

const char* type_name(MessageType t) {
  switch (t) {
    case MessageType::FreshRreq: return "rreq";
    case MessageType::RepairRreq: return "repair_rreq";
    case MessageType::Rrep: return "rrep";
    case MessageType::LinkFail: return "link_fail";
    case MessageType::RepairRequest: return "repair_request";
    case MessageType::RepairPermission: return "repair_permission";
    case MessageType::Hello: return "hello";
    case MessageType::NeighborAck: return "neighbor_ack";
    case MessageType::ProactiveAck: return "proactive_ack";
    case MessageType::Data: return "data";
    case MessageType::DataAck: return "data_ack";
    case MessageType::DetectionRequest: return "detection_request";
    case MessageType::DetectionProbe: return "detection_probe";
    case MessageType::NeighborInfo: return "neighbor_info";
  }
  return "?";
}

std::uint64_t clamp2(double v) { return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(v))); }

}  // namespace

struct Simulator::Impl {
  ScenarioConfig cfg;
  Script script;
  std::ostream* trace_out = nullptr;
  bool keep = false;
  std::vector<TraceLine> lines;
  TupleSymbols symbols;

  std::shared_ptr<MobilityModel> mobility;
  std::optional<PowerModel> pm;
  WireContext wire;
  EventQueue events;
  SimTime now = 0;
  bool minus_hello = true;
  int hc = 1;

  std::vector<Node> nodes;
  std::vector<Position> pos_cache;
  SimTime pos_time = -1;
  std::vector<Transmission> txs;
  std::vector<std::uint32_t> free_txs;
  std::vector<Packet> packets;
  std::array<std::int64_t, kStateCount> state_count{};
  std::vector<SessionState> sessions;
  std::map<SessionKey, std::uint32_t> session_index;
  std::map<std::pair<NodeId, NodeId>, std::uint32_t> pair_sessions;
  std::vector<DestGroup> groups;
  Rng traffic{0};
  std::uint64_t next_uid = 1;
  SimTime data_airtime = 1;
  std::int64_t data_bits = 0;
  double saved_nj = 0.0;
  std::vector<double> delays;
  SimTime first_death = -1;
  SimTime partition_at = -1;
  MetricsReport rep;

  Impl(ScenarioConfig c, Script s) : cfg(std::move(c)), script(std::move(s)) { symbols.protocol = cfg.protocol; }

  // -------------------------------------------------------------------------
  // Setup

  void setup() {
    cfg.validate();
    const int n = cfg.node_count;
    minus_hello = cfg.variant == Variant::MinusHello;
    hc = std::max(1, n - 1);
    auto check = [&](const std::vector<double>& v, const char* what) {
      if (!v.empty() && static_cast<int>(v.size()) != n) {
        throw ConfigError(std::string("script ") + what + " needs one entry per node");
      }
    };
    check(script.energies, "energies");
    check(script.radio_ranges, "radio_ranges");
    check(script.tx_powers, "tx_powers");
    check(script.rx_powers, "rx_powers");
    if (script.mobility) {
      if (script.mobility->node_count() != n) throw ConfigError("script mobility node count differs from node_count");
      mobility = script.mobility;
    } else {
      mobility = std::make_shared<RandomWaypointModel>(cfg, cfg.rng_seed);
    }

    Rng params = Rng::substream(cfg.rng_seed, 3ULL << 32);
    auto draw = [&](Range<double> r) { return r.min == r.max ? r.min : params.uniform(r.min, r.max); };
    nodes.resize(static_cast<std::size_t>(n));
    double max_rx = 0.0, min_range = 1e300, max_range = 0.0;
    for (int i = 0; i < n; ++i) {
      Node& nd = nodes[static_cast<std::size_t>(i)];
      nd.id = NodeId(static_cast<std::uint32_t>(i));
      const double range = draw(cfg.radio_range_range);
      const double energy = draw(cfg.initial_energy_range);
      const double tx = draw(cfg.tx_power_range);
      const double rx = draw(cfg.rx_power_range);
      const auto u = static_cast<std::size_t>(i);
      nd.radio.radio_range = script.radio_ranges.empty() ? range : script.radio_ranges[u];
      nd.radio.tx_power = script.tx_powers.empty() ? tx : script.tx_powers[u];
      nd.radio.min_receive_power = script.rx_powers.empty() ? rx : script.rx_powers[u];
      nd.battery = Battery(script.energies.empty() ? energy : script.energies[u]);
      nd.rng = Rng::substream(cfg.rng_seed, (2ULL << 32) + static_cast<std::uint64_t>(i));
      nd.queue = MessageQueue<FramePtr>(static_cast<std::size_t>(cfg.queue_capacity));
      max_rx = std::max(max_rx, nd.radio.min_receive_power);
      min_range = std::min(min_range, nd.radio.radio_range);
      max_range = std::max(max_range, nd.radio.radio_range);
    }
    pm.emplace(cfg.medium_constant_C, max_rx);

    int pac = cfg.packet_load;
    for (const auto& s : script.sessions) pac = std::max(pac, s.packets);
    BitParams bp;
    bp.N = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(n));
    bp.X = clamp2(cfg.area_x + 1);
    bp.Y = clamp2(cfg.area_y + 1);
    bp.R_min = clamp2(min_range);
    bp.R_max = clamp2(max_range + 1);
    bp.TM = clamp2(static_cast<double>(cfg.sim_time + 1));
    bp.PAC = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(pac));
    wire.budget = BitBudget::from(bp);
    wire.protocol = cfg.protocol;
    data_bits = static_cast<std::int64_t>(encoded_size(DataPacket{}, wire)) + 8LL * cfg.packet_size;
    data_airtime = cfg.airtime(data_bits);

    traffic = Rng::substream(cfg.rng_seed, 1ULL << 32);

    rep.protocol = std::string(to_string(cfg.protocol));
    rep.variant = std::string(to_string(cfg.variant));
    rep.seed = cfg.rng_seed;
    rep.node_count = n;
    rep.sim_time = cfg.sim_time;
    rep.medium_constant_C = cfg.medium_constant_C;
    rep.calibration_min = 1e300;
    for (const auto& nd : nodes) {
      const double k = pm->mw_per_unit(nd.radio);
      rep.calibration_min = std::min(rep.calibration_min, k);
      rep.calibration_max = std::max(rep.calibration_max, k);
    }

    if (!minus_hello) {
      for (auto& nd : nodes) {
        events.push(static_cast<SimTime>(nd.rng.below(static_cast<std::uint64_t>(cfg.hello_interval))), kHelloTick,
                    nd.id.value);
      }
    }
    if (script.random_sessions && cfg.session_arrival_rate > 0.0 && n >= 2) {
      events.push(next_arrival_gap(), kSessionArrival);
    }
    for (std::size_t i = 0; i < script.sessions.size(); ++i) {
      events.push(script.sessions[i].at, kScriptedSession, 0, i);
    }
    for (const auto& [t, id] : script.failures) {
      if (id.value >= nodes.size()) throw ConfigError("script failure names an unknown node");
      events.push(t, kFailure, id.value);
    }
    events.push(1000, kPartitionCheck);
  }

  SimTime next_arrival_gap() {
    return std::max<SimTime>(1, std::llround(traffic.exponential(cfg.session_arrival_rate / 1000.0)));
  }

  // -------------------------------------------------------------------------
  // Helpers

  void trace(const char* kind, NodeId node, const std::string& detail) {
    if (!trace_out && !keep) return;
    if (trace_out) *trace_out << now << '\t' << kind << '\t' << node.value << '\t' << detail << '\n';
    if (keep) lines.push_back({now, kind, node, detail});
  }
  bool tracing() const { return trace_out || keep; }

  Node& node(NodeId id) { return nodes[id.value]; }

  const Position& pos(NodeId id) {
    if (pos_time != now) {
      pos_cache.resize(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        pos_cache[i] = mobility->position_at(NodeId(static_cast<std::uint32_t>(i)), now);
      }
      pos_time = now;
    }
    return pos_cache[id.value];
  }

  NodeView view(Node& n) {
    NodeView v;
    v.id = n.id;
    v.location = pos(n.id);
    v.residual_energy = n.battery.residual_joules();
    v.packet_energy = n.radio.tx_power * static_cast<double>(data_airtime) / 1e6;
    v.min_receive_power = n.radio.min_receive_power;
    v.radio_range = n.radio.radio_range;
    return v;
  }

  void learn(Node& n, NodeId who, Position p, SimTime t, double range) {
    if (who == n.id) return;
    Known& k = n.known[who.value];
    if (t < k.t) return;
    if (t > k.t && k.t >= 0) {
      k.prev = k.pos;
      k.prev_t = k.t;
    }
    k.pos = p;
    k.t = t;
    if (range > 0.0) k.range = range;
  }

  Velocity estimate_velocity(const Known& k) const {
    if (k.prev_t < 0 || k.t <= k.prev_t || k.t - k.prev_t > 2000) return {};
    const double dt = static_cast<double>(k.t - k.prev_t) / 1000.0;
    return {(k.pos.x - k.prev.x) / dt, (k.pos.y - k.prev.y) / dt};
  }

  void charge(Node& n, double mw, SimTime ticks, EnergyCategory cat) {
    if (!n.alive) return;
    n.drawn_nj += n.battery.charge(mw, static_cast<double>(ticks), cat);
    if (!n.battery.is_up()) kill(n);
  }

  void set_state(std::int64_t pid, PState s, NodeId holder) {
    Packet& p = packets[static_cast<std::size_t>(pid)];
    if (is_terminal(p.state)) return;
    --state_count[static_cast<int>(p.state)];
    ++state_count[static_cast<int>(s)];
    p.state = s;
    p.holder = holder;
    if (is_terminal(s)) resolve(p.session, s == PState::Delivered);
  }

  void resolve(std::uint32_t sidx, bool delivered) {
    SessionState& s = sessions[sidx];
    ++s.resolved;
    if (delivered) {
      ++s.delivered;
      s.last_delivery = now;
    }
    if (s.resolved == s.total) {
      if (s.delivered == s.total) {
        ++rep.sessions_completed;
        if (s.first_sent >= 0) delays.push_back(static_cast<double>(s.last_delivery - s.first_sent));
      }
      if (s.phase != Phase::Failed) s.phase = Phase::Done;
      ++s.cbr_token;
      s.cbr_running = false;
      ++s.discovery_token;
      ++s.repair_token;
      trace("session_end", s.key.source,
            std::to_string(s.key.session_id) + " delivered=" + std::to_string(s.delivered) + "/" +
                std::to_string(s.total));
    }
  }

  FramePtr make_frame(ControlMessage msg, NodeId link_dest) {
    auto f = std::make_shared<Frame>();
    f->type = type_of(msg);
    f->msg = std::move(msg);
    f->link_dest = link_dest;
    f->issued_at = now;
    f->uid = next_uid++;
    std::int64_t bits = static_cast<std::int64_t>(encoded_size(f->msg, wire));
    if (f->type == MessageType::Data) bits += 8LL * cfg.packet_size;
    f->airtime = cfg.airtime(bits);
    return f;
  }

  bool enqueue(Node& n, const FramePtr& f) {
    if (!n.alive) return false;
    if (!n.queue.push(f)) {
      ++rep.queue_drops;
      if (f->packet >= 0) set_state(f->packet, PState::DroppedQueue, n.id);
      if (f->type == MessageType::Hello) n.hello_pending = false;
      return false;
    }
    mac_kick(n);
    return true;
  }

  void count_sent(MessageType t) {
    switch (t) {
      case MessageType::FreshRreq:
      case MessageType::RepairRreq: ++rep.rreq_sent; break;
      case MessageType::Rrep: ++rep.rrep_sent; break;
      case MessageType::LinkFail: ++rep.link_fail_sent; break;
      case MessageType::RepairRequest: ++rep.repair_request_sent; break;
      case MessageType::RepairPermission: ++rep.repair_permission_sent; break;
      case MessageType::Hello: ++rep.hello_sent; break;
      case MessageType::NeighborAck: ++rep.neighbor_ack_sent; break;
      case MessageType::ProactiveAck: ++rep.proactive_ack_sent; break;
      case MessageType::Data: ++rep.data_sent; break;
      case MessageType::DataAck: ++rep.data_ack_sent; break;
      case MessageType::NeighborInfo: ++rep.neighbor_info_sent; break;
      default: break;
    }
  }

  // -------------------------------------------------------------------------
  // Death

  void kill(Node& n) {
    if (!n.alive) return;
    n.alive = false;
    n.death = now;
    if (first_death < 0) first_death = now;
    trace("death", n.id, "residual_nj=" + std::to_string(n.battery.residual_nj()));
    n.queue.clear();
    n.current.reset();
    n.mac = Mac::Idle;
    ++n.mac_token;
    for (std::size_t i = 0; i < packets.size(); ++i) {
      const Packet& p = packets[i];
      if (p.holder == n.id && !is_terminal(p.state)) {
        set_state(static_cast<std::int64_t>(i), PState::LostDeadRoute, n.id);
      }
    }
    for (auto& s : sessions) {
      if (s.key.source == n.id && s.phase != Phase::Done) s.phase = Phase::Failed;
    }
  }

  // -------------------------------------------------------------------------
  // Medium

  void start_tx(Node& n, const FramePtr& f) {
    if (!n.alive) {
      ++rep.dead_node_transmissions;
      return;
    }
    const bool broadcast = f->link_dest == kNoNode;
    double power = pm->full_power(n.radio);
    if (!broadcast && f->optimize && f->attempts == 0) {
      power = data_power(*pm, n.radio, pos(n.id), n.neighbors.find(f->link_dest), cfg.link_margin_m);
    }
    const double draw = pm->draw_mw(n.radio, power);
    saved_nj += static_cast<double>(energy_nj(n.radio.tx_power - draw, static_cast<double>(f->airtime)));
    if (f->first_tx < 0) f->first_tx = now;
    count_sent(f->type);
    if (tracing()) trace("tx", n.id, describe(*f));

    std::uint32_t idx;
    if (!free_txs.empty()) {
      idx = free_txs.back();
      free_txs.pop_back();
    } else {
      idx = static_cast<std::uint32_t>(txs.size());
      txs.emplace_back();
    }
    Transmission& t = txs[idx];
    t.frame = f;
    t.sender = n.id;
    t.receivers.clear();
    const Position& sp = pos(n.id);
    // Half duplex: anything the sender was receiving is lost to it.
    for (std::uint32_t other : n.incoming) mark_collided(other, n.id.value);
    t.sensers.clear();
    for (auto& r : nodes) {
      if (r.id == n.id || !r.alive) continue;
      const double reach = pm->reach(n.radio, power, r.radio.min_receive_power);
      const double d = distance(sp, pos(r.id));
      if (d > cfg.carrier_sense_factor * reach + 1e-9) continue;
      r.sensed.push_back(idx);
      t.sensers.push_back(r.id.value);
      if (d > reach + 1e-9) continue;
      bool collided = r.transmitting || !r.incoming.empty();
      for (std::uint32_t other : r.incoming) mark_collided(other, r.id.value);
      r.incoming.push_back(idx);
      t.receivers.emplace_back(r.id.value, collided);
    }
    n.transmitting = true;
    events.push(now + f->airtime, kTxEnd, n.id.value, idx);
    charge(n, draw, f->airtime, category_of(f->type));
  }

  void mark_collided(std::uint32_t tx_idx, std::uint32_t receiver) {
    for (auto& [r, c] : txs[tx_idx].receivers) {
      if (r == receiver) c = true;
    }
  }

  std::string describe(const Frame& f) {
    std::string s = type_name(f.type);
    s += f.link_dest == kNoNode ? " to=*" : " to=" + std::to_string(f.link_dest.value);
    if (f.type != MessageType::DataAck) s += " " + format_tuple(f.msg, symbols);
    return s;
  }

  void on_tx_end(std::uint32_t sender_id, std::uint32_t idx) {
    Transmission t = std::move(txs[idx]);
    txs[idx] = Transmission{};
    free_txs.push_back(idx);
    Node& s = nodes[sender_id];
    s.transmitting = false;
    const Frame& f = *t.frame;
    for (std::uint32_t sid : t.sensers) {
      auto& sn = nodes[sid].sensed;
      sn.erase(std::remove(sn.begin(), sn.end(), idx), sn.end());
    }
    for (const auto& [rid, collided] : t.receivers) {
      Node& r = nodes[rid];
      auto& in = r.incoming;
      in.erase(std::remove(in.begin(), in.end(), idx), in.end());
      if (!r.alive) continue;
      charge(r, r.radio.min_receive_power, f.airtime, rx_category_of(f.type));
      if (!r.alive) continue;
      const bool addressed = f.link_dest == kNoNode || f.link_dest == r.id;
      if (collided) {
        if (addressed) ++rep.collisions;
        continue;
      }
      if (!minus_hello) r.heard[sender_id] = now;
      if (addressed) receive(r, t.sender, t.frame);
    }
    if (f.is_ack || !s.alive || s.current != t.frame) {
      if (s.alive && !f.is_ack) mac_kick(s);
      return;
    }
    if (f.link_dest == kNoNode) {
      s.current.reset();
      s.mac = Mac::Idle;
      mac_kick(s);
    } else {
      s.mac = Mac::AwaitAck;
      events.push(now + 3, kAckTimeout, sender_id, ++s.mac_token);
    }
  }

  // -------------------------------------------------------------------------
  // MAC

  // Window doubles with each retry of the head frame.
  SimTime backoff(Node& n) {
    const int attempts = n.queue.empty() ? 0 : std::min(n.queue.front()->attempts, 5);
    const auto window = static_cast<std::uint64_t>(cfg.mac_backoff_window) << attempts;
    return 1 + static_cast<SimTime>(n.rng.below(window));
  }

  void mac_kick(Node& n) {
    if (!n.alive || n.mac != Mac::Idle || n.queue.empty()) return;
    n.mac = Mac::Backoff;
    events.push(now + backoff(n), kBackoff, n.id.value, ++n.mac_token);
  }

  void on_backoff(Node& n, std::uint64_t token) {
    if (!n.alive || token != n.mac_token || n.mac != Mac::Backoff) return;
    if (n.queue.empty()) {
      n.mac = Mac::Idle;
      return;
    }
    const FramePtr& head = n.queue.front();
    const bool busy = n.transmitting || !n.sensed.empty();
    if (busy) {
      bool go = false;
      if (!n.transmitting && head->link_dest != kNoNode) {
        std::vector<OngoingTransmission> ongoing;
        for (std::uint32_t i : n.sensed) ongoing.push_back({txs[i].sender, txs[i].frame->link_dest});
        const KnownNode self{pos(n.id), n.radio.radio_range};
        auto lookup = [&n](NodeId id) -> std::optional<KnownNode> {
          auto it = n.known.find(id.value);
          if (it == n.known.end() || it->second.range <= 0.0) return std::nullopt;
          return KnownNode{it->second.pos, it->second.range};
        };
        go = detect_exposed_transmission(n.id, self, head->link_dest, ongoing, lookup) == ExposedDecision::Proceed;
        if (go) ++rep.exposed_proceeds;
      }
      if (!go) {
        events.push(now + backoff(n), kBackoff, n.id.value, n.mac_token);
        return;
      }
    }
    FramePtr f = n.queue.pop();
    if (f->type == MessageType::Hello) n.hello_pending = false;
    n.current = f;
    n.mac = Mac::Tx;
    start_tx(n, f);
  }

  void send_ack(Node& r, NodeId to, const Frame& f) {
    DataAck a;
    if (const auto* d = std::get_if<DataPacket>(&f.msg)) {
      a = {d->source, d->destination, d->session_id, d->packet_sequence_id, r.id};
    } else {
      a.sender = r.id;
    }
    auto ack = make_frame(a, to);
    ack->is_ack = true;
    ack->ack_uid = f.uid;
    start_tx(r, ack);
  }

  void on_ack(Node& n, std::uint64_t uid) {
    if (n.mac != Mac::AwaitAck || !n.current || n.current->uid != uid) return;
    FramePtr f = std::move(n.current);
    ++n.mac_token;
    n.mac = Mac::Idle;
    unicast_success(n, *f);
    mac_kick(n);
  }

  void on_ack_timeout(Node& n, std::uint64_t token) {
    if (!n.alive || token != n.mac_token || n.mac != Mac::AwaitAck) return;
    FramePtr f = std::move(n.current);
    n.mac = Mac::Idle;
    if (++f->attempts < cfg.max_attempts) {
      n.queue.push_front(f);
    } else {
      unicast_failure(n, f);
    }
    mac_kick(n);
  }

  // -------------------------------------------------------------------------
  // Abstract one-hop replies (ACKs of RREQ/HELLO and proactive ACKs)

  bool abstract_send(Node& from, NodeId to, const ControlMessage& msg) {
    if (!from.alive) return false;
    const MessageType t = type_of(msg);
    const SimTime air = cfg.airtime(static_cast<std::int64_t>(encoded_size(msg, wire)));
    count_sent(t);
    charge(from, from.radio.tx_power, air, EnergyCategory::Hello);
    Node& dst = node(to);
    if (!dst.alive || distance(pos(from.id), pos(to)) > from.radio.radio_range) return false;
    charge(dst, dst.radio.min_receive_power, air, EnergyCategory::Hello);
    return dst.alive;
  }

  void send_neighbor_ack(Node& j, NodeId to) {
    NeighborAck a{j.id, to, pos(j.id), j.radio.radio_range, now};
    if (!abstract_send(j, to, a)) return;
    Node& i = node(to);
    i.neighbors.update(j.id, {a.sender_location, a.radio_range, now, 0.0});
    learn(i, j.id, a.sender_location, now, a.radio_range);
    if (!minus_hello) i.heard[j.id.value] = now;
  }

  // -------------------------------------------------------------------------
  // Reception dispatch

  void receive(Node& r, NodeId from, const FramePtr& fp) {
    const Frame& f = *fp;
    if (f.is_ack) {
      on_ack(r, f.ack_uid);
      return;
    }
    if (f.link_dest == r.id) send_ack(r, from, f);
    if (!r.alive) return;
    switch (f.type) {
      case MessageType::FreshRreq:
      case MessageType::RepairRreq: on_rreq(r, from, f); break;
      case MessageType::Rrep: on_rrep(r, from, fp); break;
      case MessageType::Hello: on_hello(r, std::get<Hello>(f.msg)); break;
      case MessageType::Data: on_data(r, from, f); break;
      case MessageType::NeighborInfo: {
        const auto& ni = std::get<NeighborInfo>(f.msg);
        learn(r, ni.sender, ni.sender_location, now, node(ni.sender).radio.radio_range);
        for (const auto& e : ni.neighbors) learn(r, e.id, e.location, now, 0.0);
        break;
      }
      case MessageType::LinkFail:
      case MessageType::RepairRequest:
      case MessageType::RepairPermission: on_routed(r, fp); break;
      default: break;
    }
  }

  void on_hello(Node& r, const Hello& h) {
    learn(r, h.sender, h.sender_location, h.timestamp, h.radio_range);
    send_neighbor_ack(r, h.sender);
  }

  // -------------------------------------------------------------------------
  // Discovery

  std::uint32_t create_session(NodeId s, NodeId d, int n_packets, std::uint32_t id = 0) {
    const auto sidx = static_cast<std::uint32_t>(sessions.size());
    SessionState st;
    auto& last = pair_sessions[{s, d}];
    last = id != 0 ? std::max(last, id) : last + 1;
    st.key = {s, d, id != 0 ? id : last};
    st.total = n_packets;
    for (int q = 1; q <= n_packets; ++q) {
      Packet p;
      p.session = sidx;
      p.seq = q;
      p.holder = s;
      st.packets.push_back(static_cast<std::int64_t>(packets.size()));
      packets.push_back(p);
      ++state_count[static_cast<int>(PState::AtSource)];
      st.unsent.push_back(q);
    }
    sessions.push_back(std::move(st));
    session_index[sessions.back().key] = sidx;
    ++rep.sessions;
    rep.offered += n_packets;
    trace("session", s, std::to_string(sessions.back().key.session_id) + " d=" + std::to_string(d.value) +
                            " packets=" + std::to_string(n_packets));
    if (!node(s).alive) {
      fail_session(sidx);
    } else {
      start_discovery(sidx, MessageType::FreshRreq);
    }
    return sidx;
  }

  void fail_session(std::uint32_t sidx) {
    SessionState& s = sessions[sidx];
    if (s.phase == Phase::Done || s.phase == Phase::Failed) return;
    s.phase = Phase::Failed;
    trace("session_failed", s.key.source, std::to_string(s.key.session_id));
    s.unsent.clear();
    for (std::int64_t pid : s.packets) {
      if (packets[static_cast<std::size_t>(pid)].state == PState::AtSource) {
        set_state(pid, PState::LostDeadRoute, s.key.source);
      }
    }
  }

  void start_discovery(std::uint32_t sidx, MessageType type) {
    SessionState& s = sessions[sidx];
    Node& src = node(s.key.source);
    if (!src.alive || s.discoveries >= cfg.max_discoveries) {
      fail_session(sidx);
      return;
    }
    ++s.discoveries;
    ++rep.discoveries;
    s.discovering = true;
    Rreq r = originate_rreq(cfg.protocol, view(src), s.key.destination, s.key.session_id,
                            std::max(1, s.total - s.resolved), now);
    r.type = type;
    src.rreqs.admit(r, kNoNode, std::nullopt, now, cfg.ttl);
    auto f = make_frame(r, kNoNode);
    f->session = sidx;
    enqueue(src, f);
    events.push(now + 4 * cfg.ttl, kDiscoveryTimeout, 0, sidx, ++s.discovery_token);
  }

  void on_discovery_timeout(std::uint32_t sidx, std::uint64_t token) {
    SessionState& s = sessions[sidx];
    if (token != s.discovery_token || !s.discovering) return;
    s.discovering = false;
    if (s.phase == Phase::Done || s.phase == Phase::Failed) return;
    if (s.phase == Phase::Active) return;  // a pre-emptive discovery found nothing; keep the old route
    start_discovery(sidx, MessageType::RepairRreq);
  }

  void on_rreq(Node& j, NodeId from, const Frame& f) {
    const Rreq& in = std::get<Rreq>(f.msg);
    if (minus_hello) send_neighbor_ack(j, from);
    if (!j.alive) return;
    if (in.initiator == in.source) learn(j, in.source, in.source_location, f.issued_at, 0.0);
    if (cfg.protocol == Protocol::MFR && !in.router_locations.empty()) {
      learn(j, in.router_sequence.back(), in.router_locations.back(), now, 0.0);
    }
    auto it = session_index.find(in.key());
    if (it == session_index.end()) return;
    // A hop this node could not answer over (ACKs, reverse path) is useless.
    const double hop = distance(pos(from), pos(j.id));
    if (hop > j.radio.radio_range) return;
    ForwardContext ctx;
    ctx.protocol = cfg.protocol;
    ctx.max_hop_count = hc;
    ctx.now = now;
    ctx.ttl = cfg.ttl;
    ctx.issued_at = f.issued_at;
    ctx.hop_power = pm->unicast_power(j.radio.min_receive_power, hop);
    ctx.cone_half_angle_deg = cfg.cone_half_angle_deg;
    ctx.predecessor = from;
    if (auto k = j.known.find(from.value); k != j.known.end()) ctx.predecessor_location = k->second.pos;

    if (in.destination == j.id) {
      auto d = accept_at_destination(in, view(j), ctx);
      if (d.reason != DropReason::None) return;
      const auto gkey = std::make_tuple(it->second, static_cast<int>(in.type), in.initiator.value, f.issued_at);
      auto g = j.groups.find(gkey);
      if (g == j.groups.end()) {
        j.rreqs.admit(in, from, ctx.predecessor_location, now, cfg.ttl);
        groups.push_back({j.id, it->second, {}});
        g = j.groups.emplace(gkey, groups.size() - 1).first;
        const SimTime window = std::max<SimTime>(2, 2 * (now - f.issued_at));
        events.push(now + window, kDestWindow, j.id.value, g->second);
      }
      groups[g->second].candidates.push_back(d.candidate);
      return;
    }
    auto d = forward_rreq(in, view(j), ctx, j.rreqs);
    if (d.reason != DropReason::None) return;
    const auto& seq = d.out.router_sequence;
    std::set<NodeId> uniq(seq.begin(), seq.end());
    if (uniq.size() != seq.size() || uniq.count(d.out.source)) ++rep.loop_violations;
    auto out = make_frame(d.out, kNoNode);
    out->issued_at = f.issued_at;
    out->session = it->second;
    enqueue(j, out);
  }

  void on_dest_window(Node& d, std::size_t gidx) {
    if (!d.alive) return;
    DestGroup& g = groups[gidx];
    const SessionState& s = sessions[g.session];
    if (g.candidates.empty()) return;
    const Position src_loc = g.candidates.front().rreq.source_location;
    auto pick = select_route(cfg.protocol, g.candidates, src_loc, pos(d.id));
    if (!pick) return;
    const Candidate& c = g.candidates[*pick];
    Rrep rr = make_rrep(c, view(d), now);
    d.rrep_seen.insert({g.session, d.id.value, now});
    auto path = std::make_shared<const std::vector<NodeId>>(full_path(s.key.source, c.rreq.router_sequence, d.id));
    trace("route_selected", d.id, describe_path(*path));
    if (minus_hello) {
      auto f = make_frame(rr, kNoNode);
      f->session = g.session;
      enqueue(d, f);
    } else {
      auto prev = path_neighbor(*path, d.id, -1);
      if (!prev) return;
      auto f = make_frame(rr, *prev);
      f->session = g.session;
      f->path = path;
      f->direction = -1;
      f->target = s.key.source;
      enqueue(d, f);
    }
    g.candidates.clear();
  }

  static std::string describe_path(const std::vector<NodeId>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) s += '-';
      s += std::to_string(p[i].value);
    }
    return s;
  }

  void on_rrep(Node& j, NodeId from, const FramePtr& fp) {
    const Frame& f = *fp;
    const Rrep& in = std::get<Rrep>(f.msg);
    const std::uint32_t sidx = f.session;
    SessionState& s = sessions[sidx];
    auto path = std::make_shared<const std::vector<NodeId>>(
        full_path(in.source, in.optimum_router_sequence, in.destination));
    learn(j, in.destination, in.destination_location, in.timestamp, 0.0);

    if (minus_hello) {
      if (!j.rrep_seen.insert({sidx, in.initiator.value, in.timestamp}).second) return;
      if (j.id == in.source) {
        install_route(sidx, path, in);
        return;
      }
      const auto& seq = in.optimum_router_sequence;
      if (std::find(seq.begin(), seq.end(), j.id) != seq.end()) adopt_route(j, sidx, path, in);
      RrepForwardContext ctx;
      ctx.max_hop_count = hc;
      ctx.now = now;
      ctx.ttl = cfg.ttl;
      ctx.issued_at = f.issued_at;
      ctx.cone_half_angle_deg = cfg.cone_half_angle_deg;
      if (const auto* e = j.rreqs.find(s.key)) ctx.source_location = e->rreq.source_location;
      auto d = forward_rrep(in, view(j), ctx);
      if (d.reason != DropReason::None) return;
      auto out = make_frame(d.out, kNoNode);
      out->issued_at = f.issued_at;
      out->session = sidx;
      enqueue(j, out);
      return;
    }
    (void)from;
    if (j.id == in.source) {
      install_route(sidx, path, in);
      return;
    }
    adopt_route(j, sidx, path, in);
    auto prev = path_neighbor(*f.path, j.id, -1);
    if (!prev) return;
    Rrep fwd = in;
    fwd.current_hop_count += 1;
    auto out = make_frame(fwd, *prev);
    out->session = sidx;
    out->path = f.path;
    out->direction = -1;
    out->target = in.source;
    enqueue(j, out);
  }

  // A router named in a fresh route resets its per-session state; one that
  // was holding packets for a repair forwards them along the new path.
  void adopt_route(Node& j, std::uint32_t sidx, const Path& path, const Rrep& in) {
    Relay& r = j.relays[sidx];
    r.dest_location = in.destination_location;
    r.override_path = path;
    r.path = path;
    r.successor = path_neighbor(*path, j.id, +1).value_or(kNoNode);
    r.predecessor = path_neighbor(*path, j.id, -1).value_or(kNoNode);
    r.repair_requested_at = -1;
    const bool was_broken = r.broken;
    r.broken = false;
    if (was_broken && !r.buffer.empty()) {
      ++r.buffer_token;
      auto buffered = std::move(r.buffer);
      r.buffer.clear();
      trace("repair_flush", j.id, std::to_string(buffered.size()) + " packets via " + describe_path(*path));
      for (std::int64_t pid : buffered) forward_data(j, sidx, pid, path);
    }
  }

  void install_route(std::uint32_t sidx, const Path& path, const Rrep& in) {
    SessionState& s = sessions[sidx];
    if (s.phase == Phase::Done || s.phase == Phase::Failed) return;
    Node& src = node(s.key.source);
    s.path = path;
    s.phase = Phase::Active;
    s.discovering = false;
    s.discoveries = 0;
    ++s.discovery_token;
    ++s.repair_token;
    s.arbiter.reset();
    s.decide_pending = false;
    trace("route", src.id, std::to_string(s.key.session_id) + " " + describe_path(*path));
    (void)in;
    if (minus_hello && !s.neighbor_info_sent) {
      s.neighbor_info_sent = true;
      NeighborInfo ni;
      ni.sender = src.id;
      ni.sender_location = pos(src.id);
      for (const auto& [id, e] : src.neighbors.entries()) {
        if (ni.neighbors.size() + 1 >= static_cast<std::size_t>(cfg.node_count)) break;
        ni.neighbors.push_back({id, e.location});
      }
      if (path->size() > 1) ni.next_hops.push_back((*path)[1]);
      enqueue(src, make_frame(ni, kNoNode));
    }
    if (!s.cbr_running) {
      s.cbr_running = true;
      events.push(now, kCbr, 0, sidx, ++s.cbr_token);
    }
  }

  // -------------------------------------------------------------------------
  // Data

  void on_cbr(std::uint32_t sidx, std::uint64_t token) {
    SessionState& s = sessions[sidx];
    if (token != s.cbr_token) return;
    Node& src = node(s.key.source);
    if (s.phase != Phase::Active || s.unsent.empty() || !src.alive || !s.path || s.path->size() < 2) {
      s.cbr_running = false;
      return;
    }
    const int seq = s.unsent.front();
    s.unsent.pop_front();
    const std::int64_t pid = s.packets[static_cast<std::size_t>(seq - 1)];
    Packet& p = packets[static_cast<std::size_t>(pid)];
    if (!is_terminal(p.state)) {
      if (s.first_sent < 0) s.first_sent = now;
      p.sent_at = now;
      set_state(pid, PState::InTransit, src.id);
      auto f = make_frame(DataPacket{s.key.source, s.key.destination, s.key.session_id, seq}, (*s.path)[1]);
      f->packet = pid;
      f->session = sidx;
      f->path = s.path;
      f->direction = +1;
      f->target = s.key.destination;
      f->optimize = minus_hello;
      enqueue(src, f);
    }
    if (!s.unsent.empty()) {
      events.push(now + data_airtime * cfg.cbr_gap_factor, kCbr, 0, sidx, s.cbr_token);
    } else {
      s.cbr_running = false;
    }
  }

  void forward_data(Node& j, std::uint32_t sidx, std::int64_t pid, const Path& path) {
    Packet& p = packets[static_cast<std::size_t>(pid)];
    if (is_terminal(p.state)) return;
    auto next = path_neighbor(*path, j.id, +1);
    if (!next) {
      set_state(pid, PState::LostDeadRoute, j.id);
      return;
    }
    set_state(pid, PState::InTransit, j.id);
    const SessionState& s = sessions[sidx];
    auto f = make_frame(DataPacket{s.key.source, s.key.destination, s.key.session_id, p.seq}, *next);
    f->packet = pid;
    f->session = sidx;
    f->path = path;
    f->direction = +1;
    f->target = s.key.destination;
    f->optimize = minus_hello;
    enqueue(j, f);
  }

  void on_data(Node& j, NodeId from, const Frame& f) {
    Packet& p = packets[static_cast<std::size_t>(f.packet)];
    if (is_terminal(p.state) || p.holder != from) return;  // duplicate after a lost ACK, or already lost
    const std::uint32_t sidx = f.session;
    SessionState& s = sessions[sidx];
    if (minus_hello) {
      auto& links = j.prolinks[from.value];
      if (p.seq >= s.total) {
        links.erase(sidx);
        if (links.empty()) j.prolinks.erase(from.value);
      } else {
        if (!links.count(sidx)) j.link_fail_sent.erase({from.value, sidx});
        links[sidx] = now;
        if (!j.proactive_running) {
          j.proactive_running = true;
          events.push(now + cfg.hello_interval, kProactiveTick, j.id.value);
        }
      }
    }
    if (j.id == s.key.destination) {
      set_state(f.packet, PState::Delivered, j.id);
      trace("deliver", j.id, std::to_string(s.key.session_id) + " seq=" + std::to_string(p.seq));
      return;
    }
    Relay& r = j.relays[sidx];
    r.last_data = now;
    if (r.predecessor == kNoNode) r.predecessor = from;
    if (!r.have_beta && p.sent_at >= 0) {
      r.beta = now - p.sent_at;
      r.have_beta = true;
    }
    Path path = r.override_path ? r.override_path : f.path;
    r.path = path;
    r.successor = path_neighbor(*path, j.id, +1).value_or(kNoNode);
    if (r.broken) {
      if (minus_hello) {
        set_state(f.packet, PState::Buffered, j.id);
        r.buffer.push_back(f.packet);
      } else {
        set_state(f.packet, PState::LostDeadRoute, j.id);
      }
      return;
    }
    set_state(f.packet, PState::InTransit, j.id);
    forward_data(j, sidx, f.packet, path);
  }

  void unicast_success(Node& n, const Frame& f) {
    if (f.type != MessageType::Data) return;
    SessionState& s = sessions[f.session];
    if (n.id == s.key.source) {
      if (s.del_route < 0 && f.first_tx >= 0) s.del_route = now - f.first_tx;
    } else {
      ++n.relays[f.session].forwarded;
    }
  }

  void unicast_failure(Node& n, const FramePtr& fp) {
    const Frame& f = *fp;
    trace("link_break", n.id, std::string(type_name(f.type)) + " to=" + std::to_string(f.link_dest.value));
    if (f.type != MessageType::Data) return;
    const std::uint32_t sidx = f.session;
    SessionState& s = sessions[sidx];
    Packet& p = packets[static_cast<std::size_t>(f.packet)];
    const bool held = !is_terminal(p.state) && p.holder == n.id;
    const Node& peer = node(f.link_dest);
    const bool reachable =
        peer.alive && distance(pos(n.id), pos(peer.id)) <= std::min(n.radio.radio_range, peer.radio.radio_range);
    const PState loss = reachable ? PState::LostCollision : PState::LostDeadRoute;

    if (n.id == s.key.source) {
      if (held) {
        set_state(f.packet, PState::AtSource, n.id);
        s.unsent.push_front(p.seq);
      }
      source_break(sidx);
      return;
    }
    Relay& r = n.relays[sidx];
    r.broken = true;
    const bool ask = r.repair_requested_at < 0 || now - r.repair_requested_at > 2 * cfg.ttl;
    if (minus_hello) {
      if (held) {
        set_state(f.packet, PState::Buffered, n.id);
        r.buffer.push_back(f.packet);
        events.push(now + 6 * cfg.ttl, kBufferTimeout, n.id.value, sidx, ++r.buffer_token);
      }
      if (ask) request_repair(n, sidx, r);
    } else {
      if (held) set_state(f.packet, loss, n.id);
      if (ask) {
        r.repair_requested_at = now;
        send_toward_source(n, sidx, r.path, make_link_fail(s.key, f.link_dest, n.id));
      }
    }
  }

  void source_break(std::uint32_t sidx) {
    SessionState& s = sessions[sidx];
    if (s.phase == Phase::Done || s.phase == Phase::Failed) return;
    ++s.cbr_token;
    s.cbr_running = false;
    if (s.discovering && s.phase != Phase::Active) return;
    s.phase = minus_hello ? Phase::Repairing : Phase::Discovering;
    ++rep.source_rediscoveries;
    start_discovery(sidx, MessageType::RepairRreq);
  }

  void request_repair(Node& n, std::uint32_t sidx, Relay& r) {
    r.repair_requested_at = now;
    const SessionState& s = sessions[sidx];
    trace("repair_request", n.id, std::to_string(s.key.session_id));
    send_toward_source(n, sidx, r.path, make_repair_request(s.key, now, n.id, r.have_beta ? r.beta : 0));
  }

  void send_toward_source(Node& n, std::uint32_t sidx, const Path& path, ControlMessage msg) {
    if (!path) return;
    auto prev = path_neighbor(*path, n.id, -1);
    if (!prev) return;
    auto f = make_frame(std::move(msg), *prev);
    f->session = sidx;
    f->path = path;
    f->direction = -1;
    f->target = sessions[sidx].key.source;
    enqueue(n, f);
  }

  void on_buffer_timeout(Node& n, std::uint32_t sidx, std::uint64_t token) {
    if (!n.alive) return;
    auto it = n.relays.find(sidx);
    if (it == n.relays.end() || it->second.buffer_token != token) return;
    for (std::int64_t pid : it->second.buffer) set_state(pid, PState::LostDeadRoute, n.id);
    it->second.buffer.clear();
  }

  // Link-fail, repair request and permission travel hop by hop along the path.
  void on_routed(Node& r, const FramePtr& fp) {
    const Frame& f = *fp;
    if (r.id != f.target) {
      auto next = path_neighbor(*f.path, r.id, f.direction);
      if (!next) return;
      auto out = make_frame(f.msg, *next);
      out->session = f.session;
      out->path = f.path;
      out->direction = f.direction;
      out->target = f.target;
      enqueue(r, out);
      return;
    }
    switch (f.type) {
      case MessageType::LinkFail: on_link_fail(r, f); break;
      case MessageType::RepairRequest: on_repair_request(f); break;
      case MessageType::RepairPermission: on_repair_permission(r, f); break;
      default: break;
    }
  }

  void on_link_fail(Node& i, const Frame& f) {
    const auto& lf = std::get<LinkFail>(f.msg);
    const std::uint32_t sidx = f.session;
    SessionState& s = sessions[sidx];
    if (i.id == s.key.source) {
      if (s.phase != Phase::Active) return;
      if (!minus_hello) {
        source_break(sidx);
      } else if (!s.discovering) {
        // Pre-emptive: keep using the old route while a new one is found.
        ++rep.source_rediscoveries;
        start_discovery(sidx, MessageType::RepairRreq);
      }
      return;
    }
    if (!minus_hello) return;
    Relay& r = i.relays[sidx];
    if (r.successor != lf.sender) return;
    if (r.repair_requested_at >= 0 && now - r.repair_requested_at <= 2 * cfg.ttl) return;
    request_repair(i, sidx, r);
  }

  void on_repair_request(const Frame& f) {
    const auto& rq = std::get<RepairRequest>(f.msg);
    const std::uint32_t sidx = f.session;
    SessionState& s = sessions[sidx];
    if (s.phase != Phase::Active && s.phase != Phase::Repairing) return;
    if (!s.path) return;
    auto it = std::find(s.path->begin(), s.path->end(), rq.initiator);
    if (it == s.path->end()) return;
    s.arbiter.submit({rq.initiator, static_cast<int>(it - s.path->begin()), now, rq.recv_delay_source,
                      rq.link_break_timestamp});
    if (!s.decide_pending) {
      s.decide_pending = true;
      events.push(now, kArbiterDecide, 0, sidx);
    }
  }

  void on_arbiter_decide(std::uint32_t sidx) {
    SessionState& s = sessions[sidx];
    s.decide_pending = false;
    if (s.phase != Phase::Active && s.phase != Phase::Repairing) return;
    const std::size_t denied_before = s.arbiter.denied().size();
    const auto granted = s.arbiter.decide(now);
    rep.repairs_denied += static_cast<std::int64_t>(s.arbiter.denied().size() - denied_before);
    if (granted.empty()) return;
    Node& src = node(s.key.source);
    for (NodeId g : granted) {
      ++rep.repairs_granted;
      trace("repair_grant", src.id, std::to_string(s.key.session_id) + " grantee=" + std::to_string(g.value));
      auto next = path_neighbor(*s.path, src.id, +1);
      if (!next) continue;
      auto f = make_frame(RepairPermission{s.key.source, s.key.destination, s.key.session_id, g}, *next);
      f->session = sidx;
      f->path = s.path;
      f->direction = +1;
      f->target = g;
      enqueue(src, f);
    }
    s.phase = Phase::Repairing;
    ++s.cbr_token;
    s.cbr_running = false;
    const SimTime fallback = 2 * s.arbiter.grants().back().recv_delay_source;
    const SimTime del_route = s.del_route >= 0 ? s.del_route : fallback;
    const auto deadline = s.arbiter.rediscovery_deadline(del_route, cfg.ttl);
    if (!deadline) return;
    trace("repair_deadline", src.id, std::to_string(s.key.session_id) + " del_route=" + std::to_string(del_route) +
                                         " at=" + std::to_string(*deadline));
    events.push(std::max(now, *deadline), kRepairDeadline, 0, sidx, ++s.repair_token);
  }

  void on_repair_deadline(std::uint32_t sidx, std::uint64_t token) {
    SessionState& s = sessions[sidx];
    if (token != s.repair_token || s.phase != Phase::Repairing) return;
    ++rep.source_rediscoveries;
    trace("rediscover", s.key.source, std::to_string(s.key.session_id));
    s.arbiter.reset();
    start_discovery(sidx, MessageType::RepairRreq);
  }

  void on_repair_permission(Node& w, const Frame& f) {
    const std::uint32_t sidx = f.session;
    const SessionState& s = sessions[sidx];
    auto it = w.relays.find(sidx);
    if (it == w.relays.end() || !it->second.path) return;
    Relay& r = it->second;
    const auto& path = *r.path;
    auto self = std::find(path.begin(), path.end(), w.id);
    if (self == path.end()) return;
    RepairDiscoveryInput in;
    in.protocol = cfg.protocol;
    in.key = s.key;
    in.grantee = view(w);
    if (const auto* e = w.rreqs.find(s.key)) {
      in.source_location = e->rreq.source_location;
    } else if (auto k = w.known.find(s.key.source.value); k != w.known.end()) {
      in.source_location = k->second.pos;
    }
    for (auto p = path.begin() + 1; p != self + 1; ++p) {
      in.prefix.push_back(*p);
      auto k = w.known.find(p->value);
      in.prefix_locations.push_back(*p == w.id || k == w.known.end() ? pos(w.id) : k->second.pos);
    }
    in.remaining_packets = std::max(1, s.total - r.forwarded);
    in.destination_location = r.dest_location;
    if (!in.destination_location) {
      if (auto k = w.known.find(s.key.destination.value); k != w.known.end()) in.destination_location = k->second.pos;
    }
    in.now = now;
    Rreq rq = repair_discovery(in);
    w.rreqs.admit(rq, kNoNode, std::nullopt, now, cfg.ttl);
    trace("repair_rreq", w.id, std::to_string(s.key.session_id));
    auto out = make_frame(rq, kNoNode);
    out->session = sidx;
    enqueue(w, out);
  }

  // -------------------------------------------------------------------------
  // Periodic work

  void on_hello_tick(Node& n) {
    if (!n.alive) return;
    ++rep.hello_issued;
    Hello h{n.id, pos(n.id), n.radio.radio_range, now};
    if (n.hello_pending) {
      for (auto& f : n.queue.items()) {
        if (f->type == MessageType::Hello) f->msg = h;
      }
    } else {
      n.hello_pending = true;
      enqueue(n, make_frame(h, kNoNode));
    }
    const SimTime limit = 2 * cfg.hello_interval + cfg.mac_backoff_window;
    auto lost = [&](NodeId next) {
      auto h = n.heard.find(next.value);
      return h == n.heard.end() || now - h->second > limit;
    };
    for (auto& [sidx, r] : n.relays) {
      if (r.broken || r.successor == kNoNode || r.last_data < 0 || now - r.last_data > 4 * cfg.ttl) continue;
      if (!lost(r.successor)) continue;
      r.broken = true;
      trace("link_break", n.id, "hello_loss to=" + std::to_string(r.successor.value));
      if (r.repair_requested_at < 0 || now - r.repair_requested_at > 2 * cfg.ttl) {
        r.repair_requested_at = now;
        send_toward_source(n, sidx, r.path, make_link_fail(sessions[sidx].key, r.successor, n.id));
      }
    }
    for (std::uint32_t sidx = 0; sidx < sessions.size(); ++sidx) {
      SessionState& s = sessions[sidx];
      if (s.key.source != n.id || s.phase != Phase::Active || !s.path || s.path->size() < 2) continue;
      if (lost((*s.path)[1])) source_break(sidx);
    }
    events.push(now + cfg.hello_interval, kHelloTick, n.id.value);
  }

  void on_proactive_tick(Node& j) {
    if (!j.alive) {
      j.proactive_running = false;
      return;
    }
    const SimTime idle = 4 * cfg.ttl;
    const SimTime lead = link_fail_lead(data_airtime + (cfg.mac_backoff_window + 1) / 2, cfg.hello_interval);
    for (auto it = j.prolinks.begin(); it != j.prolinks.end();) {
      auto& sess = it->second;
      for (auto s = sess.begin(); s != sess.end();) s = now - s->second > idle ? sess.erase(s) : std::next(s);
      if (sess.empty()) {
        it = j.prolinks.erase(it);
        continue;
      }
      const NodeId pred(it->first);
      ProactiveAck ack = make_proactive_ack(view(j), now);
      if (abstract_send(j, pred, ack)) {
        Node& i = node(pred);
        on_proactive_ack(i.neighbors, ack);
        learn(i, j.id, ack.sender_location, now, ack.radio_range);
      }
      if (!j.alive) return;
      auto k = j.known.find(pred.value);
      if (k != j.known.end() && k->second.range > 0.0) {
        const auto exit = predict_range_exit(pos(j.id), mobility->velocity_at(j.id, now), k->second.pos,
                                             estimate_velocity(k->second), k->second.range, now, now + lead);
        if (exit) {
          for (const auto& [sidx, last] : sess) {
            (void)last;
            if (!j.link_fail_sent.insert({pred.value, sidx}).second) continue;
            trace("link_fail_predicted", j.id, "pred=" + std::to_string(pred.value));
            auto f = make_frame(make_link_fail(sessions[sidx].key, j.id, pred), pred);
            f->session = sidx;
            f->path = std::make_shared<const std::vector<NodeId>>(std::vector<NodeId>{pred, j.id});
            f->direction = -1;
            f->target = pred;
            enqueue(j, f);
          }
        }
      }
      ++it;
    }
    if (j.prolinks.empty()) {
      j.proactive_running = false;
    } else {
      events.push(now + cfg.hello_interval, kProactiveTick, j.id.value);
    }
  }

  void on_partition_check() {
    const std::size_t n = nodes.size();
    std::vector<int> comp(n, -1);
    int best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!nodes[i].alive || comp[i] >= 0) continue;
      int size = 0;
      std::vector<std::size_t> stack{i};
      comp[i] = static_cast<int>(i);
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        ++size;
        for (std::size_t v = 0; v < n; ++v) {
          if (comp[v] >= 0 || !nodes[v].alive) continue;
          const double d = distance(pos(nodes[u].id), pos(nodes[v].id));
          if (d <= std::min(nodes[u].radio.radio_range, nodes[v].radio.radio_range)) {
            comp[v] = static_cast<int>(i);
            stack.push_back(v);
          }
        }
      }
      best = std::max(best, size);
    }
    if (2 * best < static_cast<int>(n)) {
      partition_at = now;
      return;
    }
    events.push(now + 1000, kPartitionCheck);
  }

  // -------------------------------------------------------------------------
  // Main loop

  MetricsReport run() {
    setup();
    while (!events.empty() && events.next_time() <= cfg.sim_time) {
      const Event e = events.pop();
      if (e.time < now) ++rep.causality_violations;
      now = e.time;
      switch (e.kind) {
        case kBackoff: on_backoff(nodes[e.node], e.a); break;
        case kTxEnd: on_tx_end(e.node, static_cast<std::uint32_t>(e.a)); break;
        case kAckTimeout: on_ack_timeout(nodes[e.node], e.a); break;
        case kHelloTick: on_hello_tick(nodes[e.node]); break;
        case kProactiveTick: on_proactive_tick(nodes[e.node]); break;
        case kSessionArrival: {
          const auto n = static_cast<std::uint64_t>(nodes.size());
          const NodeId s(static_cast<std::uint32_t>(traffic.below(n)));
          auto dv = static_cast<std::uint32_t>(traffic.below(n - 1));
          if (dv >= s.value) ++dv;
          create_session(s, NodeId(dv), cfg.packet_load);
          events.push(now + next_arrival_gap(), kSessionArrival);
          break;
        }
        case kScriptedSession: {
          const auto& sc = script.sessions[e.a];
          if (sc.source.value >= nodes.size() || sc.destination.value >= nodes.size() ||
              sc.source == sc.destination) {
            throw ConfigError("scripted session names an invalid node pair");
          }
          create_session(sc.source, sc.destination, sc.packets, sc.session_id);
          break;
        }
        case kCbr: on_cbr(static_cast<std::uint32_t>(e.a), e.b); break;
        case kDestWindow: on_dest_window(nodes[e.node], e.a); break;
        case kDiscoveryTimeout: on_discovery_timeout(static_cast<std::uint32_t>(e.a), e.b); break;
        case kRepairDeadline: on_repair_deadline(static_cast<std::uint32_t>(e.a), e.b); break;
        case kArbiterDecide: on_arbiter_decide(static_cast<std::uint32_t>(e.a)); break;
        case kBufferTimeout: on_buffer_timeout(nodes[e.node], static_cast<std::uint32_t>(e.a), e.b); break;
        case kPartitionCheck: on_partition_check(); break;
        case kFailure: kill(nodes[e.node]); break;
        default: break;
      }
    }
    now = cfg.sim_time;
    return finish();
  }

  MetricsReport finish() {
    std::int64_t tx = 0, rx = 0, hello = 0, drawn = 0;
    for (const auto& n : nodes) {
      tx += n.battery.consumed_nj(EnergyCategory::Tx);
      rx += n.battery.consumed_nj(EnergyCategory::Rx);
      hello += n.battery.consumed_nj(EnergyCategory::Hello);
      drawn += n.drawn_nj;
      if (n.battery.max_nj() - n.battery.residual_nj() != n.battery.consumed_total_nj() ||
          n.drawn_nj != n.battery.consumed_total_nj()) {
        ++rep.energy_ledger_mismatches;
      }
      rep.energy_per_node.push_back(static_cast<double>(n.battery.consumed_total_nj()) / kNanojoulesPerJoule);
      if (!n.alive) ++rep.dead_nodes;
      rep.death_times.push_back(n.alive ? -1 : n.death);
    }
    if (drawn != tx + rx + hello) ++rep.energy_ledger_mismatches;
    const double j = static_cast<double>(kNanojoulesPerJoule);
    rep.energy_tx = static_cast<double>(tx) / j;
    rep.energy_rx = static_cast<double>(rx) / j;
    rep.energy_hello = static_cast<double>(hello) / j;
    rep.energy_total = static_cast<double>(tx + rx + hello) / j;
    rep.energy_saved = saved_nj / j;

    rep.death_censored = first_death < 0;
    rep.first_node_death = first_death < 0 ? cfg.sim_time : first_death;
    rep.partition_censored = partition_at < 0;
    rep.partition_time = partition_at < 0 ? cfg.sim_time : partition_at;

    rep.delay_samples = static_cast<int>(delays.size());
    double sum = 0.0;
    for (double d : delays) sum += d;
    rep.mean_delay = delays.empty() ? 0.0 : sum / static_cast<double>(delays.size());

    std::array<std::int64_t, kStateCount> recount{};
    for (const auto& p : packets) ++recount[static_cast<int>(p.state)];
    auto c = [&](PState s) { return state_count[static_cast<int>(s)]; };
    rep.delivered = c(PState::Delivered);
    rep.in_flight = c(PState::AtSource) + c(PState::InTransit) + c(PState::Buffered);
    rep.dropped_queue = c(PState::DroppedQueue);
    rep.lost_collision = c(PState::LostCollision);
    rep.lost_dead_route = c(PState::LostDeadRoute);
    rep.conservation_mismatch = rep.offered - (rep.delivered + rep.in_flight + rep.dropped_queue +
                                               rep.lost_collision + rep.lost_dead_route);
    for (int i = 0; i < kStateCount; ++i) {
      if (recount[static_cast<std::size_t>(i)] != state_count[static_cast<std::size_t>(i)]) {
        rep.conservation_mismatch += std::abs(recount[static_cast<std::size_t>(i)] - state_count[static_cast<std::size_t>(i)]);
      }
    }
    if (rep.offered > 0) rep.throughput = static_cast<double>(rep.delivered) / static_cast<double>(rep.offered);
    return rep;
  }
};

Simulator::Simulator(ScenarioConfig cfg, Script script)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(script))) {}
Simulator::~Simulator() = default;

void Simulator::set_trace(std::ostream* out) { impl_->trace_out = out; }
void Simulator::keep_trace(bool on) { impl_->keep = on; }
void Simulator::set_trace_symbols(TupleSymbols symbols) {
  symbols.protocol = impl_->cfg.protocol;
  impl_->symbols = std::move(symbols);
}
const std::vector<TraceLine>& Simulator::trace() const { return impl_->lines; }

MetricsReport Simulator::run() { return impl_->run(); }

}  // namespace manet
