#include "manet/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace manet {

// ---------------------------------------------------------------------------
// Tables

void DownlinkNeighborTable::update(NodeId id, const NeighborEntry& e) {
  auto [it, inserted] = entries_.try_emplace(id, e);
  if (!inserted && e.tmstmp >= it->second.tmstmp) {
    const double mrp = e.min_receive_power > 0.0 ? e.min_receive_power : it->second.min_receive_power;
    it->second = e;
    it->second.min_receive_power = mrp;
  }
}

const NeighborEntry* DownlinkNeighborTable::find(NodeId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

Admission RreqTable::admit(const Rreq& r, NodeId predecessor, std::optional<Position> predecessor_location,
                           SimTime now, SimTime ttl) {
  auto& st = pairs_[{r.source, r.destination}];
  RreqTableEntry entry{r, predecessor, predecessor_location, now};
  if (st.rounds.empty() || r.session_id > st.session_id) {
    st.session_id = r.session_id;
    st.rounds.clear();
    st.rounds.push_back(std::move(entry));
    return Admission::Accept;
  }
  if (r.session_id < st.session_id) return Admission::Stale;
  for (auto& round : st.rounds) {
    if (round.rreq.type == r.type && round.rreq.initiator == r.initiator) {
      if (now - round.received_at <= ttl) return Admission::Duplicate;
      round = std::move(entry);
      return Admission::Accept;
    }
  }
  st.rounds.push_back(std::move(entry));
  return Admission::Accept;
}

const RreqTableEntry* RreqTable::find(const SessionKey& key) const {
  auto it = pairs_.find({key.source, key.destination});
  if (it == pairs_.end() || it->second.session_id != key.session_id) return nullptr;
  const RreqTableEntry* best = nullptr;
  for (const auto& round : it->second.rounds) {
    if (!best || round.received_at >= best->received_at) best = &round;
  }
  return best;
}

std::optional<std::uint32_t> RreqTable::newest_session(NodeId source, NodeId destination) const {
  auto it = pairs_.find({source, destination});
  if (it == pairs_.end()) return std::nullopt;
  return it->second.session_id;
}

// ---------------------------------------------------------------------------
// Discovery

double f_eng(double residual_energy, double packet_energy) {
  if (!(packet_energy > 0.0)) throw InvalidParameter("packet energy must be positive");
  return std::floor(residual_energy / packet_energy + 1e-9);
}

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::None: return "none";
    case DropReason::Expired: return "expired";
    case DropReason::HopLimit: return "hop_limit";
    case DropReason::Loop: return "loop";
    case DropReason::Duplicate: return "duplicate";
    case DropReason::StaleSession: return "stale_session";
    case DropReason::OutsideCone: return "outside_cone";
  }
  return "?";
}

Rreq originate_rreq(Protocol protocol, const NodeView& source, NodeId destination, std::uint32_t session_id,
                    int n_packets, SimTime now) {
  Rreq r;
  r.type = MessageType::FreshRreq;
  r.source = source.id;
  r.source_location = source.location;
  r.destination = destination;
  r.session_id = session_id;
  r.number_of_data_packets = n_packets;
  r.initiator = source.id;
  r.max_hop_count_difference = 0;
  r.timestamp = now;
  switch (metric_kind(protocol)) {
    case MetricKind::ResidualEnergy: r.metric = source.residual_energy; break;
    case MetricKind::PacketCapacity: r.metric = f_eng(source.residual_energy, source.packet_energy); break;
    case MetricKind::TransmissionPower:
    case MetricKind::None: break;
  }
  return r;
}

int hops_from_initiator(const Rreq& r) {
  if (r.initiator != r.source) {
    auto it = std::find(r.router_sequence.begin(), r.router_sequence.end(), r.initiator);
    if (it != r.router_sequence.end()) {
      return static_cast<int>(r.router_sequence.end() - it);
    }
  }
  return r.hop_count();
}

namespace {

DropReason common_checks(const Rreq& in, NodeId self, const ForwardContext& ctx) {
  if (ctx.now - ctx.issued_at > ctx.ttl) return DropReason::Expired;
  if (hops_from_initiator(in) > ctx.max_hop_count - in.max_hop_count_difference) return DropReason::HopLimit;
  if (self == in.source) return DropReason::Loop;
  if (std::find(in.router_sequence.begin(), in.router_sequence.end(), self) != in.router_sequence.end()) {
    return DropReason::Loop;
  }
  return DropReason::None;
}

void fold_metric(Protocol protocol, Rreq& r, const NodeView& self, double hop_power, bool include_self) {
  switch (metric_kind(protocol)) {
    case MetricKind::ResidualEnergy:
      if (include_self) r.metric = std::min(r.metric.value_or(self.residual_energy), self.residual_energy);
      break;
    case MetricKind::PacketCapacity:
      if (include_self) {
        const double f = f_eng(self.residual_energy, self.packet_energy);
        r.metric = std::min(r.metric.value_or(f), f);
      }
      break;
    case MetricKind::TransmissionPower: r.metric = std::min(r.metric.value_or(hop_power), hop_power); break;
    case MetricKind::None: break;
  }
}

}  // namespace

ForwardDecision forward_rreq(const Rreq& in, const NodeView& self, const ForwardContext& ctx, RreqTable& table) {
  ForwardDecision d;
  d.reason = common_checks(in, self.id, ctx);
  if (d.reason != DropReason::None) return d;
  switch (table.admit(in, ctx.predecessor, ctx.predecessor_location, ctx.now, ctx.ttl)) {
    case Admission::Duplicate: d.reason = DropReason::Duplicate; return d;
    case Admission::Stale: d.reason = DropReason::StaleSession; return d;
    case Admission::Accept: break;
  }
  if (in.cone && !in_cone(in.cone->apex, in.cone->target, self.location, ctx.cone_half_angle_deg)) {
    d.reason = DropReason::OutsideCone;
    return d;
  }
  d.out = in;
  d.out.router_sequence.push_back(self.id);
  if (ctx.protocol == Protocol::MFR) d.out.router_locations.push_back(self.location);
  d.out.timestamp = ctx.now;
  fold_metric(ctx.protocol, d.out, self, ctx.hop_power, true);
  return d;
}

CandidateDecision accept_at_destination(const Rreq& in, const NodeView& destination, const ForwardContext& ctx) {
  CandidateDecision d;
  if (in.destination != destination.id) {
    d.reason = DropReason::Loop;
    return d;
  }
  d.reason = common_checks(in, destination.id, ctx);
  if (d.reason != DropReason::None) return d;
  d.candidate.rreq = in;
  d.candidate.arrival = ctx.now;
  fold_metric(ctx.protocol, d.candidate.rreq, destination, ctx.hop_power, false);
  return d;
}

namespace {

double projection(Position s, Position d, Position p) {
  const double ax = d.x - s.x;
  const double ay = d.y - s.y;
  const double len = std::hypot(ax, ay);
  if (len == 0.0) return 0.0;
  return ((p.x - s.x) * ax + (p.y - s.y) * ay) / len;
}

}  // namespace

RouteScore route_score(Protocol protocol, const Candidate& c, Position source_location,
                       Position destination_location) {
  RouteScore s;
  const Rreq& r = c.rreq;
  switch (protocol) {
    case Protocol::AODV: s.key = {-static_cast<double>(r.hop_count())}; break;
    case Protocol::MMBCR:
    case Protocol::MRPC: s.key = {r.metric.value_or(-std::numeric_limits<double>::infinity())}; break;
    case Protocol::MTPR: s.key = {-r.metric.value_or(std::numeric_limits<double>::infinity())}; break;
    case Protocol::MFR:
      for (const auto& p : r.router_locations) s.key.push_back(projection(source_location, destination_location, p));
      s.key.push_back(projection(source_location, destination_location, destination_location));
      break;
  }
  return s;
}

std::optional<std::size_t> select_route(Protocol protocol, const std::vector<Candidate>& candidates,
                                        Position source_location, Position destination_location) {
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  RouteScore best_score = route_score(protocol, candidates[0], source_location, destination_location);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    RouteScore s = route_score(protocol, candidates[i], source_location, destination_location);
    const Candidate& a = candidates[i];
    const Candidate& b = candidates[best];
    bool take = false;
    if (s.key != best_score.key) {
      take = s.better_than(best_score);
    } else if (a.arrival != b.arrival) {
      take = a.arrival < b.arrival;
    } else {
      take = a.rreq.router_sequence < b.rreq.router_sequence;
    }
    if (take) {
      best = i;
      best_score = std::move(s);
    }
  }
  return best;
}

RouteRecord make_route_record(const Candidate& c) {
  RouteRecord rec;
  rec.key = c.rreq.key();
  rec.router_sequence = c.rreq.router_sequence;
  rec.metric_value = c.rreq.metric.value_or(static_cast<double>(c.rreq.hop_count()));
  rec.hop_count = c.rreq.hop_count();
  rec.state = RouteState::Active;
  rec.packets_remaining = c.rreq.number_of_data_packets;
  return rec;
}

Rrep make_rrep(const Candidate& chosen, const NodeView& destination, SimTime now) {
  Rrep p;
  p.destination = destination.id;
  p.destination_location = destination.location;
  p.source = chosen.rreq.source;
  p.session_id = chosen.rreq.session_id;
  p.initiator = destination.id;
  p.max_hop_count_difference = 0;
  p.current_hop_count = 0;
  p.optimum_router_sequence = chosen.rreq.router_sequence;
  p.timestamp = now;
  return p;
}

bool in_cone(Position apex, Position target, Position point, double half_angle_deg) {
  const double ax = target.x - apex.x;
  const double ay = target.y - apex.y;
  const double px = point.x - apex.x;
  const double py = point.y - apex.y;
  const double la = std::hypot(ax, ay);
  const double lp = std::hypot(px, py);
  if (la == 0.0 || lp == 0.0) return true;
  const double cosang = (ax * px + ay * py) / (la * lp);
  return cosang >= std::cos(half_angle_deg * std::numbers::pi / 180.0) - 1e-12;
}

RrepDecision forward_rrep(const Rrep& in, const NodeView& self, const RrepForwardContext& ctx) {
  RrepDecision d;
  if (ctx.now - ctx.issued_at > ctx.ttl) {
    d.reason = DropReason::Expired;
    return d;
  }
  if (in.current_hop_count + 1 > ctx.max_hop_count) {
    d.reason = DropReason::HopLimit;
    return d;
  }
  if (self.id == in.destination) {
    d.reason = DropReason::Loop;
    return d;
  }
  const auto& seq = in.optimum_router_sequence;
  const bool on_route = std::find(seq.begin(), seq.end(), self.id) != seq.end();
  if (!on_route) {
    if (!ctx.source_location ||
        !in_cone(in.destination_location, *ctx.source_location, self.location, ctx.cone_half_angle_deg)) {
      d.reason = DropReason::OutsideCone;
      return d;
    }
  }
  d.out = in;
  d.out.current_hop_count += 1;
  return d;
}

std::vector<NodeId> full_path(NodeId source, const std::vector<NodeId>& routers, NodeId destination) {
  std::vector<NodeId> p;
  p.reserve(routers.size() + 2);
  p.push_back(source);
  p.insert(p.end(), routers.begin(), routers.end());
  p.push_back(destination);
  return p;
}

std::optional<NodeId> path_neighbor(const std::vector<NodeId>& path, NodeId self, int direction) {
  auto it = std::find(path.begin(), path.end(), self);
  if (it == path.end()) return std::nullopt;
  const auto idx = static_cast<std::ptrdiff_t>(it - path.begin()) + direction;
  if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(path.size())) return std::nullopt;
  return path[static_cast<std::size_t>(idx)];
}

// ---------------------------------------------------------------------------
// Maintenance

LinkFail make_link_fail(const SessionKey& key, NodeId sender, NodeId predecessor) {
  if (sender == predecessor) throw InvalidParameter("link-fail sender and predecessor must differ");
  return {key.source, key.destination, sender, predecessor, key.session_id};
}

RepairRequest make_repair_request(const SessionKey& key, SimTime link_break, NodeId initiator,
                                  SimTime recv_delay_source) {
  return {key.source, key.destination, key.session_id, link_break, initiator, recv_delay_source};
}

void RepairArbiter::submit(const Request& r) { pending_.push_back(r); }

std::vector<NodeId> RepairArbiter::decide(SimTime now) {
  std::vector<NodeId> out;
  std::stable_sort(pending_.begin(), pending_.end(), [](const Request& a, const Request& b) {
    if (a.hops_from_source != b.hops_from_source) return a.hops_from_source < b.hops_from_source;
    return a.requester < b.requester;
  });
  for (const Request& r : pending_) {
    bool grant = false;
    if (grants_.empty()) {
      grant = true;  // the closest of the simultaneous requests comes first
    } else {
      const Grant& last = grants_.back();
      bool closer_than_all = true;
      for (const Grant& g : grants_) {
        if (r.hops_from_source >= g.hops_from_source) closer_than_all = false;
      }
      // A closer router whose request arrives before the farther grantee can
      // have acted on its permission also gets one.
      grant = closer_than_all && r.received_at <= last.granted_at + 2 * last.recv_delay_source;
    }
    if (grant) {
      grants_.push_back({r.requester, now, r.recv_delay_source, r.hops_from_source});
      out.push_back(r.requester);
    } else {
      denied_.push_back(r);
    }
  }
  pending_.clear();
  return out;
}

std::optional<SimTime> RepairArbiter::rediscovery_deadline(SimTime del_route, SimTime ttl) const {
  if (grants_.empty()) return std::nullopt;
  return grants_.back().granted_at + del_route + 2 * ttl;
}

void RepairArbiter::reset() {
  pending_.clear();
  grants_.clear();
  denied_.clear();
}

Rreq repair_discovery(const RepairDiscoveryInput& in) {
  Rreq r = originate_rreq(in.protocol, in.grantee, in.key.destination, in.key.session_id, in.remaining_packets,
                          in.now);
  r.type = MessageType::RepairRreq;
  r.source = in.key.source;
  r.source_location = in.source_location;
  if (in.grantee.id == in.key.source) return r;
  r.router_sequence = in.prefix;
  if (in.protocol == Protocol::MFR) {
    r.router_locations = in.prefix_locations;
    r.router_locations.resize(r.router_sequence.size(), in.grantee.location);
  }
  r.max_hop_count_difference = static_cast<int>(in.prefix.size());  // Z routers before the grantee, plus one
  if (in.destination_location) r.cone = Rreq::Cone{in.grantee.location, *in.destination_location};
  return r;
}

ProactiveAck make_proactive_ack(const NodeView& self, SimTime now) {
  return {self.id, self.location, self.radio_range, now, self.min_receive_power};
}

void on_proactive_ack(DownlinkNeighborTable& table, const ProactiveAck& ack) {
  table.update(ack.sender, {ack.sender_location, ack.radio_range, ack.timestamp, ack.minimum_receive_power});
}

double data_power(const PowerModel& pm, const RadioProfile& sender, Position sender_pos, const NeighborEntry* next,
                  double margin) {
  if (!next) return pm.full_power(sender);
  const double mrp = next->min_receive_power > 0.0 ? next->min_receive_power : pm.reference_receive_power();
  const double d = distance(sender_pos, next->location) + margin;
  return std::min(pm.full_power(sender), pm.unicast_power(mrp, d));
}

SimTime link_fail_lead(SimTime one_hop_delay, SimTime hello_interval) {
  return 2 * one_hop_delay + hello_interval;
}

// ---------------------------------------------------------------------------
// Hidden and exposed terminals

bool StaticTopology::hears(NodeId from, NodeId to) const {
  if (from == to) return false;
  return distance(positions.at(from.value), positions.at(to.value)) <= radios.at(from.value).radio_range;
}

std::vector<NodeId> StaticTopology::neighbors(NodeId n) const {
  std::vector<NodeId> out;
  for (int i = 0; i < size(); ++i) {
    NodeId m{static_cast<std::uint32_t>(i)};
    if (hears(n, m) && hears(m, n)) out.push_back(m);
  }
  return out;
}

namespace {

struct Ledger {
  const StaticTopology& topo;
  double capacity;
  DetectionResult& res;

  double ms(std::size_t bits) const { return static_cast<double>(bits) / capacity * 1000.0; }

  void tx(NodeId n, std::size_t bits) {
    res.energy_joules += topo.radios[n.value].tx_power * ms(bits) / 1e6;
    ++res.transmissions;
  }
  void rx(NodeId n, std::size_t bits) {
    res.energy_joules += topo.radios[n.value].min_receive_power * ms(bits) / 1e6;
    ++res.receptions;
  }
  /// Unicast: only the addressee pays to receive. Returns delivery.
  bool unicast(NodeId from, NodeId to, std::size_t bits) {
    tx(from, bits);
    if (!topo.hears(from, to)) return false;
    rx(to, bits);
    return true;
  }
  /// Broadcast: every node inside the sender's disk receives. Returns receivers.
  std::vector<NodeId> broadcast(NodeId from, std::size_t bits) {
    tx(from, bits);
    std::vector<NodeId> got;
    for (int i = 0; i < topo.size(); ++i) {
      NodeId m{static_cast<std::uint32_t>(i)};
      if (topo.hears(from, m)) {
        rx(m, bits);
        got.push_back(m);
      }
    }
    return got;
  }
};

std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

DetectionResult detect_hidden_terminals(const StaticTopology& topo, NodeId node, DetectionMode mode,
                                        const DetectionCost& cost) {
  DetectionResult res;
  Ledger L{topo, cost.channel_capacity, res};
  const WireContext wire{cost.budget, Protocol::AODV};
  const std::size_t req_bits = encoded_size(DetectionRequest{node, 0, 0}, wire);
  const std::size_t probe_bits = encoded_size(DetectionProbe{node, node, 0}, wire);
  const std::size_t ack_bits = encoded_size(NeighborAck{node, node, {}, 0.0, 0}, wire);
  const std::size_t hello_bits = encoded_size(Hello{node, {}, 0.0, 0}, wire);

  const std::vector<NodeId> nbrs = topo.neighbors(node);

  if (mode == DetectionMode::Classical) {
    // Neighbour lists come from HELLO rounds run by every involved node.
    std::vector<NodeId> involved = nbrs;
    involved.push_back(node);
    for (int round = 0; round < cost.hello_rounds; ++round) {
      for (NodeId i : involved) {
        for (NodeId j : L.broadcast(i, hello_bits)) L.unicast(j, i, ack_bits);
      }
    }
    for (NodeId n : nbrs) L.unicast(node, n, req_bits);
    for (NodeId n : nbrs) {
      for (NodeId m : nbrs) {
        if (m == n) continue;
        if (L.unicast(n, m, probe_bits)) {
          L.unicast(m, n, ack_bits);
        } else {
          res.hidden.insert(ordered(n, m));
        }
      }
    }
  } else {
    L.broadcast(node, req_bits);
    for (NodeId n : nbrs) {
      const std::vector<NodeId> heard = L.broadcast(n, probe_bits);
      for (NodeId m : nbrs) {
        if (m == n) continue;
        if (std::find(heard.begin(), heard.end(), m) != heard.end()) {
          L.unicast(m, n, ack_bits);
        } else {
          res.hidden.insert(ordered(n, m));
        }
      }
    }
  }
  return res;
}

ExposedDecision detect_exposed_transmission(NodeId self, const KnownNode& self_info, NodeId intended_receiver,
                                            const std::vector<OngoingTransmission>& ongoing,
                                            const LocationLookup& lookup) {
  if (ongoing.empty()) return ExposedDecision::Proceed;
  if (intended_receiver == kNoNode) return ExposedDecision::Defer;
  const auto receiver = lookup(intended_receiver);
  if (!receiver) return ExposedDecision::Defer;
  for (const auto& tx : ongoing) {
    if (tx.receiver == kNoNode || tx.sender == self) return ExposedDecision::Defer;
    if (tx.receiver == intended_receiver || tx.sender == intended_receiver || tx.receiver == self) {
      return ExposedDecision::Defer;
    }
    const auto sender = lookup(tx.sender);
    const auto their_receiver = lookup(tx.receiver);
    if (!sender || !their_receiver) return ExposedDecision::Defer;
    // Their signal must not reach our receiver, and ours must not reach theirs.
    if (distance(sender->location, receiver->location) <= sender->radio_range) return ExposedDecision::Defer;
    if (distance(self_info.location, their_receiver->location) <= self_info.radio_range) {
      return ExposedDecision::Defer;
    }
  }
  return ExposedDecision::Proceed;
}

}  // namespace manet
