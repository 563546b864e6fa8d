// Routing logic shared by the ten protocol variants: neighbour and RREQ
// tables, RREQ origination and forwarding with per-protocol metrics,
// destination-side route selection, RREP handling, repair arbitration, and
// the hidden/exposed terminal procedures.
//
// Everything here is passive: functions take the state they need and return
// decisions. The engine owns the event loop and calls into this module.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "manet/core.hpp"
#include "manet/energy.hpp"
#include "manet/messages.hpp"
#include "manet/mobility.hpp"

namespace manet {

// ---------------------------------------------------------------------------
// Tables

struct NeighborEntry {
  Position location;
  double radio_range = 0.0;
  SimTime tmstmp = 0;
  double min_receive_power = 0.0;  // 0 when not yet reported
};

/// Downlink neighbours: nodes known to hear this node, learnt from ACKs.
class DownlinkNeighborTable {
 public:
  /// Keeps the newer of the stored and offered entries.
  void update(NodeId id, const NeighborEntry& e);
  [[nodiscard]] const NeighborEntry* find(NodeId id) const;
  void erase(NodeId id) { entries_.erase(id); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const std::map<NodeId, NeighborEntry>& entries() const { return entries_; }

 private:
  std::map<NodeId, NeighborEntry> entries_;
};

enum class Admission { Accept, Duplicate, Stale };

struct RreqTableEntry {
  Rreq rreq;
  NodeId predecessor;
  std::optional<Position> predecessor_location;
  SimTime received_at = 0;
};

/// Per (source, destination) pair, the newest session seen and every
/// discovery round of it (a round is a request type plus initiator). A
/// round is a duplicate while its entry is younger than the RREQ TTL; a
/// smaller session id is stale.
class RreqTable {
 public:
  Admission admit(const Rreq& r, NodeId predecessor, std::optional<Position> predecessor_location, SimTime now,
                  SimTime ttl);
  /// Most recent entry for exactly this session.
  [[nodiscard]] const RreqTableEntry* find(const SessionKey& key) const;
  [[nodiscard]] std::optional<std::uint32_t> newest_session(NodeId source, NodeId destination) const;

 private:
  struct PairState {
    std::uint32_t session_id = 0;
    std::vector<RreqTableEntry> rounds;
  };
  std::map<std::pair<NodeId, NodeId>, PairState> pairs_;
};

// ---------------------------------------------------------------------------
// Discovery

/// What a node knows about itself when it originates or relays a request.
struct NodeView {
  NodeId id;
  Position location;
  double residual_energy = 0.0;  // J
  double packet_energy = 0.0;    // J to transmit one data packet at full range
  double min_receive_power = 0.0;
  double radio_range = 0.0;
};

/// Residual packet capacity: whole data packets the residual energy pays for.
double f_eng(double residual_energy, double packet_energy);

enum class DropReason { None, Expired, HopLimit, Loop, Duplicate, StaleSession, OutsideCone };
const char* to_string(DropReason r);

struct ForwardContext {
  Protocol protocol = Protocol::AODV;
  int max_hop_count = 1;  // HC
  SimTime now = 0;
  SimTime ttl = 100;
  SimTime issued_at = 0;  // when the request left its initiator
  /// Friis power of the hop just traversed, measured by the receiver (MTPR).
  double hop_power = 0.0;
  double cone_half_angle_deg = 45.0;
  NodeId predecessor = kNoNode;
  std::optional<Position> predecessor_location;
};

Rreq originate_rreq(Protocol protocol, const NodeView& source, NodeId destination, std::uint32_t session_id,
                    int n_packets, SimTime now);

struct ForwardDecision {
  DropReason reason = DropReason::None;
  Rreq out;  // valid when reason == None
};

/// Relay-side processing: TTL, hop bound, loop and duplicate checks, then
/// append self and fold the node into the protocol metric.
ForwardDecision forward_rreq(const Rreq& in, const NodeView& self, const ForwardContext& ctx, RreqTable& table);

/// Hops from the initiator to the node that received `r`.
int hops_from_initiator(const Rreq& r);

struct Candidate {
  Rreq rreq;  // metric already includes the final hop where the protocol needs it
  SimTime arrival = 0;
};

struct CandidateDecision {
  DropReason reason = DropReason::None;
  Candidate candidate;
};

/// Destination-side acceptance of one arriving copy of a request.
CandidateDecision accept_at_destination(const Rreq& in, const NodeView& destination, const ForwardContext& ctx);

/// Index of the route the destination picks, or nullopt for an empty set.
/// AODV: fewest hops. MMBCR: largest minimum residual energy. MRPC: largest
/// f_Eng. MTPR: smallest recorded minimum hop power. MFR: lexicographically
/// largest vector of router (then destination) projections onto the
/// source-destination line. Ties: earliest arrival, then router sequence.
std::optional<std::size_t> select_route(Protocol protocol, const std::vector<Candidate>& candidates,
                                        Position source_location, Position destination_location);

/// Comparable score for one candidate; larger is better.
struct RouteScore {
  std::vector<double> key;
  [[nodiscard]] bool better_than(const RouteScore& o) const { return key > o.key; }
};
RouteScore route_score(Protocol protocol, const Candidate& c, Position source_location,
                       Position destination_location);

enum class RouteState { Discovering, Active, Repairing, Closed };

struct RouteRecord {
  SessionKey key;
  std::vector<NodeId> router_sequence;
  double metric_value = 0.0;
  int hop_count = 0;
  RouteState state = RouteState::Discovering;
  int packets_sent = 0;
  int packets_remaining = 0;
  SimTime recv_delay_source = 0;
};

RouteRecord make_route_record(const Candidate& c);

Rrep make_rrep(const Candidate& chosen, const NodeView& destination, SimTime now);

/// True when `point` lies inside the cone from `apex` toward `target`.
bool in_cone(Position apex, Position target, Position point, double half_angle_deg);

struct RrepForwardContext {
  int max_hop_count = 1;
  SimTime now = 0;
  SimTime ttl = 100;
  SimTime issued_at = 0;
  double cone_half_angle_deg = 45.0;
  /// Source location from this node's RREQ table, if it saw the request.
  std::optional<Position> source_location;
};

struct RrepDecision {
  DropReason reason = DropReason::None;
  Rrep out;
};

/// HELLO-free RREP relay: a directional flood from the destination toward
/// the source; nodes named in the route always relay. The caller dedupes
/// repeated copies.
RrepDecision forward_rrep(const Rrep& in, const NodeView& self, const RrepForwardContext& ctx);

/// Full path [source, routers..., destination] of a route.
std::vector<NodeId> full_path(NodeId source, const std::vector<NodeId>& routers, NodeId destination);

/// Neighbour of `self` on `path` toward the front (-1) or back (+1).
std::optional<NodeId> path_neighbor(const std::vector<NodeId>& path, NodeId self, int direction);

// ---------------------------------------------------------------------------
// Maintenance

LinkFail make_link_fail(const SessionKey& key, NodeId sender, NodeId predecessor);
RepairRequest make_repair_request(const SessionKey& key, SimTime link_break, NodeId initiator,
                                  SimTime recv_delay_source);

/// Source-side arbitration between routers asking to repair one session.
class RepairArbiter {
 public:
  struct Request {
    NodeId requester;
    int hops_from_source = 0;
    SimTime received_at = 0;
    SimTime recv_delay_source = 0;
    SimTime link_break_timestamp = 0;
  };
  struct Grant {
    NodeId grantee;
    SimTime granted_at = 0;
    SimTime recv_delay_source = 0;
    int hops_from_source = 0;
  };

  /// Queue a request; decide() settles everything queued for a tick at once.
  void submit(const Request& r);
  /// Grants issued for the requests queued so far.
  std::vector<NodeId> decide(SimTime now);

  /// Deadline after which the source rediscovers on its own:
  /// latest grant + delRoute + 2 TTL. Nullopt before any grant.
  [[nodiscard]] std::optional<SimTime> rediscovery_deadline(SimTime del_route, SimTime ttl) const;

  [[nodiscard]] const std::vector<Grant>& grants() const { return grants_; }
  [[nodiscard]] const std::vector<Request>& denied() const { return denied_; }
  [[nodiscard]] bool has_pending() const { return !pending_.empty(); }
  void reset();

 private:
  std::vector<Request> pending_;
  std::vector<Grant> grants_;
  std::vector<Request> denied_;
};

struct RepairDiscoveryInput {
  Protocol protocol = Protocol::AODV;
  SessionKey key;
  NodeView grantee;
  Position source_location;
  /// Routers from the first hop through the grantee; empty when the grantee is the source.
  std::vector<NodeId> prefix;
  std::vector<Position> prefix_locations;  // parallel to prefix, MFR only
  int remaining_packets = 1;
  std::optional<Position> destination_location;
  SimTime now = 0;
};

/// Directional RREQ issued by a router that was granted repair permission.
Rreq repair_discovery(const RepairDiscoveryInput& in);

ProactiveAck make_proactive_ack(const NodeView& self, SimTime now);
/// Updates the predecessor's view of its successor from a proactive ACK.
void on_proactive_ack(DownlinkNeighborTable& table, const ProactiveAck& ack);

/// Friis power for the next data packet to a neighbour at its cached
/// position plus `margin`, or the full-range power when nothing is cached.
double data_power(const PowerModel& pm, const RadioProfile& sender, Position sender_pos, const NeighborEntry* next,
                  double margin);

/// Lead time for proactive link-fail: two one-hop delays plus one
/// proactive-ACK period, so the message beats the breakage.
SimTime link_fail_lead(SimTime one_hop_delay, SimTime hello_interval);

// ---------------------------------------------------------------------------
// Hidden and exposed terminals

struct StaticTopology {
  std::vector<Position> positions;
  std::vector<RadioProfile> radios;

  [[nodiscard]] int size() const { return static_cast<int>(positions.size()); }
  /// `to` lies inside `from`'s radio disk.
  [[nodiscard]] bool hears(NodeId from, NodeId to) const;
  [[nodiscard]] std::vector<NodeId> neighbors(NodeId n) const;
};

enum class DetectionMode { Classical, MinusHello };

struct DetectionCost {
  int hello_rounds = 1;     // HELLO rounds the classical procedure relies on
  BitBudget budget;
  double channel_capacity = 2e6;
};

struct DetectionResult {
  std::set<std::pair<NodeId, NodeId>> hidden;  // ordered (smaller id first)
  double energy_joules = 0.0;
  int transmissions = 0;
  int receptions = 0;
};

DetectionResult detect_hidden_terminals(const StaticTopology& topo, NodeId node, DetectionMode mode,
                                        const DetectionCost& cost);

struct OngoingTransmission {
  NodeId sender;
  NodeId receiver = kNoNode;  // kNoNode for a broadcast
};

struct KnownNode {
  Position location;
  double radio_range = 0.0;
};

using LocationLookup = std::function<std::optional<KnownNode>(NodeId)>;

enum class ExposedDecision { Proceed, Defer };

/// Whether `self` may transmit to `intended_receiver` while `ongoing`
/// transmissions are sensed: proceed only if each ongoing transmission is a
/// unicast whose sender cannot reach our receiver and whose receiver our
/// signal cannot reach. Anything unknown defers.
ExposedDecision detect_exposed_transmission(NodeId self, const KnownNode& self_info, NodeId intended_receiver,
                                            const std::vector<OngoingTransmission>& ongoing,
                                            const LocationLookup& lookup);

}  // namespace manet
