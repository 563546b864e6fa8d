// Control and data messages, their bit-exact wire encoding, and the
// message-size quantities used to compare HELLO-based and HELLO-free
// protocol variants.
//
// Wire format: fields are written most-significant-bit first in declaration
// order, the final byte is zero padded. Field widths come from a BitBudget:
//
//   message type           4 bits
//   node id                ceil(log2 N)
//   x / y coordinate       ceil(log2 X) / ceil(log2 Y), whole meters
//   radio range            ceil(log2 Rmax), whole meters
//   timestamp, session id  ceil(log2 TM), milliseconds
//   packet count / seq     ceil(log2 PAC), stored as value - 1
//   hop counts, list size  ceil(log2 N)  (the maximum hop count is N - 1)
//   MMBCR metric           32 bits, millijoules
//   MRPC metric            32 bits, whole packets
//   MTPR metric            1 presence bit + 32 bits, whole power units
//   receive power          16 bits, whole milliwatts

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "manet/core.hpp"

namespace manet {

class EncodingError : public Error {
 public:
  using Error::Error;
};

class DecodingError : public Error {
 public:
  using Error::Error;
};

enum class MessageType : std::uint8_t {
  FreshRreq = 1,
  RepairRreq = 2,
  Rrep = 3,
  LinkFail = 4,
  RepairRequest = 5,
  RepairPermission = 6,
  Hello = 7,
  NeighborAck = 8,  // reply to a HELLO (classical) or to a RREQ (HELLO-free)
  ProactiveAck = 9,
  Data = 10,
  DataAck = 11,
  DetectionRequest = 12,
  DetectionProbe = 13,
  NeighborInfo = 14,  // one-hop neighbours and live next hops, for exposed-terminal decisions
};

/// Which path metric a protocol carries in its RREQ.
enum class MetricKind { None, ResidualEnergy, PacketCapacity, TransmissionPower };

MetricKind metric_kind(Protocol p);

struct Rreq {
  MessageType type = MessageType::FreshRreq;
  NodeId source;
  Position source_location;
  NodeId destination;
  std::uint32_t session_id = 0;
  int number_of_data_packets = 0;
  NodeId initiator;
  int max_hop_count_difference = 0;
  std::vector<NodeId> router_sequence;
  std::vector<Position> router_locations;  // MFR only, parallel to router_sequence
  SimTime timestamp = 0;
  /// MMBCR: minimum residual energy (J); MRPC: residual packet capacity;
  /// MTPR: minimum per-hop transmission power, empty until the first hop.
  std::optional<double> metric;
  /// Directional flooding cone: apex (the initiator's location when it issued
  /// the request) and target (last known destination location). Present only
  /// on directional repair RREQs.
  struct Cone {
    Position apex;
    Position target;
    friend bool operator==(const Cone&, const Cone&) = default;
  };
  std::optional<Cone> cone;

  [[nodiscard]] SessionKey key() const { return {source, destination, session_id}; }
  /// Hops covered so far: one more than the number of appended routers.
  [[nodiscard]] int hop_count() const { return static_cast<int>(router_sequence.size()) + 1; }

  friend bool operator==(const Rreq&, const Rreq&) = default;
};

struct Rrep {
  NodeId destination;
  Position destination_location;
  NodeId source;
  std::uint32_t session_id = 0;
  NodeId initiator;
  int max_hop_count_difference = 0;
  int current_hop_count = 0;
  std::vector<NodeId> optimum_router_sequence;
  SimTime timestamp = 0;

  [[nodiscard]] SessionKey key() const { return {source, destination, session_id}; }
  friend bool operator==(const Rrep&, const Rrep&) = default;
};

struct LinkFail {
  NodeId source;
  NodeId destination;
  NodeId sender;       // node about to leave the predecessor's radio disk
  NodeId predecessor;
  std::uint32_t session_id = 0;

  friend bool operator==(const LinkFail&, const LinkFail&) = default;
};

struct RepairRequest {
  NodeId source;
  NodeId destination;
  std::uint32_t session_id = 0;
  SimTime link_break_timestamp = 0;
  NodeId initiator;
  SimTime recv_delay_source = 0;

  friend bool operator==(const RepairRequest&, const RepairRequest&) = default;
};

struct RepairPermission {
  NodeId source;
  NodeId destination;
  std::uint32_t session_id = 0;
  NodeId grantee;

  friend bool operator==(const RepairPermission&, const RepairPermission&) = default;
};

struct Hello {
  NodeId sender;
  Position sender_location;
  double radio_range = 0.0;
  SimTime timestamp = 0;

  friend bool operator==(const Hello&, const Hello&) = default;
};

struct NeighborAck {
  NodeId sender;
  NodeId target;
  Position sender_location;
  double radio_range = 0.0;
  SimTime timestamp = 0;

  friend bool operator==(const NeighborAck&, const NeighborAck&) = default;
};

struct ProactiveAck {
  NodeId sender;
  Position sender_location;
  double radio_range = 0.0;
  SimTime timestamp = 0;
  double minimum_receive_power = 0.0;  // mW

  friend bool operator==(const ProactiveAck&, const ProactiveAck&) = default;
};

struct DataPacket {
  NodeId source;
  NodeId destination;
  std::uint32_t session_id = 0;
  int packet_sequence_id = 1;

  friend bool operator==(const DataPacket&, const DataPacket&) = default;
};

struct DataAck {
  NodeId source;
  NodeId destination;
  std::uint32_t session_id = 0;
  int packet_sequence_id = 1;
  NodeId sender;

  friend bool operator==(const DataAck&, const DataAck&) = default;
};

struct DetectionRequest {
  NodeId sender;
  SimTime wait_interval = 0;
  SimTime timestamp = 0;

  friend bool operator==(const DetectionRequest&, const DetectionRequest&) = default;
};

struct DetectionProbe {
  NodeId sender;
  NodeId requester;
  SimTime timestamp = 0;

  friend bool operator==(const DetectionProbe&, const DetectionProbe&) = default;
};

struct NeighborInfo {
  struct Entry {
    NodeId id;
    Position location;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  NodeId sender;
  Position sender_location;
  std::vector<Entry> neighbors;
  std::vector<NodeId> next_hops;  // successors of live sessions through the sender

  friend bool operator==(const NeighborInfo&, const NeighborInfo&) = default;
};

using ControlMessage = std::variant<Rreq, Rrep, LinkFail, RepairRequest, RepairPermission, Hello, NeighborAck,
                                    ProactiveAck, DataPacket, DataAck, DetectionRequest, DetectionProbe,
                                    NeighborInfo>;

MessageType type_of(const ControlMessage& m);

// ---------------------------------------------------------------------------
// Bit budgets

/// ceil(log2 v) for v >= 1.
int ceil_log2(std::uint64_t v);

/// Network-wide quantities that fix field widths.
struct BitParams {
  std::uint64_t N = 2;      // node count
  std::uint64_t X = 2;      // area width, m
  std::uint64_t Y = 2;      // area height, m
  std::uint64_t R_min = 2;  // smallest radio range, m
  std::uint64_t R_max = 2;  // largest radio range, m
  std::uint64_t TM = 2;     // total simulated time, ms
  std::uint64_t PAC = 2;    // most data packets in one session
};

struct BitBudget {
  BitParams params;
  int type_bits = 4;
  int id_bits = 1;
  int x_bits = 1;
  int y_bits = 1;
  int range_bits = 1;
  int time_bits = 1;
  int pac_bits = 1;
  int count_bits = 1;

  static BitBudget from(const BitParams& p);
};

/// HELLO size: 3 + log2 N + log2 X + log2 Y + log2 Rmax + log2 TM, each log ceiled.
int bits_hello(const BitParams& p);

/// Extra bits a HELLO-free RREQ carries (initiator id and hop-count
/// difference): log2 X + log2 Y + log2 sqrt(X^2+Y^2) - 3 - log2 Rmin,
/// evaluated with real logs, ceiled, floored at zero.
int bits_add_rreq(const BitParams& p);

/// Link-fail size minus two data packets: -3 - log2 PAC - 2 log2 TM.
int bits_link_fail_delta(const BitParams& p);

/// Repair-permission size: 3 + 3 log2 N + log2 PAC.
int bits_repair_permission(const BitParams& p);

// ---------------------------------------------------------------------------
// Wire encoding

struct BitString {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;

  [[nodiscard]] std::string hex() const;
  friend bool operator==(const BitString&, const BitString&) = default;
};

struct WireContext {
  BitBudget budget;
  Protocol protocol = Protocol::AODV;
};

BitString encode(const ControlMessage& msg, const WireContext& ctx);
ControlMessage decode(const BitString& bits, const WireContext& ctx);

/// Encoded length in bits without materialising the bit string.
std::size_t encoded_size(const ControlMessage& msg, const WireContext& ctx);

// ---------------------------------------------------------------------------
// Tuple notation: <1, s, (X_s(100), Y_s(100)), d, 3, 5, s, 0, p, i, 108>

struct TupleSymbols {
  std::map<NodeId, std::string> nodes;
  std::vector<std::pair<Position, std::string>> positions;
  /// Label for a recv_delay_source value, keyed by the reporting router.
  std::map<NodeId, std::string> delays;
  /// Decides whether an RREQ without a metric prints a trailing "null" (MTPR).
  Protocol protocol = Protocol::AODV;
};

std::string format_tuple(const ControlMessage& msg, const TupleSymbols& symbols);

}  // namespace manet
