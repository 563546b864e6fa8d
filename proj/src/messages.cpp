#include "manet/messages.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <type_traits>

namespace manet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class BitWriter {
 public:
  explicit BitWriter(bool counting_only = false) : counting_(counting_only) {}

  void put(std::uint64_t value, int width, const char* field) {
    if (width < 64 && (value >> width) != 0) {
      throw EncodingError(std::string("field '") + field + "' value " + std::to_string(value) +
                          " does not fit in " + std::to_string(width) + " bits");
    }
    if (counting_) {
      bits_ += static_cast<std::size_t>(width);
      return;
    }
    for (int i = width - 1; i >= 0; --i) {
      const std::size_t byte = bits_ / 8;
      if (byte >= out_.bytes.size()) out_.bytes.push_back(0);
      if ((value >> i) & 1u) out_.bytes[byte] |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
      ++bits_;
    }
  }

  void put_signed_checked(std::int64_t value, int width, const char* field) {
    if (value < 0) throw EncodingError(std::string("field '") + field + "' is negative");
    put(static_cast<std::uint64_t>(value), width, field);
  }

  [[nodiscard]] std::size_t size() const { return bits_; }

  BitString finish() {
    out_.bit_count = bits_;
    return std::move(out_);
  }

 private:
  bool counting_;
  std::size_t bits_ = 0;
  BitString out_;
};

class BitReader {
 public:
  explicit BitReader(const BitString& s) : s_(s) {
    if (s.bytes.size() * 8 < s.bit_count) throw DecodingError("bit string shorter than its declared length");
  }

  std::uint64_t get(int width, const char* field) {
    if (pos_ + static_cast<std::size_t>(width) > s_.bit_count) {
      throw DecodingError(std::string("truncated bit string while reading '") + field + "'");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      const bool bit = (s_.bytes[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
      v = (v << 1) | (bit ? 1u : 0u);
      ++pos_;
    }
    return v;
  }

  [[nodiscard]] std::size_t remaining() const { return s_.bit_count - pos_; }

 private:
  const BitString& s_;
  std::size_t pos_ = 0;
};

std::uint64_t to_whole(double v, const char* field) {
  if (!(v >= -0.5)) throw EncodingError(std::string("field '") + field + "' is negative");
  return static_cast<std::uint64_t>(std::llround(v));
}

// Field helpers shared by encoder and decoder so the two stay symmetric.
struct Fields {
  const WireContext& ctx;
  const BitBudget& b = ctx.budget;

  void id(BitWriter& w, NodeId n, const char* f) const { w.put(n.value, b.id_bits, f); }
  NodeId id(BitReader& r, const char* f) const { return NodeId{static_cast<std::uint32_t>(r.get(b.id_bits, f))}; }

  void pos(BitWriter& w, const Position& p, const char* f) const {
    w.put(to_whole(p.x, f), b.x_bits, f);
    w.put(to_whole(p.y, f), b.y_bits, f);
  }
  Position pos(BitReader& r, const char* f) const {
    const auto x = static_cast<double>(r.get(b.x_bits, f));
    const auto y = static_cast<double>(r.get(b.y_bits, f));
    return {x, y};
  }

  void time(BitWriter& w, SimTime t, const char* f) const { w.put_signed_checked(t, b.time_bits, f); }
  SimTime time(BitReader& r, const char* f) const { return static_cast<SimTime>(r.get(b.time_bits, f)); }

  void session(BitWriter& w, std::uint32_t s, const char* f) const { w.put(s, b.time_bits, f); }
  std::uint32_t session(BitReader& r, const char* f) const {
    return static_cast<std::uint32_t>(r.get(b.time_bits, f));
  }

  void packets(BitWriter& w, int n, const char* f) const {
    if (n < 1) throw EncodingError(std::string("field '") + f + "' must be at least 1");
    w.put(static_cast<std::uint64_t>(n - 1), b.pac_bits, f);
  }
  int packets(BitReader& r, const char* f) const { return static_cast<int>(r.get(b.pac_bits, f)) + 1; }

  void count(BitWriter& w, std::int64_t n, const char* f) const { w.put_signed_checked(n, b.count_bits, f); }
  int count(BitReader& r, const char* f) const { return static_cast<int>(r.get(b.count_bits, f)); }

  void range(BitWriter& w, double rr, const char* f) const { w.put(to_whole(rr, f), b.range_bits, f); }
  double range(BitReader& r, const char* f) const { return static_cast<double>(r.get(b.range_bits, f)); }
};

void write_type(BitWriter& w, const BitBudget& b, MessageType t) {
  w.put(static_cast<std::uint64_t>(t), b.type_bits, "message_type_id");
}

void write_message(BitWriter& w, const ControlMessage& msg, const WireContext& ctx) {
  const Fields F{ctx};
  const BitBudget& b = ctx.budget;
  write_type(w, b, type_of(msg));
  std::visit(
      overloaded{
          [&](const Rreq& m) {
            F.id(w, m.source, "source_id");
            F.pos(w, m.source_location, "source_location");
            F.id(w, m.destination, "destination_id");
            F.session(w, m.session_id, "session_id");
            F.packets(w, m.number_of_data_packets, "number_of_data_packets");
            F.id(w, m.initiator, "initiator_id");
            F.count(w, m.max_hop_count_difference, "maximum_hop_count_difference");
            F.count(w, static_cast<std::int64_t>(m.router_sequence.size()), "router_sequence");
            const bool with_locations = ctx.protocol == Protocol::MFR;
            if (with_locations && m.router_locations.size() != m.router_sequence.size()) {
              throw EncodingError("field 'router_sequence' needs one location per router for MFR");
            }
            for (std::size_t i = 0; i < m.router_sequence.size(); ++i) {
              F.id(w, m.router_sequence[i], "router_sequence");
              if (with_locations) F.pos(w, m.router_locations[i], "router_location");
            }
            F.time(w, m.timestamp, "timestamp");
            switch (metric_kind(ctx.protocol)) {
              case MetricKind::None: break;
              case MetricKind::ResidualEnergy:
                w.put(to_whole(m.metric.value_or(0.0) * 1000.0, "minimum_residual_energy"), 32,
                      "minimum_residual_energy");
                break;
              case MetricKind::PacketCapacity:
                w.put(to_whole(m.metric.value_or(0.0), "f_eng"), 32, "f_eng");
                break;
              case MetricKind::TransmissionPower:
                w.put(m.metric ? 1 : 0, 1, "minimum_transmission_power");
                if (m.metric) w.put(to_whole(*m.metric, "minimum_transmission_power"), 32, "minimum_transmission_power");
                break;
            }
            if (m.type == MessageType::RepairRreq) {
              w.put(m.cone ? 1 : 0, 1, "cone");
              if (m.cone) {
                F.pos(w, m.cone->apex, "cone_apex");
                F.pos(w, m.cone->target, "cone_target");
              }
            }
          },
          [&](const Rrep& m) {
            F.id(w, m.destination, "destination_id");
            F.pos(w, m.destination_location, "destination_location");
            F.id(w, m.source, "source_id");
            F.session(w, m.session_id, "session_id");
            F.id(w, m.initiator, "initiator_id");
            F.count(w, m.max_hop_count_difference, "maximum_hop_count_difference");
            F.count(w, m.current_hop_count, "current_hop_count");
            F.count(w, static_cast<std::int64_t>(m.optimum_router_sequence.size()), "optimum_router_sequence");
            for (NodeId n : m.optimum_router_sequence) F.id(w, n, "optimum_router_sequence");
            F.time(w, m.timestamp, "timestamp");
          },
          [&](const LinkFail& m) {
            F.id(w, m.source, "source_id");
            F.id(w, m.destination, "destination_id");
            F.id(w, m.sender, "sender_id");
            F.id(w, m.predecessor, "predecessor_id");
            F.session(w, m.session_id, "session_id");
          },
          [&](const RepairRequest& m) {
            F.id(w, m.source, "source_id");
            F.id(w, m.destination, "destination_id");
            F.session(w, m.session_id, "session_id");
            F.time(w, m.link_break_timestamp, "link_break_timestamp");
            F.id(w, m.initiator, "initiator_id");
            F.time(w, m.recv_delay_source, "recv_delay_source");
          },
          [&](const RepairPermission& m) {
            F.id(w, m.source, "source_id");
            F.id(w, m.destination, "destination_id");
            F.session(w, m.session_id, "session_id");
            F.id(w, m.grantee, "grantee_id");
          },
          [&](const Hello& m) {
            F.id(w, m.sender, "sender_id");
            F.pos(w, m.sender_location, "sender_location");
            F.range(w, m.radio_range, "radio_range");
            F.time(w, m.timestamp, "timestamp");
          },
          [&](const NeighborAck& m) {
            F.id(w, m.sender, "sender_id");
            F.id(w, m.target, "target_id");
            F.pos(w, m.sender_location, "sender_location");
            F.range(w, m.radio_range, "radio_range");
            F.time(w, m.timestamp, "timestamp");
          },
          [&](const ProactiveAck& m) {
            F.id(w, m.sender, "sender_id");
            F.pos(w, m.sender_location, "sender_location");
            F.range(w, m.radio_range, "radio_range");
            F.time(w, m.timestamp, "timestamp");
            w.put(to_whole(m.minimum_receive_power, "minimum_receive_power"), 16, "minimum_receive_power");
          },
          [&](const DataPacket& m) {
            F.id(w, m.source, "source_id");
            F.id(w, m.destination, "destination_id");
            F.session(w, m.session_id, "session_id");
            F.packets(w, m.packet_sequence_id, "packet_sequence_id");
          },
          [&](const DataAck& m) {
            F.id(w, m.source, "source_id");
            F.id(w, m.destination, "destination_id");
            F.session(w, m.session_id, "session_id");
            F.packets(w, m.packet_sequence_id, "packet_sequence_id");
            F.id(w, m.sender, "sender_id");
          },
          [&](const DetectionRequest& m) {
            F.id(w, m.sender, "sender_id");
            F.time(w, m.wait_interval, "wait_interval");
            F.time(w, m.timestamp, "timestamp");
          },
          [&](const DetectionProbe& m) {
            F.id(w, m.sender, "sender_id");
            F.id(w, m.requester, "requester_id");
            F.time(w, m.timestamp, "timestamp");
          },
          [&](const NeighborInfo& m) {
            F.id(w, m.sender, "sender_id");
            F.pos(w, m.sender_location, "sender_location");
            F.count(w, static_cast<std::int64_t>(m.neighbors.size()), "neighbors");
            for (const auto& e : m.neighbors) {
              F.id(w, e.id, "neighbor_id");
              F.pos(w, e.location, "neighbor_location");
            }
            F.count(w, static_cast<std::int64_t>(m.next_hops.size()), "next_hops");
            for (NodeId n : m.next_hops) F.id(w, n, "next_hop");
          },
      },
      msg);
}

ControlMessage read_message(BitReader& r, const WireContext& ctx) {
  const Fields F{ctx};
  const auto raw_type = r.get(ctx.budget.type_bits, "message_type_id");
  switch (static_cast<MessageType>(raw_type)) {
    case MessageType::FreshRreq:
    case MessageType::RepairRreq: {
      Rreq m;
      m.type = static_cast<MessageType>(raw_type);
      m.source = F.id(r, "source_id");
      m.source_location = F.pos(r, "source_location");
      m.destination = F.id(r, "destination_id");
      m.session_id = F.session(r, "session_id");
      m.number_of_data_packets = F.packets(r, "number_of_data_packets");
      m.initiator = F.id(r, "initiator_id");
      m.max_hop_count_difference = F.count(r, "maximum_hop_count_difference");
      const int n = F.count(r, "router_sequence");
      const bool with_locations = ctx.protocol == Protocol::MFR;
      for (int i = 0; i < n; ++i) {
        m.router_sequence.push_back(F.id(r, "router_sequence"));
        if (with_locations) m.router_locations.push_back(F.pos(r, "router_location"));
      }
      m.timestamp = F.time(r, "timestamp");
      switch (metric_kind(ctx.protocol)) {
        case MetricKind::None: break;
        case MetricKind::ResidualEnergy:
          m.metric = static_cast<double>(r.get(32, "minimum_residual_energy")) / 1000.0;
          break;
        case MetricKind::PacketCapacity: m.metric = static_cast<double>(r.get(32, "f_eng")); break;
        case MetricKind::TransmissionPower:
          if (r.get(1, "minimum_transmission_power")) {
            m.metric = static_cast<double>(r.get(32, "minimum_transmission_power"));
          }
          break;
      }
      if (m.type == MessageType::RepairRreq && r.get(1, "cone")) {
        Rreq::Cone c;
        c.apex = F.pos(r, "cone_apex");
        c.target = F.pos(r, "cone_target");
        m.cone = c;
      }
      return m;
    }
    case MessageType::Rrep: {
      Rrep m;
      m.destination = F.id(r, "destination_id");
      m.destination_location = F.pos(r, "destination_location");
      m.source = F.id(r, "source_id");
      m.session_id = F.session(r, "session_id");
      m.initiator = F.id(r, "initiator_id");
      m.max_hop_count_difference = F.count(r, "maximum_hop_count_difference");
      m.current_hop_count = F.count(r, "current_hop_count");
      const int n = F.count(r, "optimum_router_sequence");
      for (int i = 0; i < n; ++i) m.optimum_router_sequence.push_back(F.id(r, "optimum_router_sequence"));
      m.timestamp = F.time(r, "timestamp");
      return m;
    }
    case MessageType::LinkFail: {
      LinkFail m;
      m.source = F.id(r, "source_id");
      m.destination = F.id(r, "destination_id");
      m.sender = F.id(r, "sender_id");
      m.predecessor = F.id(r, "predecessor_id");
      m.session_id = F.session(r, "session_id");
      return m;
    }
    case MessageType::RepairRequest: {
      RepairRequest m;
      m.source = F.id(r, "source_id");
      m.destination = F.id(r, "destination_id");
      m.session_id = F.session(r, "session_id");
      m.link_break_timestamp = F.time(r, "link_break_timestamp");
      m.initiator = F.id(r, "initiator_id");
      m.recv_delay_source = F.time(r, "recv_delay_source");
      return m;
    }
    case MessageType::RepairPermission: {
      RepairPermission m;
      m.source = F.id(r, "source_id");
      m.destination = F.id(r, "destination_id");
      m.session_id = F.session(r, "session_id");
      m.grantee = F.id(r, "grantee_id");
      return m;
    }
    case MessageType::Hello: {
      Hello m;
      m.sender = F.id(r, "sender_id");
      m.sender_location = F.pos(r, "sender_location");
      m.radio_range = F.range(r, "radio_range");
      m.timestamp = F.time(r, "timestamp");
      return m;
    }
    case MessageType::NeighborAck: {
      NeighborAck m;
      m.sender = F.id(r, "sender_id");
      m.target = F.id(r, "target_id");
      m.sender_location = F.pos(r, "sender_location");
      m.radio_range = F.range(r, "radio_range");
      m.timestamp = F.time(r, "timestamp");
      return m;
    }
    case MessageType::ProactiveAck: {
      ProactiveAck m;
      m.sender = F.id(r, "sender_id");
      m.sender_location = F.pos(r, "sender_location");
      m.radio_range = F.range(r, "radio_range");
      m.timestamp = F.time(r, "timestamp");
      m.minimum_receive_power = static_cast<double>(r.get(16, "minimum_receive_power"));
      return m;
    }
    case MessageType::Data: {
      DataPacket m;
      m.source = F.id(r, "source_id");
      m.destination = F.id(r, "destination_id");
      m.session_id = F.session(r, "session_id");
      m.packet_sequence_id = F.packets(r, "packet_sequence_id");
      return m;
    }
    case MessageType::DataAck: {
      DataAck m;
      m.source = F.id(r, "source_id");
      m.destination = F.id(r, "destination_id");
      m.session_id = F.session(r, "session_id");
      m.packet_sequence_id = F.packets(r, "packet_sequence_id");
      m.sender = F.id(r, "sender_id");
      return m;
    }
    case MessageType::DetectionRequest: {
      DetectionRequest m;
      m.sender = F.id(r, "sender_id");
      m.wait_interval = F.time(r, "wait_interval");
      m.timestamp = F.time(r, "timestamp");
      return m;
    }
    case MessageType::DetectionProbe: {
      DetectionProbe m;
      m.sender = F.id(r, "sender_id");
      m.requester = F.id(r, "requester_id");
      m.timestamp = F.time(r, "timestamp");
      return m;
    }
    case MessageType::NeighborInfo: {
      NeighborInfo m;
      m.sender = F.id(r, "sender_id");
      m.sender_location = F.pos(r, "sender_location");
      const int n = F.count(r, "neighbors");
      for (int i = 0; i < n; ++i) {
        NeighborInfo::Entry e;
        e.id = F.id(r, "neighbor_id");
        e.location = F.pos(r, "neighbor_location");
        m.neighbors.push_back(e);
      }
      const int h = F.count(r, "next_hops");
      for (int i = 0; i < h; ++i) m.next_hops.push_back(F.id(r, "next_hop"));
      return m;
    }
  }
  throw DecodingError("unknown message_type_id " + std::to_string(raw_type));
}

void require_at_least_two(std::uint64_t v, const char* name) {
  if (v < 2) throw InvalidParameter(std::string(name) + " must be at least 2");
}

}  // namespace

MetricKind metric_kind(Protocol p) {
  switch (p) {
    case Protocol::MMBCR: return MetricKind::ResidualEnergy;
    case Protocol::MRPC: return MetricKind::PacketCapacity;
    case Protocol::MTPR: return MetricKind::TransmissionPower;
    case Protocol::AODV:
    case Protocol::MFR: return MetricKind::None;
  }
  return MetricKind::None;
}

MessageType type_of(const ControlMessage& m) {
  return std::visit(
      overloaded{
          [](const Rreq& r) { return r.type; },
          [](const Rrep&) { return MessageType::Rrep; },
          [](const LinkFail&) { return MessageType::LinkFail; },
          [](const RepairRequest&) { return MessageType::RepairRequest; },
          [](const RepairPermission&) { return MessageType::RepairPermission; },
          [](const Hello&) { return MessageType::Hello; },
          [](const NeighborAck&) { return MessageType::NeighborAck; },
          [](const ProactiveAck&) { return MessageType::ProactiveAck; },
          [](const DataPacket&) { return MessageType::Data; },
          [](const DataAck&) { return MessageType::DataAck; },
          [](const DetectionRequest&) { return MessageType::DetectionRequest; },
          [](const DetectionProbe&) { return MessageType::DetectionProbe; },
          [](const NeighborInfo&) { return MessageType::NeighborInfo; },
      },
      m);
}

int ceil_log2(std::uint64_t v) {
  if (v == 0) throw InvalidParameter("ceil_log2 of zero");
  int k = 0;
  while (k < 64 && (std::uint64_t{1} << k) < v) ++k;
  return k;
}

BitBudget BitBudget::from(const BitParams& p) {
  auto at_least_one = [](std::uint64_t v) { return std::max(1, ceil_log2(std::max<std::uint64_t>(v, 1))); };
  BitBudget b;
  b.params = p;
  b.id_bits = at_least_one(p.N);
  b.x_bits = at_least_one(p.X);
  b.y_bits = at_least_one(p.Y);
  b.range_bits = at_least_one(p.R_max);
  b.time_bits = at_least_one(p.TM);
  b.pac_bits = at_least_one(p.PAC);
  b.count_bits = at_least_one(p.N);  // hop counts range over 0..N-1
  return b;
}

int bits_hello(const BitParams& p) {
  require_at_least_two(p.N, "N");
  require_at_least_two(p.X, "X");
  require_at_least_two(p.Y, "Y");
  require_at_least_two(p.R_max, "R_max");
  require_at_least_two(p.TM, "TM");
  return 3 + ceil_log2(p.N) + ceil_log2(p.X) + ceil_log2(p.Y) + ceil_log2(p.R_max) + ceil_log2(p.TM);
}

int bits_add_rreq(const BitParams& p) {
  require_at_least_two(p.X, "X");
  require_at_least_two(p.Y, "Y");
  require_at_least_two(p.R_min, "R_min");
  const double x = static_cast<double>(p.X);
  const double y = static_cast<double>(p.Y);
  const double v =
      std::log2(x) + std::log2(y) + std::log2(std::sqrt(x * x + y * y)) - 3.0 - std::log2(static_cast<double>(p.R_min));
  const double c = std::ceil(v);
  return c > 0.0 ? static_cast<int>(c) : 0;
}

int bits_link_fail_delta(const BitParams& p) {
  require_at_least_two(p.N, "N");
  require_at_least_two(p.PAC, "PAC");
  require_at_least_two(p.TM, "TM");
  const int n = ceil_log2(p.N);
  const int pac = ceil_log2(p.PAC);
  const int tm = ceil_log2(p.TM);
  return (3 + 4 * n + pac) - 2 * (3 + 2 * n + tm + pac);
}

int bits_repair_permission(const BitParams& p) {
  require_at_least_two(p.N, "N");
  require_at_least_two(p.PAC, "PAC");
  return 3 + 3 * ceil_log2(p.N) + ceil_log2(p.PAC);
}

std::string BitString::hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

BitString encode(const ControlMessage& msg, const WireContext& ctx) {
  BitWriter w;
  write_message(w, msg, ctx);
  return w.finish();
}

std::size_t encoded_size(const ControlMessage& msg, const WireContext& ctx) {
  BitWriter w(true);
  write_message(w, msg, ctx);
  return w.size();
}

ControlMessage decode(const BitString& bits, const WireContext& ctx) {
  BitReader r(bits);
  ControlMessage m = read_message(r, ctx);
  if (r.remaining() != 0) throw DecodingError(std::to_string(r.remaining()) + " trailing bits after message");
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct TupleWriter {
  explicit TupleWriter(const TupleSymbols& s) : sym(s) {}

  const TupleSymbols& sym;
  std::ostringstream os;
  bool first = true;

  void raw(const std::string& s) {
    if (!first) os << ", ";
    os << s;
    first = false;
  }
  void node(NodeId n) {
    auto it = sym.nodes.find(n);
    raw(it != sym.nodes.end() ? it->second : std::to_string(n.value));
  }
  void pos(const Position& p) {
    for (const auto& [q, label] : sym.positions) {
      if (q == p) return raw(label);
    }
    raw("(" + fmt_number(p.x) + ", " + fmt_number(p.y) + ")");
  }
  void num(std::int64_t v) { raw(std::to_string(v)); }
  void type(MessageType t) { num(static_cast<int>(t)); }
};

}  // namespace

std::string format_tuple(const ControlMessage& msg, const TupleSymbols& symbols) {
  TupleWriter t{symbols};
  t.type(type_of(msg));
  std::visit(overloaded{
                 [&](const Rreq& m) {
                   t.node(m.source);
                   t.pos(m.source_location);
                   t.node(m.destination);
                   t.num(m.session_id);
                   t.num(m.number_of_data_packets);
                   t.node(m.initiator);
                   t.num(m.max_hop_count_difference);
                   if (m.router_sequence.empty()) t.raw("null");
                   for (std::size_t i = 0; i < m.router_sequence.size(); ++i) {
                     t.node(m.router_sequence[i]);
                     if (i < m.router_locations.size()) t.pos(m.router_locations[i]);
                   }
                   t.num(m.timestamp);
                   if (m.metric) {
                     t.raw(fmt_number(*m.metric));
                   } else if (metric_kind(symbols.protocol) == MetricKind::TransmissionPower) {
                     t.raw("null");
                   }
                 },
                 [&](const Rrep& m) {
                   t.node(m.destination);
                   t.pos(m.destination_location);
                   t.node(m.source);
                   t.num(m.session_id);
                   t.node(m.initiator);
                   t.num(m.max_hop_count_difference);
                   t.num(m.current_hop_count);
                   for (NodeId n : m.optimum_router_sequence) t.node(n);
                   t.num(m.timestamp);
                 },
                 [&](const LinkFail& m) {
                   t.node(m.source);
                   t.node(m.destination);
                   t.node(m.sender);
                   t.node(m.predecessor);
                   t.num(m.session_id);
                 },
                 [&](const RepairRequest& m) {
                   t.node(m.source);
                   t.node(m.destination);
                   t.num(m.session_id);
                   t.num(m.link_break_timestamp);
                   t.node(m.initiator);
                   auto it = symbols.delays.find(m.initiator);
                   if (it != symbols.delays.end()) {
                     t.raw(it->second);
                   } else {
                     t.num(m.recv_delay_source);
                   }
                 },
                 [&](const RepairPermission& m) {
                   t.node(m.source);
                   t.node(m.destination);
                   t.num(m.session_id);
                   t.node(m.grantee);
                 },
                 [&](const Hello& m) {
                   t.node(m.sender);
                   t.pos(m.sender_location);
                   t.raw(fmt_number(m.radio_range));
                   t.num(m.timestamp);
                 },
                 [&](const NeighborAck& m) {
                   t.node(m.sender);
                   t.node(m.target);
                   t.pos(m.sender_location);
                   t.raw(fmt_number(m.radio_range));
                   t.num(m.timestamp);
                 },
                 [&](const ProactiveAck& m) {
                   t.node(m.sender);
                   t.pos(m.sender_location);
                   t.raw(fmt_number(m.radio_range));
                   t.num(m.timestamp);
                   t.raw(fmt_number(m.minimum_receive_power));
                 },
                 [&](const DataPacket& m) {
                   t.node(m.source);
                   t.node(m.destination);
                   t.num(m.session_id);
                   t.num(m.packet_sequence_id);
                 },
                 [&](const DataAck& m) {
                   t.node(m.source);
                   t.node(m.destination);
                   t.num(m.session_id);
                   t.num(m.packet_sequence_id);
                   t.node(m.sender);
                 },
                 [&](const DetectionRequest& m) {
                   t.node(m.sender);
                   t.num(m.wait_interval);
                   t.num(m.timestamp);
                 },
                 [&](const DetectionProbe& m) {
                   t.node(m.sender);
                   t.node(m.requester);
                   t.num(m.timestamp);
                 },
                 [&](const NeighborInfo& m) {
                   t.node(m.sender);
                   t.pos(m.sender_location);
                   for (const auto& e : m.neighbors) t.node(e.id);
                   for (NodeId n : m.next_hops) t.node(n);
                 },
             },
             msg);
  return "<" + t.os.str() + ">";
}

}  // namespace manet
