#include <doctest.h>

#include <cmath>
#include <string>

#include "manet/messages.hpp"
#include "manet/rng.hpp"

using namespace manet;

namespace {

const NodeId s(0), x(1), w(2), u(3), d(4), p(5), i(6);

WireContext table1_context(Protocol proto = Protocol::AODV) {
  return {BitBudget::from({100, 500, 500, 50, 100, 1 << 20, 50}), proto};
}

TupleSymbols worked_symbols() {
  TupleSymbols sym;
  const char* names[] = {"s", "x", "w", "u", "d", "p", "i"};
  for (std::uint32_t k = 0; k < 7; ++k) sym.nodes[NodeId(k)] = names[k];
  sym.positions.push_back({{0, 100}, "(X_s(100), Y_s(100))"});
  return sym;
}

Rreq worked_rreq() {
  Rreq r;
  r.source = s;
  r.source_location = {0, 100};
  r.destination = d;
  r.session_id = 3;
  r.number_of_data_packets = 5;
  r.initiator = s;
  r.router_sequence = {p, i};
  r.timestamp = 108;
  return r;
}

}  // namespace

TEST_CASE("bits_hello") {
  CHECK(bits_hello({2, 2, 2, 2, 2, 2, 2}) == 8);
  CHECK(bits_hello({100, 500, 500, 50, 100, 1 << 20, 2}) == 55);
  BitParams bp{60, 500, 500, 50, 100, 30'000, 10};
  const int before = bits_hello(bp);
  bp.TM *= 2;
  CHECK(bits_hello(bp) == before + 1);
  CHECK_THROWS_AS(bits_hello({1, 2, 2, 2, 2, 2, 2}), InvalidParameter);
}

TEST_CASE("bits_add_rreq") {
  CHECK(bits_add_rreq({60, 500, 500, 50, 100, 30'000, 10}) == 19);
  CHECK(bits_add_rreq({60, 4, 4, 100, 100, 30'000, 10}) == 0);
}

TEST_CASE("bits_link_fail_delta") {
  CHECK(bits_link_fail_delta({2, 2, 2, 2, 2, 2, 2}) == -6);
  for (std::uint64_t n : {2u, 50u, 1000u}) CHECK(bits_link_fail_delta({n, 500, 500, 50, 100, 30'000, 10}) == bits_link_fail_delta({2, 500, 500, 50, 100, 30'000, 10}));
}

TEST_CASE("bits_repair_permission") {
  CHECK(bits_repair_permission({2, 2, 2, 2, 2, 2, 2}) == 7);
  const BitParams bp{100, 500, 500, 50, 100, 1 << 20, 50};
  CHECK(bits_repair_permission(bp) == 30);
  CHECK(bits_repair_permission(bp) < 4 * bits_hello(bp));
}

TEST_CASE("size inequalities over 2..2^30") {
  Rng rng(23);
  auto draw = [&] { return std::uint64_t{2} + static_cast<std::uint64_t>(std::exp2(rng.uniform(1, 30)) - 2); };
  for (int k = 0; k < 20'000; ++k) {
    BitParams bp{draw(), draw(), draw(), 0, 0, draw(), draw()};
    bp.R_min = draw();
    bp.R_max = draw();
    if (bp.R_max < bp.R_min) std::swap(bp.R_max, bp.R_min);
    const int hello = bits_hello(bp);
    INFO("N=" << bp.N << " X=" << bp.X << " Y=" << bp.Y << " Rmin=" << bp.R_min << " TM=" << bp.TM);
    REQUIRE(bits_add_rreq(bp) < 2 * hello);
    REQUIRE(bits_link_fail_delta(bp) < 0);
    REQUIRE(bits_repair_permission(bp) < 4 * hello);
  }
}

TEST_CASE("worked messages round trip") {
  const auto ctx = table1_context();
  const Rreq r = worked_rreq();
  CHECK(format_tuple(r, worked_symbols()) == "<1, s, (X_s(100), Y_s(100)), d, 3, 5, s, 0, p, i, 108>");
  const BitString bits = encode(r, ctx);
  CHECK(bits.bit_count == encoded_size(r, ctx));
  CHECK(std::get<Rreq>(decode(bits, ctx)) == r);

  const LinkFail lf{s, d, u, w, 3};
  CHECK(format_tuple(lf, worked_symbols()) == "<4, s, d, u, w, 3>");
  CHECK(std::get<LinkFail>(decode(encode(lf, ctx), ctx)) == lf);

  Rrep rep;
  rep.destination = d;
  rep.destination_location = {125, 125};
  rep.source = s;
  rep.session_id = 3;
  rep.initiator = d;
  rep.optimum_router_sequence = {x, w, u};
  rep.timestamp = 125;
  CHECK(std::get<Rrep>(decode(encode(rep, ctx), ctx)) == rep);
}

TEST_CASE("empty router sequence") {
  const auto ctx = table1_context();
  Rreq r = worked_rreq();
  r.router_sequence.clear();
  const BitString bits = encode(r, ctx);
  CHECK(bits.bit_count + 2 * ctx.budget.id_bits == encode(worked_rreq(), ctx).bit_count);
  CHECK(std::get<Rreq>(decode(bits, ctx)) == r);
}

TEST_CASE("field overflow and truncation") {
  const auto ctx = table1_context();
  Rreq r = worked_rreq();
  r.source = NodeId(5000);
  CHECK_THROWS_AS(encode(r, ctx), EncodingError);
  try {
    encode(r, ctx);
  } catch (const EncodingError& e) {
    CHECK(std::string(e.what()).find("source") != std::string::npos);
  }
  BitString bits = encode(worked_rreq(), ctx);
  bits.bit_count -= 9;
  bits.bytes.resize((bits.bit_count + 7) / 8);
  CHECK_THROWS_AS(decode(bits, ctx), DecodingError);
}

TEST_CASE("random messages round trip") {
  Rng rng(99);
  const std::uint64_t n_nodes = 100;
  auto node = [&] { return NodeId(static_cast<std::uint32_t>(rng.below(n_nodes))); };
  auto pos = [&] { return Position{static_cast<double>(rng.below(500)), static_cast<double>(rng.below(500))}; };
  auto t = [&] { return static_cast<SimTime>(rng.below(1 << 20)); };
  for (Protocol proto : kAllProtocols) {
    const auto ctx = table1_context(proto);
    for (int k = 0; k < 300; ++k) {
      Rreq r;
      r.type = rng.below(2) ? MessageType::FreshRreq : MessageType::RepairRreq;
      r.source = node();
      r.source_location = pos();
      r.destination = node();
      r.session_id = static_cast<std::uint32_t>(rng.below(1 << 20));
      r.number_of_data_packets = 1 + static_cast<int>(rng.below(50));
      r.initiator = node();
      r.max_hop_count_difference = static_cast<int>(rng.below(n_nodes));
      const auto len = rng.below(8);
      for (std::uint64_t j = 0; j < len; ++j) {
        r.router_sequence.push_back(node());
        if (proto == Protocol::MFR) r.router_locations.push_back(pos());
      }
      r.timestamp = t();
      switch (metric_kind(proto)) {
        case MetricKind::ResidualEnergy: r.metric = static_cast<double>(rng.below(10'000)) / 1000.0; break;
        case MetricKind::PacketCapacity: r.metric = static_cast<double>(rng.below(100'000)); break;
        case MetricKind::TransmissionPower:
          if (rng.below(2)) r.metric = static_cast<double>(rng.below(1'000'000));
          break;
        case MetricKind::None: break;
      }
      if (r.type == MessageType::RepairRreq && rng.below(2)) r.cone = Rreq::Cone{pos(), pos()};
      const BitString bits = encode(r, ctx);
      REQUIRE(bits.bit_count == encoded_size(r, ctx));
      const ControlMessage back = decode(bits, ctx);
      REQUIRE(std::get<Rreq>(back) == r);
      REQUIRE(encode(back, ctx) == bits);

      const ControlMessage others[] = {
          LinkFail{node(), node(), node(), node(), static_cast<std::uint32_t>(rng.below(1000))},
          RepairRequest{node(), node(), 7, t(), node(), static_cast<SimTime>(rng.below(1000))},
          RepairPermission{node(), node(), 9, node()},
          Hello{node(), pos(), static_cast<double>(rng.below(100)), t()},
          NeighborAck{node(), node(), pos(), static_cast<double>(rng.below(100)), t()},
          ProactiveAck{node(), pos(), static_cast<double>(rng.below(100)), t(), static_cast<double>(rng.below(300))},
          DataPacket{node(), node(), 4, 1 + static_cast<int>(rng.below(50))},
          DataAck{node(), node(), 4, 1 + static_cast<int>(rng.below(50)), node()},
          DetectionRequest{node(), static_cast<SimTime>(rng.below(100)), t()},
          DetectionProbe{node(), node(), t()},
          NeighborInfo{node(), pos(), {{node(), pos()}, {node(), pos()}}, {node()}},
      };
      for (const auto& m : others) {
        const BitString b = encode(m, ctx);
        REQUIRE(b.bit_count == encoded_size(m, ctx));
        REQUIRE(decode(b, ctx) == m);
      }
    }
  }
}
