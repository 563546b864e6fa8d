// Shared domain types for the MANET simulator: node identity, positions,
// simulated time, session keys, and the scenario configuration.
//
// Time is kept in integer milliseconds ("ticks"). Every event in a run is
// ordered by (tick, insertion sequence), so there is no floating-point
// ordering anywhere in the event queue.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace manet {

/// Simulated time in milliseconds.
using SimTime = std::int64_t;

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario, sweep or CLI argument failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric routine was called outside its domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline constexpr NodeId kNoNode{0xFFFFFFFFu};

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Position&, const Position&) = default;
};

/// Euclidean distance in meters.
double distance(const Position& a, const Position& b);

/// Planar velocity in meters per second.
struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
};

/// Identifies one route-discovery context: <source, destination, session>.
struct SessionKey {
  NodeId source;
  NodeId destination;
  std::uint32_t session_id = 0;

  friend constexpr auto operator<=>(const SessionKey&, const SessionKey&) = default;
};

template <typename T>
struct Range {
  T min{};
  T max{};

  [[nodiscard]] constexpr T mid() const { return (min + max) / 2; }
  [[nodiscard]] constexpr bool contains(T v) const { return v >= min && v <= max; }
};

enum class Protocol { AODV, MMBCR, MRPC, MTPR, MFR };
enum class Variant { Classical, MinusHello };

std::string_view to_string(Protocol p);
std::string_view to_string(Variant v);
Protocol parse_protocol(std::string_view s);
Variant parse_variant(std::string_view s);

inline constexpr Protocol kAllProtocols[] = {Protocol::AODV, Protocol::MMBCR, Protocol::MRPC,
                                             Protocol::MTPR, Protocol::MFR};

/// Scenario parameters. The first block is the simulation environment
/// (500 m x 500 m, 10-30 m/s random waypoint, 2 Mbps ...); the engine knobs
/// after it control details the environment leaves open.
struct ScenarioConfig {
  double area_x = 500.0;
  double area_y = 500.0;
  int node_count = 60;
  Range<double> speed_range{10.0, 30.0};          // m/s
  Range<double> radio_range_range{50.0, 100.0};   // m
  Range<double> initial_energy_range{5.0, 10.0};  // J
  Range<double> tx_power_range{300.0, 600.0};     // mW, draw at full radio range
  Range<double> rx_power_range{50.0, 300.0};      // mW, also the minimum receive power
  SimTime hello_interval = 10;                    // ms
  int packet_size = 512;                          // bytes
  double channel_capacity = 2'000'000.0;          // bits/s
  SimTime pause_time = 1000;                      // ms
  int packet_load = 10;                           // data packets per session
  double session_arrival_rate = 10.0;             // sessions/s, network wide
  double medium_constant_C = 1.0;
  SimTime ttl = 100;                              // ms, RREQ time-to-live
  int queue_capacity = 64;                        // frames, mq(i)
  std::uint64_t rng_seed = 1;
  Protocol protocol = Protocol::AODV;
  Variant variant = Variant::MinusHello;

  // Engine knobs.
  SimTime sim_time = 30'000;       // ms, TM
  int cbr_gap_factor = 10;         // inter-packet gap = data airtime x factor
  int max_attempts = 3;            // per-hop data transmissions before a link is declared broken
  int max_discoveries = 3;         // source-originated discovery attempts per session
  int mac_backoff_window = 8;      // ticks
  double link_margin_m = 5.0;      // distance headroom for power-optimised unicasts
  double cone_half_angle_deg = 45.0;
  double carrier_sense_factor = 2.2;  // carrier is sensed this many times beyond decode reach

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// Airtime in ticks of a frame of `bits` bits, rounded up, at least one tick.
  [[nodiscard]] SimTime airtime(std::int64_t bits) const;
};

}  // namespace manet

template <>
struct std::hash<manet::NodeId> {
  std::size_t operator()(manet::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
