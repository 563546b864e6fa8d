#include "manet/core.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "manet/rng.hpp"

namespace manet {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::AODV: return "AODV";
    case Protocol::MMBCR: return "MMBCR";
    case Protocol::MRPC: return "MRPC";
    case Protocol::MTPR: return "MTPR";
    case Protocol::MFR: return "MFR";
  }
  return "?";
}

std::string_view to_string(Variant v) { return v == Variant::Classical ? "classical" : "minus_hello"; }

Protocol parse_protocol(std::string_view s) {
  for (Protocol p : kAllProtocols) {
    if (s == to_string(p)) return p;
  }
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Protocol p : kAllProtocols) {
    if (lower == to_string(p)) return p;
  }
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  if (s == "classical" || s == "Classical") return Variant::Classical;
  if (s == "minus_hello" || s == "MinusHello" || s == "-HELLO" || s == "minushello") return Variant::MinusHello;
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

namespace {

template <typename T>
void check_range(const Range<T>& r, const char* name, T lowest) {
  if (!(r.min <= r.max)) throw ConfigError(std::string(name) + ": min must not exceed max");
  if (r.min < lowest) throw ConfigError(std::string(name) + ": values out of range");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(area_x >= 2.0)) throw ConfigError("area_x: must be at least 2 m");
  if (!(area_y >= 2.0)) throw ConfigError("area_y: must be at least 2 m");
  if (node_count < 2) throw ConfigError("node_count: must be at least 2");
  check_range(speed_range, "speed_range", 0.0);
  check_range(radio_range_range, "radio_range_range", 1.0);
  check_range(initial_energy_range, "initial_energy_range", 0.0);
  check_range(tx_power_range, "tx_power_range", 0.0);
  check_range(rx_power_range, "rx_power_range", 0.0);
  if (rx_power_range.min <= 0.0) throw ConfigError("rx_power_range: minimum receive power must be positive");
  if (initial_energy_range.min <= 0.0) throw ConfigError("initial_energy_range: must be positive");
  if (hello_interval < 1) throw ConfigError("hello_interval: must be at least 1 ms");
  if (packet_size < 1) throw ConfigError("packet_size: must be positive");
  if (!(channel_capacity > 0.0)) throw ConfigError("channel_capacity: must be positive");
  if (pause_time < 0) throw ConfigError("pause_time: must be non-negative");
  if (packet_load < 1) throw ConfigError("packet_load: must be at least 1");
  if (!(session_arrival_rate >= 0.0)) throw ConfigError("session_arrival_rate: must be non-negative");
  if (!(medium_constant_C > 0.0)) throw ConfigError("medium_constant_C: must be positive");
  if (ttl < 1) throw ConfigError("ttl: must be at least 1 ms");
  if (queue_capacity < 1) throw ConfigError("queue_capacity: must be at least 1");
  if (sim_time < 2) throw ConfigError("sim_time: must be at least 2 ms");
  if (cbr_gap_factor < 1) throw ConfigError("cbr_gap_factor: must be at least 1");
  if (max_attempts < 1) throw ConfigError("max_attempts: must be at least 1");
  if (max_discoveries < 1) throw ConfigError("max_discoveries: must be at least 1");
  if (mac_backoff_window < 1) throw ConfigError("mac_backoff_window: must be at least 1");
  if (!(link_margin_m >= 0.0)) throw ConfigError("link_margin_m: must be non-negative");
  if (!(carrier_sense_factor >= 1.0)) throw ConfigError("carrier_sense_factor: must be at least 1");
  if (!(cone_half_angle_deg > 0.0 && cone_half_angle_deg <= 180.0))
    throw ConfigError("cone_half_angle_deg: must be in (0, 180]");
}

SimTime ScenarioConfig::airtime(std::int64_t bits) const {
  const double bits_per_ms = channel_capacity / 1000.0;
  const auto ticks = static_cast<SimTime>(std::ceil(static_cast<double>(bits) / bits_per_ms));
  return ticks < 1 ? 1 : ticks;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire-style rejection keeps the draw unbiased and platform independent.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

}  // namespace manet
