// Battery ledger, the 40% liveness rule, and the Friis transmission-power
// model.
//
// Energy is kept in integer nanojoules so that the per-category ledger sums
// back to the drawn total exactly. Powers are milliwatts and durations are
// milliseconds: 1 mW for 1 ms is 1000 nJ.
//
// Friis powers (minRecv * d^2 / C) are in "minRecv units" and are not
// milliwatts drawn from the battery. A PowerModel maps them onto each
// node's configured draw: transmitting with the Friis power needed to cover
// the node's full radio range at the largest minimum receive power costs
// exactly the node's tx_power, and smaller Friis powers cost proportionally
// less. C therefore cancels out of every energy figure and only shapes reach.

#pragma once

#include <array>
#include <cstdint>

#include "manet/core.hpp"

namespace manet {

enum class EnergyCategory { Tx = 0, Rx = 1, Hello = 2 };

inline constexpr std::int64_t kNanojoulesPerJoule = 1'000'000'000;

class Battery {
 public:
  Battery() = default;
  explicit Battery(double max_joules);

  /// Alive per the 40% rule: residual strictly above 0.4 of capacity.
  [[nodiscard]] bool is_up() const { return 10 * residual_nj_ > 4 * max_nj_; }

  /// Draws power * duration, floored at an empty battery. Returns the
  /// nanojoules actually drawn.
  std::int64_t charge(double power_mw, double duration_ms, EnergyCategory category);

  [[nodiscard]] std::int64_t max_nj() const { return max_nj_; }
  [[nodiscard]] std::int64_t residual_nj() const { return residual_nj_; }
  [[nodiscard]] std::int64_t consumed_nj(EnergyCategory c) const { return consumed_[static_cast<int>(c)]; }
  [[nodiscard]] std::int64_t consumed_total_nj() const { return consumed_[0] + consumed_[1] + consumed_[2]; }
  [[nodiscard]] double max_joules() const { return static_cast<double>(max_nj_) / kNanojoulesPerJoule; }
  [[nodiscard]] double residual_joules() const { return static_cast<double>(residual_nj_) / kNanojoulesPerJoule; }

 private:
  std::int64_t max_nj_ = 0;
  std::int64_t residual_nj_ = 0;
  std::array<std::int64_t, 3> consumed_{};
};

/// Energy drawn by power_mw for duration_ms, in nanojoules (rounded).
std::int64_t energy_nj(double power_mw, double duration_ms);

/// minRecv * dist^2 / C.
double trans_power(double min_receive_power, double dist, double C);
/// minRecv * R^2 / C: the power needed to reach the edge of the radio disk.
double trans_power_nonopt(double min_receive_power, double radio_range, double C);
/// trans_power_nonopt - trans_power; non-negative while dist <= radio_range.
double saved_power(double min_receive_power, double dist, double radio_range, double C);

struct RadioProfile {
  double radio_range = 0.0;        // m
  double min_receive_power = 0.0;  // mW, also the node's receive draw
  double tx_power = 0.0;           // mW drawn when covering the full radio range
};

class PowerModel {
 public:
  /// `reference_receive_power` is the largest minimum receive power in the
  /// scenario; a full-range transmission must reach every receiver.
  PowerModel(double C, double reference_receive_power);

  [[nodiscard]] double C() const { return C_; }
  [[nodiscard]] double reference_receive_power() const { return reference_; }

  /// Friis power of a full-range transmission by `sender`.
  [[nodiscard]] double full_power(const RadioProfile& sender) const;
  /// Friis power to reach a receiver with `min_receive_power` at `dist`.
  [[nodiscard]] double unicast_power(double min_receive_power, double dist) const;
  /// Milliwatts drawn by `sender` when emitting `friis_power`, never above
  /// its full-range draw.
  [[nodiscard]] double draw_mw(const RadioProfile& sender, double friis_power) const;
  /// How far a transmission of `friis_power` reaches a receiver with
  /// `min_receive_power`, capped by the sender's radio range.
  [[nodiscard]] double reach(const RadioProfile& sender, double friis_power, double min_receive_power) const;
  /// Milliwatts per Friis unit for `sender`; the calibration constant.
  [[nodiscard]] double mw_per_unit(const RadioProfile& sender) const;

 private:
  double C_;
  double reference_;
};

/// Broadcast cost broad(i): full-range draw for one airtime, in joules.
double broadcast_cost_joules(const RadioProfile& r, SimTime airtime_ms);

}  // namespace manet
