// Node motion: random waypoint for simulated runs, fixed or keyframed paths
// for scripted topologies, and straight-line range-exit prediction.

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "manet/core.hpp"
#include "manet/rng.hpp"

namespace manet {

class MobilityModel {
 public:
  virtual ~MobilityModel() = default;

  [[nodiscard]] virtual int node_count() const = 0;
  [[nodiscard]] virtual Position position_at(NodeId node, SimTime t) = 0;
  [[nodiscard]] virtual Velocity velocity_at(NodeId node, SimTime t) = 0;
};

/// One node's random-waypoint trajectory. Legs are generated lazily from the
/// node's own random stream and kept, so queries at any past time are exact.
class RandomWaypoint {
 public:
  struct Leg {
    double start_ms = 0.0;   // departure from `from`
    double arrive_ms = 0.0;  // arrival at `to`
    double resume_ms = 0.0;  // end of the pause at `to`
    Position from;
    Position to;
    double speed = 0.0;  // m/s
  };

  RandomWaypoint(double area_x, double area_y, Range<double> speed, SimTime pause, Rng rng);

  Position position_at(SimTime t);
  Velocity velocity_at(SimTime t);
  [[nodiscard]] Position initial_position() const { return legs_.front().from; }
  [[nodiscard]] const std::vector<Leg>& legs() const { return legs_; }

 private:
  const Leg& leg_at(double t);
  void extend();

  double area_x_;
  double area_y_;
  Range<double> speed_;
  double pause_ms_;
  Rng rng_;
  std::vector<Leg> legs_;
};

class RandomWaypointModel final : public MobilityModel {
 public:
  /// Node i draws from sub-stream i of `seed`.
  RandomWaypointModel(const ScenarioConfig& cfg, std::uint64_t seed);

  [[nodiscard]] int node_count() const override { return static_cast<int>(nodes_.size()); }
  Position position_at(NodeId node, SimTime t) override;
  Velocity velocity_at(NodeId node, SimTime t) override;
  RandomWaypoint& node(NodeId id) { return nodes_.at(id.value); }

 private:
  std::vector<RandomWaypoint> nodes_;
};

/// Piecewise-linear paths through (time, position) keyframes; a node with a
/// single keyframe never moves. Positions are held constant outside the
/// keyframe span.
class ScriptedMobility final : public MobilityModel {
 public:
  struct Keyframe {
    SimTime time = 0;
    Position position;
  };

  explicit ScriptedMobility(std::vector<std::vector<Keyframe>> paths);
  static std::unique_ptr<ScriptedMobility> fixed(const std::vector<Position>& positions);

  [[nodiscard]] int node_count() const override { return static_cast<int>(paths_.size()); }
  Position position_at(NodeId node, SimTime t) override;
  Velocity velocity_at(NodeId node, SimTime t) override;

 private:
  std::vector<std::vector<Keyframe>> paths_;
};

/// Earliest absolute time in [now, horizon] at which a mover at `mover_pos`
/// with velocity `mover_vel` is at least `range` meters from an anchor
/// moving with `anchor_vel`, assuming both keep their current velocities.
/// Returns `now` if the mover is already outside; rounded up to whole ticks.
std::optional<SimTime> predict_range_exit(Position mover_pos, Velocity mover_vel, Position anchor_pos,
                                          Velocity anchor_vel, double range, SimTime now, SimTime horizon);

}  // namespace manet
