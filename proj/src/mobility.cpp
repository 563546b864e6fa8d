#include "manet/mobility.hpp"

#include <algorithm>
#include <cmath>

namespace manet {

RandomWaypoint::RandomWaypoint(double area_x, double area_y, Range<double> speed, SimTime pause, Rng rng)
    : area_x_(area_x), area_y_(area_y), speed_(speed), pause_ms_(static_cast<double>(pause)), rng_(rng) {
  Leg first;
  first.from = {rng_.uniform(0.0, area_x_), rng_.uniform(0.0, area_y_)};
  // The first leg starts at a waypoint with no pause, so t = 0 is the initial position.
  first.to = first.from;
  first.speed = speed_.min;
  legs_.push_back(first);
  extend();
}

void RandomWaypoint::extend() {
  const Leg& last = legs_.back();
  Leg next;
  next.start_ms = last.resume_ms;
  next.from = last.to;
  next.to = {rng_.uniform(0.0, area_x_), rng_.uniform(0.0, area_y_)};
  next.speed = speed_.min == speed_.max ? speed_.min : rng_.uniform(speed_.min, speed_.max);
  const double d = distance(next.from, next.to);
  next.arrive_ms = next.speed > 0.0 ? next.start_ms + d / next.speed * 1000.0 : next.start_ms;
  if (next.speed <= 0.0) next.to = next.from;
  next.resume_ms = next.arrive_ms + pause_ms_;
  // A zero-length leg with no pause would never advance time.
  if (next.resume_ms <= next.start_ms) next.resume_ms = next.start_ms + 1.0;
  legs_.push_back(next);
}

const RandomWaypoint::Leg& RandomWaypoint::leg_at(double t) {
  while (legs_.back().resume_ms <= t) extend();
  auto it = std::upper_bound(legs_.begin(), legs_.end(), t,
                             [](double v, const Leg& l) { return v < l.resume_ms; });
  return *it;
}

Position RandomWaypoint::position_at(SimTime t) {
  const double tm = static_cast<double>(t);
  const Leg& l = leg_at(tm);
  if (tm >= l.arrive_ms) return l.to;
  if (tm <= l.start_ms) return l.from;
  const double f = (tm - l.start_ms) / (l.arrive_ms - l.start_ms);
  Position p{l.from.x + (l.to.x - l.from.x) * f, l.from.y + (l.to.y - l.from.y) * f};
  p.x = std::clamp(p.x, 0.0, area_x_);
  p.y = std::clamp(p.y, 0.0, area_y_);
  return p;
}

Velocity RandomWaypoint::velocity_at(SimTime t) {
  const double tm = static_cast<double>(t);
  const Leg& l = leg_at(tm);
  if (tm < l.start_ms || tm >= l.arrive_ms) return {};
  const double d = distance(l.from, l.to);
  if (d <= 0.0) return {};
  return {(l.to.x - l.from.x) / d * l.speed, (l.to.y - l.from.y) / d * l.speed};
}

RandomWaypointModel::RandomWaypointModel(const ScenarioConfig& cfg, std::uint64_t seed) {
  nodes_.reserve(static_cast<std::size_t>(cfg.node_count));
  for (int i = 0; i < cfg.node_count; ++i) {
    nodes_.emplace_back(cfg.area_x, cfg.area_y, cfg.speed_range, cfg.pause_time,
                        Rng::substream(seed, static_cast<std::uint64_t>(i)));
  }
}

Position RandomWaypointModel::position_at(NodeId node, SimTime t) { return nodes_.at(node.value).position_at(t); }
Velocity RandomWaypointModel::velocity_at(NodeId node, SimTime t) { return nodes_.at(node.value).velocity_at(t); }

ScriptedMobility::ScriptedMobility(std::vector<std::vector<Keyframe>> paths) : paths_(std::move(paths)) {
  for (auto& p : paths_) {
    if (p.empty()) throw InvalidParameter("scripted path needs at least one keyframe");
    std::stable_sort(p.begin(), p.end(), [](const Keyframe& a, const Keyframe& b) { return a.time < b.time; });
  }
}

std::unique_ptr<ScriptedMobility> ScriptedMobility::fixed(const std::vector<Position>& positions) {
  std::vector<std::vector<Keyframe>> paths;
  for (const auto& p : positions) paths.push_back({Keyframe{0, p}});
  return std::make_unique<ScriptedMobility>(std::move(paths));
}

Position ScriptedMobility::position_at(NodeId node, SimTime t) {
  const auto& path = paths_.at(node.value);
  if (t <= path.front().time) return path.front().position;
  if (t >= path.back().time) return path.back().position;
  auto hi = std::upper_bound(path.begin(), path.end(), t, [](SimTime v, const Keyframe& k) { return v < k.time; });
  auto lo = hi - 1;
  const double f = static_cast<double>(t - lo->time) / static_cast<double>(hi->time - lo->time);
  return {lo->position.x + (hi->position.x - lo->position.x) * f,
          lo->position.y + (hi->position.y - lo->position.y) * f};
}

Velocity ScriptedMobility::velocity_at(NodeId node, SimTime t) {
  const auto& path = paths_.at(node.value);
  if (t < path.front().time || t >= path.back().time) return {};
  auto hi = std::upper_bound(path.begin(), path.end(), t, [](SimTime v, const Keyframe& k) { return v < k.time; });
  auto lo = hi - 1;
  const double dt = static_cast<double>(hi->time - lo->time) / 1000.0;
  return {(hi->position.x - lo->position.x) / dt, (hi->position.y - lo->position.y) / dt};
}

std::optional<SimTime> predict_range_exit(Position mover_pos, Velocity mover_vel, Position anchor_pos,
                                          Velocity anchor_vel, double range, SimTime now, SimTime horizon) {
  const double rx = mover_pos.x - anchor_pos.x;
  const double ry = mover_pos.y - anchor_pos.y;
  const double c = rx * rx + ry * ry - range * range;
  if (c >= 0.0) return now;
  const double vx = mover_vel.vx - anchor_vel.vx;
  const double vy = mover_vel.vy - anchor_vel.vy;
  const double a = vx * vx + vy * vy;
  if (a == 0.0) return std::nullopt;
  const double b = 2.0 * (rx * vx + ry * vy);
  const double seconds = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
  const auto t = now + static_cast<SimTime>(std::ceil(seconds * 1000.0 - 1e-9));
  if (t > horizon) return std::nullopt;
  return t;
}

}  // namespace manet
