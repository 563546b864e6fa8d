#include "manet/energy.hpp"

#include <algorithm>
#include <cmath>

namespace manet {

Battery::Battery(double max_joules) {
  if (!(max_joules > 0.0)) throw InvalidParameter("battery capacity must be positive");
  max_nj_ = std::llround(max_joules * static_cast<double>(kNanojoulesPerJoule));
  residual_nj_ = max_nj_;
}

std::int64_t energy_nj(double power_mw, double duration_ms) {
  if (power_mw <= 0.0 || duration_ms <= 0.0) return 0;
  return std::llround(power_mw * duration_ms * 1000.0);
}

std::int64_t Battery::charge(double power_mw, double duration_ms, EnergyCategory category) {
  const std::int64_t drawn = std::min(energy_nj(power_mw, duration_ms), residual_nj_);
  residual_nj_ -= drawn;
  consumed_[static_cast<int>(category)] += drawn;
  return drawn;
}

double trans_power(double min_receive_power, double dist, double C) {
  if (!(C > 0.0)) throw InvalidParameter("C must be positive");
  if (dist < 0.0) throw InvalidParameter("distance must be non-negative");
  return min_receive_power * dist * dist / C;
}

double trans_power_nonopt(double min_receive_power, double radio_range, double C) {
  if (!(radio_range > 0.0)) throw InvalidParameter("radio range must be positive");
  return trans_power(min_receive_power, radio_range, C);
}

double saved_power(double min_receive_power, double dist, double radio_range, double C) {
  return trans_power_nonopt(min_receive_power, radio_range, C) - trans_power(min_receive_power, dist, C);
}

PowerModel::PowerModel(double C, double reference_receive_power) : C_(C), reference_(reference_receive_power) {
  if (!(C > 0.0)) throw InvalidParameter("C must be positive");
  if (!(reference_receive_power > 0.0)) throw InvalidParameter("reference receive power must be positive");
}

double PowerModel::full_power(const RadioProfile& sender) const {
  return trans_power_nonopt(reference_, sender.radio_range, C_);
}

double PowerModel::unicast_power(double min_receive_power, double dist) const {
  return trans_power(min_receive_power, dist, C_);
}

double PowerModel::mw_per_unit(const RadioProfile& sender) const { return sender.tx_power / full_power(sender); }

double PowerModel::draw_mw(const RadioProfile& sender, double friis_power) const {
  return std::min(sender.tx_power, friis_power * mw_per_unit(sender));
}

double PowerModel::reach(const RadioProfile& sender, double friis_power, double min_receive_power) const {
  const double d = std::sqrt(friis_power * C_ / min_receive_power);
  return std::min(sender.radio_range, d);
}

double broadcast_cost_joules(const RadioProfile& r, SimTime airtime_ms) {
  return r.tx_power * static_cast<double>(airtime_ms) / 1e6;
}

}  // namespace manet
