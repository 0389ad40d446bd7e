// SPDX-License-Identifier: Apache-2.0
#include "zedsim/pmu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace zedsim {

Micros from_seconds(double seconds) {
  return Micros{static_cast<Micros::rep>(std::llround(seconds * 1e6))};
}

std::string_view to_string(PmuMode mode) {
  switch (mode) {
    case PmuMode::Full:
      return "full";
    case PmuMode::Operate:
      return "operate";
    case PmuMode::HysteresisOn:
      return "hysteresis_on";
    case PmuMode::HysteresisOff:
      return "hysteresis_off";
    case PmuMode::ColdStart:
      return "cold_start";
  }
  return "unknown";
}

bool outputs_enabled(PmuMode mode) {
  return mode == PmuMode::Full || mode == PmuMode::Operate || mode == PmuMode::HysteresisOn;
}

Latch latch_of(PmuMode mode) { return outputs_enabled(mode) ? Latch::AboveOn : Latch::BelowOff; }

PmuMode mode_of(double v_c, const CapacitorSpec& spec, Latch latch) {
  if (v_c >= spec.v_max) return PmuMode::Full;
  if (v_c >= spec.v_on) return PmuMode::Operate;
  if (v_c <= spec.v_off) return PmuMode::ColdStart;
  return latch == Latch::AboveOn ? PmuMode::HysteresisOn : PmuMode::HysteresisOff;
}

HarvestProfile::HarvestProfile(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("harvest profile has no segments");
  if (segments_.front().start_s != 0.0) {
    throw std::invalid_argument("harvest profile must start at t=0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].current_a >= 0.0)) {
      throw std::invalid_argument("harvest current must be >= 0");
    }
    if (i > 0 && !(segments_[i].start_s > segments_[i - 1].start_s)) {
      throw std::invalid_argument("harvest segment starts must be strictly increasing");
    }
  }
}

double HarvestProfile::current_at(double t_s) const {
  if (t_s < 0.0) {
    std::ostringstream os;
    os << "harvest lookup at negative time " << t_s;
    throw std::domain_error(os.str());
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t_s,
                             [](double t, const Segment& s) { return t < s.start_s; });
  return std::prev(it)->current_a;
}

double HarvestProfile::next_change_after(double t_s) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t_s,
                             [](double t, const Segment& s) { return t < s.start_s; });
  return it == segments_.end() ? std::numeric_limits<double>::infinity() : it->start_s;
}

double harvest_current_at(const HarvestProfile& profile, double t_s) {
  return profile.current_at(t_s);
}

EnergyState initial_state(const CapacitorSpec& spec, double v_c) {
  const Latch latch = v_c > spec.v_off ? Latch::AboveOn : Latch::BelowOff;
  return EnergyState{v_c, mode_of(v_c, spec, latch), Micros{0}};
}

StepResult step(const EnergyState& state, const CapacitorSpec& spec, double i_h,
                double load_power_w, Micros dt, const PmuOptions& options) {
  if (dt.count() <= 0) throw std::invalid_argument("step requires dt > 0");
  if (load_power_w < 0.0) throw std::invalid_argument("load power must be >= 0");

  StepResult r;
  r.state = state;
  r.state.time = state.time + dt;

  const double dt_s = to_seconds(dt);
  const bool enabled = outputs_enabled(state.mode);
  r.fault = load_power_w > 0.0 && !enabled;
  const double load = enabled ? load_power_w / options.converter_efficiency : 0.0;
  const double v_h = options.harvest_model == HarvestModel::TerminalVoltage
                         ? state.v_c
                         : options.fixed_harvest_voltage;
  const double p_h = i_h * v_h;

  r.harvested_j = p_h * dt_s;
  r.consumed_j = load * dt_s;
  if (r.harvested_j == r.consumed_j) {
    r.state.mode = mode_of(state.v_c, spec, latch_of(state.mode));
    return r;
  }

  double e = 0.5 * spec.capacitance_f * state.v_c * state.v_c + r.harvested_j - r.consumed_j;
  const double e_max = spec.max_energy();
  if (e >= e_max) {
    r.clamp_loss_j = e - e_max;
    r.state.v_c = spec.v_max;
  } else if (e <= 0.0) {
    r.unserved_j = -e;
    r.state.v_c = 0.0;
  } else {
    r.state.v_c = std::sqrt(2.0 * e / spec.capacitance_f);
  }

  Latch latch = latch_of(state.mode);
  if (r.state.v_c <= spec.v_off) {
    latch = Latch::BelowOff;
  } else if (r.state.v_c >= spec.v_on) {
    latch = Latch::AboveOn;
  }
  r.state.mode = mode_of(r.state.v_c, spec, latch);
  return r;
}

}  // namespace zedsim
