// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string_view>
#include <vector>

#include "zedsim/energy_core.hpp"

namespace zedsim {

using Micros = std::chrono::microseconds;

inline double to_seconds(Micros t) { return static_cast<double>(t.count()) * 1e-6; }
Micros from_seconds(double seconds);

/*
 * PMU operating modes keyed on the capacitor voltage:
 *
 *   Full          v_c = v_max, charging disabled
 *   Operate       v_on <= v_c < v_max
 *   HysteresisOn  v_off < v_c < v_on, entered from above (outputs enabled)
 *   HysteresisOff v_off < v_c < v_on, recovering from depletion (disabled)
 *   ColdStart     v_c <= v_off
 */
enum class PmuMode { Full, Operate, HysteresisOn, HysteresisOff, ColdStart };

/// History flag disambiguating the hysteresis band.
enum class Latch { AboveOn, BelowOff };

std::string_view to_string(PmuMode mode);
bool outputs_enabled(PmuMode mode);
Latch latch_of(PmuMode mode);

PmuMode mode_of(double v_c, const CapacitorSpec& spec, Latch latch);

/// Piecewise-constant harvested current.
class HarvestProfile {
 public:
  struct Segment {
    double start_s;
    double current_a;
  };

  HarvestProfile() : segments_{{0.0, 0.0}} {}
  /// Throws std::invalid_argument unless starts are strictly increasing from
  /// 0 and currents are non-negative.
  explicit HarvestProfile(std::vector<Segment> segments);

  static HarvestProfile constant(double current_a) { return HarvestProfile({{0.0, current_a}}); }

  /// Current of the last segment starting at or before t.
  double current_at(double t_s) const;
  /// Start of the first segment strictly after t, or +inf.
  double next_change_after(double t_s) const;

  const std::vector<Segment>& segments() const { return segments_; }

 private:
  std::vector<Segment> segments_;
};

double harvest_current_at(const HarvestProfile& profile, double t_s);

/// How the harvested current turns into charging power.
enum class HarvestModel {
  TerminalVoltage,  // i_h * v_c
  FixedVoltage,     // i_h * fixed_harvest_voltage
};

struct PmuOptions {
  double converter_efficiency = 1.0;
  HarvestModel harvest_model = HarvestModel::TerminalVoltage;
  double fixed_harvest_voltage = 4.0;
};

struct EnergyState {
  double v_c = 0.0;
  PmuMode mode = PmuMode::ColdStart;
  Micros time{0};
};

/// Initial state at v_c; outputs start enabled iff v_c > v_off.
EnergyState initial_state(const CapacitorSpec& spec, double v_c);

struct StepResult {
  EnergyState state;
  double harvested_j = 0.0;
  double consumed_j = 0.0;
  double clamp_loss_j = 0.0;  // harvest rejected at v_max
  double unserved_j = 0.0;    // demand the empty capacitor could not cover
  bool fault = false;         // load requested with outputs disabled
};

/// Advances the capacitor by dt with constant harvest current and load.
/// The load is dropped (and fault set) if the outputs are disabled.
StepResult step(const EnergyState& state, const CapacitorSpec& spec, double i_h,
                double load_power_w, Micros dt, const PmuOptions& options = {});

}  // namespace zedsim
