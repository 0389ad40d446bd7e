// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace zedsim {

/// Raised for invalid or incomplete device configuration. The message names
/// the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An energy requirement that cannot be met even by a full buffer.
class UnreachableRequirement : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Storage capacitor with the three PMU thresholds.
struct CapacitorSpec {
  double capacitance_f = 1.5;
  double v_off = 3.6;
  double v_on = 3.92;
  double v_max = 4.5;

  /// Throws ConfigError unless 0 < v_off < v_on < v_max and C > 0.
  void validate() const;
  double max_energy() const { return 0.5 * capacitance_f * v_max * v_max; }
};

enum class Stage {
  CapturePreprocessMosfet,
  CapturePreprocessLoadSwitch,
  InferenceEx1,
  InferenceEx2,
  InferenceEx1ToEx2,
  Measurement,
  LedGreen,
  LedBlue,
  LedRed,
  Idle,
};

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

/// Camera power-gating circuit; selects the capture/preprocess profile.
enum class Gating { Mosfet, LoadSwitch };

std::string_view to_string(Gating gating);
Gating gating_from_string(std::string_view name);

/// Mean current drawn from the regulated rail for a fixed duration.
struct StageProfile {
  double current_a = 0.0;
  double duration_s = 0.0;
  double supply_v = 3.3;

  double load_power_w() const { return supply_v * current_a; }
};

/// Which LED energy the requirements reserve for the EX1 indication.
enum class LedRequirement { WorstCase, Blue, Red };

std::string_view to_string(LedRequirement req);
LedRequirement led_requirement_from_string(std::string_view name);

/// Named stage profiles. Lookups of absent stages throw ConfigError.
class StageTable {
 public:
  StageTable() = default;

  void set(Stage stage, const StageProfile& profile);
  bool contains(Stage stage) const { return profiles_.count(stage) != 0; }
  const StageProfile& at(Stage stage) const;
  const std::map<Stage, StageProfile>& profiles() const { return profiles_; }

  const StageProfile& capture(Gating gating) const;
  /// The incremental EX1 -> EX2 segment. Stored explicitly if present,
  /// otherwise derived from the EX1 and EX2 profiles.
  StageProfile escalation() const;
  /// Indication LED reserved by requirement calculations.
  const StageProfile& led_for(LedRequirement req) const;

  /// Measured stage profiles with the default device rail.
  static StageTable published();

 private:
  std::map<Stage, StageProfile> profiles_;
};

/// Energy requirements consulted by admission and escalation checks.
struct EnergyBudget {
  double e_req_ex1 = 0.0;       // full pipeline ending at EX1
  double e_req_escalate = 0.0;  // remaining inference + green LED + EX1 LED
  double e1 = 0.0;
  double e2 = 0.0;
  double guard_delta = 0.0;
  // Extra energy held back at admission (e.g. for the escalation
  // measurement), not spent unless that measurement happens.
  double admission_reserve = 0.0;

  double admission_requirement() const { return e_req_ex1 + admission_reserve + guard_delta; }
  double escalation_requirement() const { return e_req_escalate + guard_delta; }
};

// ½·C·v²; throws std::domain_error outside [0, v_max].
double stored_energy(const CapacitorSpec& spec, double v_c);

// ½·C·(v² − v_off²), clamped at zero below v_off.
double usable_energy(const CapacitorSpec& spec, double v_c);

// V_s · T · I
double state_energy(const StageProfile& profile);

/// Capture/preprocess + EX1 inference + EX1 indication.
double required_energy_ex1(const StageProfile& capture, const StageProfile& inference_ex1,
                           const StageProfile& led_ex1);
double required_energy_ex1(const StageTable& stages, Gating gating, LedRequirement led);

/// Remaining inference after EX1 + green LED + EX1 indication.
double required_energy_escalate(const StageProfile& ex1_to_ex2, const StageProfile& led_green,
                                const StageProfile& led_ex1);
double required_energy_escalate(const StageTable& stages, LedRequirement led);

/// Incremental segment whose duration and energy are the EX2 totals minus
/// the EX1 totals. Throws ConfigError if EX2 is not longer and costlier.
StageProfile derive_escalation(const StageProfile& ex1, const StageProfile& ex2);

EnergyBudget make_budget(const StageTable& stages, Gating gating, LedRequirement led,
                         double guard_delta);

/// Smallest voltage whose usable energy covers e_req + delta. Throws
/// UnreachableRequirement when that voltage exceeds v_max.
double min_start_voltage(const CapacitorSpec& spec, double e_req, double delta);

}  // namespace zedsim
