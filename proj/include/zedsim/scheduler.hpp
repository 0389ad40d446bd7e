// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "zedsim/energy_core.hpp"
#include "zedsim/exit_policy.hpp"
#include "zedsim/pmu.hpp"

namespace zedsim {

struct ScheduleConfig {
  double window_s = 10.0;
  double deadline_s = 4.0;
  int n_attempts = 20;
  double guard_delta_j = 0.0;

  /// Throws ConfigError unless N >= 1, T > 0, tau >= 0, delta >= 0 and
  /// tau + t_exe < T.
  void validate(double t_exe_s) const;
};

enum class PolicyVariant { Proposed, PolicyI, PolicyII, SingleExitBaseline };

std::string_view to_string(PolicyVariant policy);
PolicyVariant policy_from_string(std::string_view name);

/// Start times t_k + (i/N)·tau for i in [0, N).
std::vector<Micros> candidate_start_times(Micros t_k, const ScheduleConfig& cfg);

bool try_admit(double available_usable, double e_req, double delta);

/// True iff v_c has fallen strictly below v_off.
bool detect_power_failure(double v_c, const CapacitorSpec& spec);

/// The physical side of a run as seen by the sequencer: a clock, the
/// capacitor behind the PMU and a way to draw stage loads from it.
class PowerPlant {
 public:
  virtual ~PowerPlant() = default;

  virtual Micros now() const = 0;
  /// Idles (harvesting, idle load only) until t.
  virtual void idle_until(Micros t) = 0;
  virtual bool outputs_enabled() const = 0;
  /// Draws the stage load for its full duration. Returns false if the
  /// supply browned out before the stage finished.
  virtual bool run_stage(Stage stage, const StageProfile& profile) = 0;
  /// Usable energy as seen by a voltage reading right now.
  virtual double read_usable_energy() const = 0;
  /// Load energy drawn so far.
  virtual double consumed_j() const = 0;
  virtual void mark(std::string_view event) = 0;
};

/// Everything the sequencer needs that stays fixed across windows.
struct PipelinePlan {
  StageTable stages;
  Thresholds thresholds;
  ScheduleConfig schedule;
  PolicyVariant policy = PolicyVariant::Proposed;
  Gating gating = Gating::Mosfet;
  EnergyBudget budget;
  // Admission requirement for policy (i) EX2 plans and for the baseline.
  double e_req_ex2_full = 0.0;
  double e_req_baseline = 0.0;

  /// Builds budgets from the stage table. When reserve_escalation_measurement
  /// is set, the proposed policy holds one measurement's energy back at
  /// admission so the escalation check itself cannot brown out the device.
  static PipelinePlan make(const StageTable& stages, const Thresholds& thresholds,
                           const ScheduleConfig& schedule, PolicyVariant policy, Gating gating,
                           LedRequirement led, bool reserve_escalation_measurement);

  /// Longest contiguous execution (admission measurement to last LED).
  double worst_case_execution_s() const;
};

struct WindowOutcome {
  std::int64_t window_index = 0;
  std::optional<Micros> started_at;
  std::optional<ExitDecision> decision;
  std::optional<std::int64_t> instance_id;
  double energy_spent_j = 0.0;
  bool deferred = true;
  bool power_failure = false;
  int measurements = 0;
  std::optional<double> admission_reading_j;
  std::optional<double> escalation_reading_j;

  bool completed() const { return !deferred && !power_failure; }
  bool operator==(const WindowOutcome&) const = default;
};

/// Runs one window starting at plant.now(): admission attempts at each
/// candidate time, then at most one contiguous pipeline on `instance`.
WindowOutcome run_window(std::int64_t window_index, PowerPlant& plant, const PipelinePlan& plan,
                         const InferenceInstance& instance);

}  // namespace zedsim
