// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zedsim/energy_core.hpp"
#include "zedsim/exit_policy.hpp"
#include "zedsim/pmu.hpp"
#include "zedsim/scheduler.hpp"

namespace zedsim {

/// Every device-level parameter entering a run.
struct DeviceConfig {
  CapacitorSpec capacitor;
  StageTable stages = StageTable::published();
  Thresholds thresholds;
  ScheduleConfig schedule;
  PmuOptions pmu;
  Micros dt{1000};
  LedRequirement led_requirement = LedRequirement::WorstCase;
  bool reserve_escalation_measurement = true;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct SimConfig {
  DeviceConfig device;
  double initial_v = 4.5;
  double horizon_s = 200.0;
  std::uint64_t seed = 7;
  PolicyVariant policy = PolicyVariant::Proposed;
  Gating gating = Gating::Mosfet;

  void validate() const;
  PipelinePlan plan() const;
};

struct TrajectorySample {
  double time_s = 0.0;
  double v_c = 0.0;
  PmuMode mode = PmuMode::ColdStart;
  std::string event;  // empty for plain 10 ms samples

  bool operator==(const TrajectorySample&) const = default;
};

struct Totals {
  double energy_consumed_j = 0.0;  // all load debits
  double harvested_j = 0.0;
  double clamp_loss_j = 0.0;
  double unserved_j = 0.0;
  double initial_energy_j = 0.0;
  double final_energy_j = 0.0;
  double wasted_j = 0.0;  // spent on pipelines that failed
  std::int64_t windows = 0;
  std::int64_t completed_pipelines = 0;
  std::int64_t power_failures = 0;
  std::int64_t deferred_windows = 0;
  std::int64_t measurements = 0;
  std::int64_t brownouts = 0;  // outputs lost outside a pipeline
  std::int64_t n_ex1 = 0;
  std::int64_t n_ex2 = 0;
  std::int64_t n_fallback = 0;
  std::int64_t correct = 0;
  std::optional<double> accuracy_total;

  /// initial + harvested - final - (consumed - unserved + clamp losses).
  double ledger_residual_j() const;
  bool operator==(const Totals&) const = default;
};

struct SimResult {
  std::vector<TrajectorySample> trajectory;
  std::vector<WindowOutcome> windows;
  Totals totals;
};

/// Deterministic time-stepped run. Windows are [k·T, (k+1)·T) for every
/// window that fits inside the horizon; one trace instance is consumed per
/// started pipeline. Throws ConfigError before running on bad input.
SimResult simulate(const SimConfig& cfg, const HarvestProfile& harvest,
                   std::span<const InferenceInstance> trace);

struct Variant {
  std::string name;
  PolicyVariant policy = PolicyVariant::Proposed;
  Gating gating = Gating::Mosfet;
  std::optional<int> n_attempts;  // overrides the schedule when set
};

struct VariantResult {
  Variant variant;
  SimResult result;
  // Relative to the reference row (the first baseline variant, else row 0).
  double energy_delta_pct = 0.0;
  double accuracy_delta = 0.0;
  std::int64_t completed_delta = 0;
};

/// Runs each variant on the same capacitor, harvest and trace.
std::vector<VariantResult> compare_policies(const SimConfig& base,
                                            std::span<const Variant> variants,
                                            const HarvestProfile& harvest,
                                            std::span<const InferenceInstance> trace,
                                            unsigned jobs = 1);

enum class ReplayStatus { Exact, TolerantMatch, Mismatch };

std::string_view to_string(ReplayStatus status);

struct ReplayReport {
  ReplayStatus status = ReplayStatus::Mismatch;
  std::string diff;

  explicit operator bool() const { return status == ReplayStatus::Exact; }
};

/// Classifies two runs: Exact when trajectories, windows and totals are
/// bit-identical; TolerantMatch when the totals agree (energy within 0.1 %,
/// counts equal) but the detail differs.
ReplayReport compare_runs(const SimResult& expected, const SimResult& actual);

/// Re-simulates and compares against `result`.
ReplayReport replay_check(const SimResult& result, const SimConfig& cfg,
                          const HarvestProfile& harvest, std::span<const InferenceInstance> trace);

}  // namespace zedsim
