// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zedsim/energy_core.hpp"

namespace zedsim {

enum class Label : std::uint8_t { NoPerson = 0, Person = 1 };

std::string_view to_string(Label label);

/// Scores of both exit heads for one input, plus its ground truth.
struct InferenceInstance {
  std::int64_t id = 0;
  double o1 = 0.0;
  double o2 = 0.0;
  Label label = Label::NoPerson;

  bool operator==(const InferenceInstance&) const = default;
};

/// Ambiguity band (gamma1, gamma2) on the EX1 score.
struct Thresholds {
  double gamma1 = 0.3;
  double gamma2 = 0.7;

  /// Throws ConfigError unless 0 <= gamma1 <= 0.5 <= gamma2 <= 1.
  void validate() const;
  bool operator==(const Thresholds&) const = default;
};

enum class Ex1Outcome { Person, NoPerson, Ambiguous };

enum class ExitTaken { None, Ex1, Ex1Fallback, Ex2 };

std::string_view to_string(ExitTaken exit);

struct ExitDecision {
  ExitTaken exit_taken = ExitTaken::None;
  std::optional<Label> prediction;
  bool escalation_requested = false;
  bool energy_denied = false;
  bool fault = false;

  bool operator==(const ExitDecision&) const = default;
};

enum class MeasurementPoint { Admission, Escalation };

/// Usable energy observed at a measurement point, or nullopt on failure.
using EnergyOracle = std::function<std::optional<double>(MeasurementPoint)>;

Ex1Outcome evaluate_ex1(double o1, const Thresholds& th);

/// EX1 label at the balanced 0.5 threshold, used when escalation is denied.
Label fallback_label(double o1);

Label evaluate_ex2(double o2);

enum class PlannedExit { None, Ex1, Ex2 };

/// Deepest exit whose demand fits in the available energy.
PlannedExit policy_i_select(double available, double e1, double e2);

/// Confidence-gated decision with admission and escalation energy checks.
ExitDecision decide_proposed(const InferenceInstance& inst, const Thresholds& th,
                             const EnergyBudget& budget, const EnergyOracle& oracle);

/// Same rule with the escalation check always passing (confidence only).
ExitDecision decide_confidence_only(const InferenceInstance& inst, const Thresholds& th,
                                    const EnergyBudget& budget, const EnergyOracle& oracle);

struct SweepCell {
  Thresholds thresholds;
  std::optional<double> acc_ex1;  // nullopt: no instance exited here
  std::optional<double> acc_ex2;
  std::optional<double> acc_total;
  std::int64_t n_ex1 = 0;
  std::int64_t n_ex2 = 0;
};

/// Per-cell accuracies and exit counts under unlimited energy. Cells are
/// evaluated on up to `jobs` threads; output order follows `grid`.
std::vector<SweepCell> sweep_thresholds(std::span<const InferenceInstance> trace,
                                        std::span<const Thresholds> grid, unsigned jobs = 1);

}  // namespace zedsim
