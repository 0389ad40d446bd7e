// SPDX-License-Identifier: Apache-2.0
#include "zedsim/exit_policy.hpp"

#include <limits>
#include <sstream>

#include "zedsim/parallel.hpp"

namespace zedsim {

std::string_view to_string(Label label) {
  return label == Label::Person ? "person" : "no_person";
}

std::string_view to_string(ExitTaken exit) {
  switch (exit) {
    case ExitTaken::None:
      return "none";
    case ExitTaken::Ex1:
      return "ex1";
    case ExitTaken::Ex1Fallback:
      return "ex1_fallback";
    case ExitTaken::Ex2:
      return "ex2";
  }
  return "none";
}

void Thresholds::validate() const {
  if (!(gamma1 >= 0.0 && gamma1 <= 0.5 && gamma2 >= 0.5 && gamma2 <= 1.0)) {
    std::ostringstream os;
    os << "thresholds must satisfy 0 <= gamma1 <= 0.5 <= gamma2 <= 1 (got gamma1=" << gamma1
       << ", gamma2=" << gamma2 << ")";
    throw ConfigError(os.str());
  }
}

Ex1Outcome evaluate_ex1(double o1, const Thresholds& th) {
  if (o1 >= th.gamma2) return Ex1Outcome::Person;
  if (o1 <= th.gamma1) return Ex1Outcome::NoPerson;
  return Ex1Outcome::Ambiguous;
}

Label fallback_label(double o1) { return o1 >= 0.5 ? Label::Person : Label::NoPerson; }

Label evaluate_ex2(double o2) { return o2 >= 0.5 ? Label::Person : Label::NoPerson; }

PlannedExit policy_i_select(double available, double e1, double e2) {
  if (available >= e2) return PlannedExit::Ex2;
  if (available >= e1) return PlannedExit::Ex1;
  return PlannedExit::None;
}

namespace {

ExitDecision decide(const InferenceInstance& inst, const Thresholds& th,
                    const EnergyBudget& budget, const EnergyOracle& oracle,
                    bool check_escalation) {
  ExitDecision d;
  std::optional<double> admitted;
  try {
    admitted = oracle(MeasurementPoint::Admission);
  } catch (...) {
    admitted.reset();
  }
  if (!admitted) {
    d.fault = true;
    return d;
  }
  if (!(*admitted >= budget.admission_requirement())) {
    d.energy_denied = true;
    return d;
  }

  switch (evaluate_ex1(inst.o1, th)) {
    case Ex1Outcome::Person:
      d.exit_taken = ExitTaken::Ex1;
      d.prediction = Label::Person;
      return d;
    case Ex1Outcome::NoPerson:
      d.exit_taken = ExitTaken::Ex1;
      d.prediction = Label::NoPerson;
      return d;
    case Ex1Outcome::Ambiguous:
      break;
  }

  d.escalation_requested = true;
  if (check_escalation) {
    std::optional<double> second;
    try {
      second = oracle(MeasurementPoint::Escalation);
    } catch (...) {
      second.reset();
    }
    if (!second) {
      d.fault = true;
      return d;
    }
    if (!(*second >= budget.escalation_requirement())) {
      d.exit_taken = ExitTaken::Ex1Fallback;
      d.prediction = fallback_label(inst.o1);
      d.energy_denied = true;
      return d;
    }
  }
  d.exit_taken = ExitTaken::Ex2;
  d.prediction = evaluate_ex2(inst.o2);
  return d;
}

}  // namespace

ExitDecision decide_proposed(const InferenceInstance& inst, const Thresholds& th,
                             const EnergyBudget& budget, const EnergyOracle& oracle) {
  return decide(inst, th, budget, oracle, true);
}

ExitDecision decide_confidence_only(const InferenceInstance& inst, const Thresholds& th,
                                    const EnergyBudget& budget, const EnergyOracle& oracle) {
  return decide(inst, th, budget, oracle, false);
}

std::vector<SweepCell> sweep_thresholds(std::span<const InferenceInstance> trace,
                                        std::span<const Thresholds> grid, unsigned jobs) {
  if (trace.empty()) throw std::invalid_argument("threshold sweep needs a non-empty trace");
  std::vector<SweepCell> cells(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    SweepCell cell;
    cell.thresholds = grid[i];
    std::int64_t correct1 = 0;
    std::int64_t correct2 = 0;
    for (const auto& inst : trace) {
      switch (evaluate_ex1(inst.o1, cell.thresholds)) {
        case Ex1Outcome::Person:
          ++cell.n_ex1;
          correct1 += inst.label == Label::Person;
          break;
        case Ex1Outcome::NoPerson:
          ++cell.n_ex1;
          correct1 += inst.label == Label::NoPerson;
          break;
        case Ex1Outcome::Ambiguous:
          ++cell.n_ex2;
          correct2 += evaluate_ex2(inst.o2) == inst.label;
          break;
      }
    }
    if (cell.n_ex1 > 0) cell.acc_ex1 = static_cast<double>(correct1) / cell.n_ex1;
    if (cell.n_ex2 > 0) cell.acc_ex2 = static_cast<double>(correct2) / cell.n_ex2;
    cell.acc_total = static_cast<double>(correct1 + correct2) / (cell.n_ex1 + cell.n_ex2);
    cells[i] = cell;
  });
  return cells;
}

}  // namespace zedsim
