// SPDX-License-Identifier: Apache-2.0
#include "zedsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace zedsim {

std::string_view to_string(PolicyVariant policy) {
  switch (policy) {
    case PolicyVariant::Proposed:
      return "proposed";
    case PolicyVariant::PolicyI:
      return "policy-i";
    case PolicyVariant::PolicyII:
      return "policy-ii";
    case PolicyVariant::SingleExitBaseline:
      return "baseline";
  }
  return "proposed";
}

PolicyVariant policy_from_string(std::string_view name) {
  if (name == "proposed") return PolicyVariant::Proposed;
  if (name == "policy-i" || name == "policy_i") return PolicyVariant::PolicyI;
  if (name == "policy-ii" || name == "policy_ii") return PolicyVariant::PolicyII;
  if (name == "baseline" || name == "single_exit_baseline") {
    return PolicyVariant::SingleExitBaseline;
  }
  throw ConfigError("unknown policy '" + std::string(name) +
                    "' (expected proposed|policy-i|policy-ii|baseline)");
}

void ScheduleConfig::validate(double t_exe_s) const {
  if (n_attempts < 1) throw ConfigError("schedule.n_attempts must be >= 1");
  if (!(window_s > 0.0)) throw ConfigError("schedule.window_s must be > 0");
  if (!(deadline_s >= 0.0)) throw ConfigError("schedule.deadline_s must be >= 0");
  if (!(guard_delta_j >= 0.0)) throw ConfigError("schedule.guard_delta_j must be >= 0");
  if (!(deadline_s + t_exe_s < window_s)) {
    std::ostringstream os;
    os << "schedule violates tau + T_exe < T: " << deadline_s << " + " << t_exe_s
       << " >= " << window_s << " s";
    throw ConfigError(os.str());
  }
}

std::vector<Micros> candidate_start_times(Micros t_k, const ScheduleConfig& cfg) {
  std::vector<Micros> times;
  times.reserve(static_cast<std::size_t>(std::max(cfg.n_attempts, 1)));
  for (int i = 0; i < cfg.n_attempts; ++i) {
    times.push_back(t_k + from_seconds(cfg.deadline_s * i / cfg.n_attempts));
  }
  return times;
}

bool try_admit(double available_usable, double e_req, double delta) {
  return available_usable >= e_req + delta;
}

bool detect_power_failure(double v_c, const CapacitorSpec& spec) { return v_c < spec.v_off; }

PipelinePlan PipelinePlan::make(const StageTable& stages, const Thresholds& thresholds,
                                const ScheduleConfig& schedule, PolicyVariant policy,
                                Gating gating, LedRequirement led,
                                bool reserve_escalation_measurement) {
  PipelinePlan p;
  p.stages = stages;
  p.thresholds = thresholds;
  p.schedule = schedule;
  p.policy = policy;
  p.gating = policy == PolicyVariant::SingleExitBaseline ? Gating::LoadSwitch : gating;
  if (policy == PolicyVariant::SingleExitBaseline) p.schedule.n_attempts = 1;

  p.budget = make_budget(stages, p.gating, led, schedule.guard_delta_j);
  if (policy == PolicyVariant::Proposed && reserve_escalation_measurement &&
      thresholds.gamma1 < thresholds.gamma2) {
    p.budget.admission_reserve = state_energy(stages.at(Stage::Measurement));
  }
  p.e_req_ex2_full = state_energy(stages.capture(p.gating)) +
                     state_energy(stages.at(Stage::InferenceEx2)) +
                     state_energy(stages.at(Stage::LedGreen)) + state_energy(stages.led_for(led));
  p.e_req_baseline = state_energy(stages.capture(Gating::LoadSwitch)) +
                     state_energy(stages.at(Stage::InferenceEx2)) +
                     state_energy(stages.led_for(led));
  return p;
}

double PipelinePlan::worst_case_execution_s() const {
  const double meas = stages.at(Stage::Measurement).duration_s;
  const double led = std::max(stages.at(Stage::LedBlue).duration_s,
                              stages.at(Stage::LedRed).duration_s);
  const double capture = stages.capture(gating).duration_s;
  const double ex2 = stages.at(Stage::InferenceEx2).duration_s;
  const double green = stages.at(Stage::LedGreen).duration_s;
  switch (policy) {
    case PolicyVariant::Proposed:
      return meas + capture + stages.at(Stage::InferenceEx1).duration_s + meas +
             stages.escalation().duration_s + green + led;
    case PolicyVariant::PolicyII:
      return meas + capture + stages.at(Stage::InferenceEx1).duration_s +
             stages.escalation().duration_s + green + led;
    case PolicyVariant::PolicyI:
      return meas + capture + ex2 + green + led;
    case PolicyVariant::SingleExitBaseline:
      return meas + capture + ex2 + led;
  }
  return 0.0;
}

namespace {

Stage led_stage(Label label) { return label == Label::Person ? Stage::LedBlue : Stage::LedRed; }

// Runs stages in order; false as soon as one browns out.
bool run_all(PowerPlant& plant, const StageTable& stages, std::initializer_list<Stage> seq) {
  for (Stage s : seq) {
    const StageProfile& profile =
        s == Stage::InferenceEx1ToEx2 ? stages.escalation() : stages.at(s);
    if (!plant.run_stage(s, profile)) return false;
  }
  return true;
}

bool admits(const PipelinePlan& plan, double usable, PlannedExit& planned) {
  const double delta = plan.schedule.guard_delta_j;
  switch (plan.policy) {
    case PolicyVariant::Proposed:
    case PolicyVariant::PolicyII:
      return try_admit(usable, plan.budget.e_req_ex1 + plan.budget.admission_reserve, delta);
    case PolicyVariant::PolicyI:
      planned = policy_i_select(usable - delta, plan.budget.e_req_ex1, plan.e_req_ex2_full);
      return planned != PlannedExit::None;
    case PolicyVariant::SingleExitBaseline:
      return try_admit(usable, plan.e_req_baseline, delta);
  }
  return false;
}

// Executes an admitted pipeline. Returns nullopt on power failure.
std::optional<ExitDecision> execute(PowerPlant& plant, const PipelinePlan& plan,
                                    const InferenceInstance& inst, double admission_reading,
                                    PlannedExit planned, WindowOutcome& out) {
  const StageTable& st = plan.stages;
  const Stage capture = plan.gating == Gating::Mosfet ? Stage::CapturePreprocessMosfet
                                                      : Stage::CapturePreprocessLoadSwitch;

  if (plan.policy == PolicyVariant::SingleExitBaseline) {
    const Label label = evaluate_ex2(inst.o2);
    if (!run_all(plant, st, {capture, Stage::InferenceEx2, led_stage(label)})) return std::nullopt;
    return ExitDecision{ExitTaken::Ex2, label, false, false, false};
  }

  if (plan.policy == PolicyVariant::PolicyI) {
    if (planned == PlannedExit::Ex2) {
      const Label label = evaluate_ex2(inst.o2);
      if (!run_all(plant, st, {capture, Stage::InferenceEx2, Stage::LedGreen, led_stage(label)})) {
        return std::nullopt;
      }
      return ExitDecision{ExitTaken::Ex2, label, false, false, false};
    }
    const Label label = fallback_label(inst.o1);
    if (!run_all(plant, st, {capture, Stage::InferenceEx1, led_stage(label)})) return std::nullopt;
    return ExitDecision{ExitTaken::Ex1, label, false, false, false};
  }

  // Proposed and policy (ii): EX1 first, escalation decided after O1.
  if (!run_all(plant, st, {capture, Stage::InferenceEx1})) return std::nullopt;

  bool browned_out = false;
  const EnergyOracle oracle = [&](MeasurementPoint point) -> std::optional<double> {
    if (point == MeasurementPoint::Admission) return admission_reading;
    ++out.measurements;
    if (!plant.run_stage(Stage::Measurement, st.at(Stage::Measurement))) {
      browned_out = true;
      return std::nullopt;
    }
    const double reading = plant.read_usable_energy();
    out.escalation_reading_j = reading;
    return reading;
  };
  const ExitDecision d = plan.policy == PolicyVariant::Proposed
                             ? decide_proposed(inst, plan.thresholds, plan.budget, oracle)
                             : decide_confidence_only(inst, plan.thresholds, plan.budget, oracle);
  if (browned_out || d.fault || !d.prediction) return std::nullopt;

  switch (d.exit_taken) {
    case ExitTaken::Ex2:
      if (!run_all(plant, st,
                   {Stage::InferenceEx1ToEx2, Stage::LedGreen, led_stage(*d.prediction)})) {
        return std::nullopt;
      }
      break;
    case ExitTaken::Ex1:
    case ExitTaken::Ex1Fallback:
      if (!run_all(plant, st, {led_stage(*d.prediction)})) return std::nullopt;
      break;
    case ExitTaken::None:
      return std::nullopt;
  }
  return d;
}

}  // namespace

WindowOutcome run_window(std::int64_t window_index, PowerPlant& plant, const PipelinePlan& plan,
                         const InferenceInstance& instance) {
  WindowOutcome out;
  out.window_index = window_index;
  const double consumed_at_start = plant.consumed_j();

  for (Micros s : candidate_start_times(plant.now(), plan.schedule)) {
    plant.idle_until(s);
    // An unpowered MCU cannot measure.
    if (!plant.outputs_enabled()) continue;

    ++out.measurements;
    if (!plant.run_stage(Stage::Measurement, plan.stages.at(Stage::Measurement))) {
      plant.mark("brownout");
      continue;
    }
    const double usable = plant.read_usable_energy();
    out.admission_reading_j = usable;

    PlannedExit planned = PlannedExit::None;
    if (!admits(plan, usable, planned)) continue;

    plant.mark("admit");
    out.started_at = s;
    out.deferred = false;
    out.instance_id = instance.id;
    out.decision = execute(plant, plan, instance, usable, planned, out);
    if (!out.decision) {
      out.power_failure = true;
      plant.mark("power_failure");
    } else {
      plant.mark(to_string(out.decision->exit_taken));
    }
    break;
  }
  if (out.deferred) plant.mark("defer");
  out.energy_spent_j = plant.consumed_j() - consumed_at_start;
  return out;
}

}  // namespace zedsim
