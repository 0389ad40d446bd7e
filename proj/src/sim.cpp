// SPDX-License-Identifier: Apache-2.0
#include "zedsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "zedsim/parallel.hpp"

namespace zedsim {

namespace {

constexpr Micros kSamplePeriod{10'000};

// Capacitor + PMU + harvester, advanced in dt steps that never straddle a
// sample instant or a harvest segment boundary.
class Engine final : public PowerPlant {
 public:
  Engine(const SimConfig& cfg, const HarvestProfile& harvest, SimResult& out)
      : spec_(cfg.device.capacitor),
        pmu_(cfg.device.pmu),
        dt_(cfg.device.dt),
        idle_load_w_(cfg.device.stages.contains(Stage::Idle)
                         ? cfg.device.stages.at(Stage::Idle).load_power_w()
                         : 0.0),
        harvest_(harvest),
        out_(out),
        state_(initial_state(cfg.device.capacitor, cfg.initial_v)) {
    out_.totals.initial_energy_j = stored_energy(spec_, state_.v_c);
    sample("");
  }

  Micros now() const override { return state_.time; }

  void idle_until(Micros t) override {
    if (t > state_.time) advance(t - state_.time, idle_load_w_, false);
  }

  bool outputs_enabled() const override { return zedsim::outputs_enabled(state_.mode); }

  bool run_stage(Stage stage, const StageProfile& profile) override {
    mark(to_string(stage));
    return advance(from_seconds(profile.duration_s), profile.load_power_w(), true);
  }

  double read_usable_energy() const override { return usable_energy(spec_, state_.v_c); }

  double consumed_j() const override { return out_.totals.energy_consumed_j; }

  void mark(std::string_view event) override { sample(event); }

  void finish() {
    out_.totals.final_energy_j = stored_energy(spec_, state_.v_c);
  }

 private:
  void sample(std::string_view event) {
    out_.trajectory.push_back(
        TrajectorySample{to_seconds(state_.time), state_.v_c, state_.mode, std::string(event)});
  }

  // Returns false if a pipeline load could not be carried to the end.
  bool advance(Micros duration, double load_w, bool pipeline) {
    const Micros end = state_.time + duration;
    while (state_.time < end) {
      Micros h = std::min(dt_, end - state_.time);
      const Micros next_sample = (state_.time / kSamplePeriod + 1) * kSamplePeriod;
      h = std::min(h, next_sample - state_.time);
      const double change = harvest_.next_change_after(to_seconds(state_.time));
      if (std::isfinite(change)) {
        const Micros next_change = from_seconds(change);
        if (next_change > state_.time) h = std::min(h, next_change - state_.time);
      }

      const double i_h = harvest_.current_at(to_seconds(state_.time));
      const bool was_enabled = zedsim::outputs_enabled(state_.mode);
      const double load = pipeline ? load_w : (was_enabled ? load_w : 0.0);
      const StepResult r = step(state_, spec_, i_h, load, h, pmu_);
      state_ = r.state;

      auto& t = out_.totals;
      t.harvested_j += r.harvested_j;
      t.energy_consumed_j += r.consumed_j;
      t.clamp_loss_j += r.clamp_loss_j;
      t.unserved_j += r.unserved_j;

      const bool enabled = zedsim::outputs_enabled(state_.mode);
      if (was_enabled && !enabled) {
        ++t.brownouts;
        sample("outputs_off");
      } else if (!was_enabled && enabled) {
        sample("outputs_on");
      }
      if (state_.time % kSamplePeriod == Micros{0}) sample("");

      if (pipeline && (r.fault || detect_power_failure(state_.v_c, spec_))) return false;
    }
    return true;
  }

  CapacitorSpec spec_;
  PmuOptions pmu_;
  Micros dt_;
  double idle_load_w_;
  const HarvestProfile& harvest_;
  SimResult& out_;
  EnergyState state_;
};

}  // namespace

double Totals::ledger_residual_j() const {
  return initial_energy_j + harvested_j - final_energy_j -
         (energy_consumed_j - unserved_j + clamp_loss_j);
}

void DeviceConfig::validate() const {
  capacitor.validate();
  thresholds.validate();
  for (Stage s : {Stage::CapturePreprocessMosfet, Stage::CapturePreprocessLoadSwitch,
                  Stage::InferenceEx1, Stage::InferenceEx2, Stage::Measurement, Stage::LedGreen,
                  Stage::LedBlue, Stage::LedRed}) {
    (void)stages.at(s);
  }
  (void)stages.escalation();
  if (!(pmu.converter_efficiency > 0.0 && pmu.converter_efficiency <= 1.0)) {
    throw ConfigError("converter_efficiency must lie in (0, 1]");
  }
  if (pmu.harvest_model == HarvestModel::FixedVoltage && !(pmu.fixed_harvest_voltage > 0.0)) {
    throw ConfigError("fixed_harvest_voltage must be > 0");
  }
  if (dt.count() <= 0) throw ConfigError("dt_ms must be > 0");
  double t_exe = 0.0;
  for (PolicyVariant p : {PolicyVariant::Proposed, PolicyVariant::PolicyI,
                          PolicyVariant::PolicyII, PolicyVariant::SingleExitBaseline}) {
    for (Gating g : {Gating::Mosfet, Gating::LoadSwitch}) {
      const auto plan = PipelinePlan::make(stages, thresholds, schedule, p, g, led_requirement,
                                           reserve_escalation_measurement);
      t_exe = std::max(t_exe, plan.worst_case_execution_s());
    }
  }
  schedule.validate(t_exe);
}

void SimConfig::validate() const {
  device.validate();
  const auto& c = device.capacitor;
  if (!(initial_v >= c.v_off && initial_v <= c.v_max)) {
    std::ostringstream os;
    os << "initial_v " << initial_v << " V outside [v_off, v_max] = [" << c.v_off << ", "
       << c.v_max << "]";
    throw ConfigError(os.str());
  }
  if (!(horizon_s > 0.0)) throw ConfigError("horizon_s must be > 0");
}

PipelinePlan SimConfig::plan() const {
  return PipelinePlan::make(device.stages, device.thresholds, device.schedule, policy, gating,
                            device.led_requirement, device.reserve_escalation_measurement);
}

SimResult simulate(const SimConfig& cfg, const HarvestProfile& harvest,
                   std::span<const InferenceInstance> trace) {
  cfg.validate();
  const PipelinePlan plan = cfg.plan();
  const double window = cfg.device.schedule.window_s;
  const auto n_windows = static_cast<std::int64_t>(std::floor(cfg.horizon_s / window + 1e-9));
  if (static_cast<std::int64_t>(trace.size()) < n_windows) {
    std::ostringstream os;
    os << "trace has " << trace.size() << " instances but the horizon spans " << n_windows
       << " windows";
    throw ConfigError(os.str());
  }

  SimResult result;
  result.windows.reserve(static_cast<std::size_t>(n_windows));
  result.trajectory.reserve(static_cast<std::size_t>(cfg.horizon_s * 100.0) + 64);
  Engine engine(cfg, harvest, result);

  std::size_t next = 0;
  auto& t = result.totals;
  t.windows = n_windows;
  for (std::int64_t k = 0; k < n_windows; ++k) {
    engine.idle_until(from_seconds(static_cast<double>(k) * window));
    engine.mark("window");
    WindowOutcome w = run_window(k, engine, plan, trace[next]);
    if (w.started_at) ++next;

    t.measurements += w.measurements;
    if (w.deferred) {
      ++t.deferred_windows;
    } else if (w.power_failure) {
      ++t.power_failures;
      t.wasted_j += w.energy_spent_j;
    } else {
      ++t.completed_pipelines;
      const ExitDecision& d = *w.decision;
      switch (d.exit_taken) {
        case ExitTaken::Ex1:
          ++t.n_ex1;
          break;
        case ExitTaken::Ex2:
          ++t.n_ex2;
          break;
        case ExitTaken::Ex1Fallback:
          ++t.n_fallback;
          break;
        case ExitTaken::None:
          break;
      }
      t.correct += d.prediction == trace[next - 1].label;
    }
    result.windows.push_back(std::move(w));
  }
  engine.idle_until(from_seconds(cfg.horizon_s));
  engine.finish();
  if (t.completed_pipelines > 0) {
    t.accuracy_total = static_cast<double>(t.correct) / static_cast<double>(t.completed_pipelines);
  }
  return result;
}

std::vector<VariantResult> compare_policies(const SimConfig& base,
                                            std::span<const Variant> variants,
                                            const HarvestProfile& harvest,
                                            std::span<const InferenceInstance> trace,
                                            unsigned jobs) {
  std::vector<VariantResult> rows(variants.size());
  parallel_for(variants.size(), jobs, [&](std::size_t i) {
    SimConfig cfg = base;
    cfg.policy = variants[i].policy;
    cfg.gating = variants[i].gating;
    if (variants[i].n_attempts) cfg.device.schedule.n_attempts = *variants[i].n_attempts;
    rows[i].variant = variants[i];
    rows[i].result = simulate(cfg, harvest, trace);
  });
  if (rows.empty()) return rows;

  std::size_t ref = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].variant.policy == PolicyVariant::SingleExitBaseline) {
      ref = i;
      break;
    }
  }
  const Totals& r = rows[ref].result.totals;
  for (auto& row : rows) {
    const Totals& t = row.result.totals;
    row.energy_delta_pct = r.energy_consumed_j > 0.0
                               ? 100.0 * (t.energy_consumed_j - r.energy_consumed_j) /
                                     r.energy_consumed_j
                               : 0.0;
    row.accuracy_delta = t.accuracy_total.value_or(0.0) - r.accuracy_total.value_or(0.0);
    row.completed_delta = t.completed_pipelines - r.completed_pipelines;
  }
  return rows;
}

std::string_view to_string(ReplayStatus status) {
  switch (status) {
    case ReplayStatus::Exact:
      return "exact";
    case ReplayStatus::TolerantMatch:
      return "tolerant match";
    case ReplayStatus::Mismatch:
      return "mismatch";
  }
  return "mismatch";
}

ReplayReport compare_runs(const SimResult& expected, const SimResult& actual) {
  ReplayReport report;
  std::ostringstream diff;
  const Totals& a = expected.totals;
  const Totals& b = actual.totals;

  if (expected.trajectory.size() != actual.trajectory.size()) {
    diff << "trajectory length " << expected.trajectory.size() << " vs "
         << actual.trajectory.size() << "\n";
  } else {
    for (std::size_t i = 0; i < expected.trajectory.size(); ++i) {
      if (!(expected.trajectory[i] == actual.trajectory[i])) {
        diff << "trajectory[" << i << "] differs at t=" << expected.trajectory[i].time_s
             << " s: v_c " << expected.trajectory[i].v_c << " vs " << actual.trajectory[i].v_c
             << "\n";
        break;
      }
    }
  }
  if (expected.windows != actual.windows) diff << "window outcomes differ\n";
  if (!(a == b)) {
    diff.precision(17);
    diff << "totals: energy " << a.energy_consumed_j << " vs " << b.energy_consumed_j
         << ", completed " << a.completed_pipelines << " vs " << b.completed_pipelines
         << ", failures " << a.power_failures << " vs " << b.power_failures << "\n";
  }

  report.diff = diff.str();
  if (report.diff.empty()) {
    report.status = ReplayStatus::Exact;
    return report;
  }
  const bool counts_equal = a.completed_pipelines == b.completed_pipelines &&
                            a.power_failures == b.power_failures && a.n_ex1 == b.n_ex1 &&
                            a.n_ex2 == b.n_ex2 && a.n_fallback == b.n_fallback;
  const double scale = std::max(std::abs(a.energy_consumed_j), 1e-12);
  const bool energy_close = std::abs(a.energy_consumed_j - b.energy_consumed_j) <= 1e-3 * scale;
  report.status = counts_equal && energy_close ? ReplayStatus::TolerantMatch
                                               : ReplayStatus::Mismatch;
  return report;
}

ReplayReport replay_check(const SimResult& result, const SimConfig& cfg,
                          const HarvestProfile& harvest,
                          std::span<const InferenceInstance> trace) {
  return compare_runs(result, simulate(cfg, harvest, trace));
}

}  // namespace zedsim
