// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zedsim/config.hpp"
#include "zedsim/parallel.hpp"
#include "zedsim/sim.hpp"
#include "zedsim/traces.hpp"

namespace zedsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string trace_path;
  std::string harvest_path;
  std::string out_dir = ".";
  std::optional<double> horizon_s;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::string> gating;
  std::optional<double> ih_ma;
  std::optional<double> initial_v;
  std::optional<double> capacitance_f;
  std::optional<int> n_attempts;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::optional<double> delta_j;
  unsigned jobs = default_jobs();
};

void add_config_options(CLI::App& app, Options& o) {
  app.add_option("--config", o.config_path, "Device/simulation config (JSON)");
  app.add_option("--horizon", o.horizon_s, "Simulated time in seconds");
  app.add_option("--seed", o.seed, "Seed for the synthetic trace");
  app.add_option("--policy", o.policy, "proposed|policy-i|policy-ii|baseline");
  app.add_option("--gating", o.gating, "mosfet|load-switch");
  app.add_option("--initial-v", o.initial_v, "Initial capacitor voltage");
  app.add_option("--capacitance", o.capacitance_f, "Capacitance in farads");
  app.add_option("--n-attempts", o.n_attempts, "Admission attempts per window (N)");
  app.add_option("--gamma1", o.gamma1, "Lower ambiguity threshold");
  app.add_option("--gamma2", o.gamma2, "Upper ambiguity threshold");
  app.add_option("--delta-j", o.delta_j, "Guard margin in joules");
}

void add_input_options(CLI::App& app, Options& o) {
  app.add_option("--trace", o.trace_path, "Trace CSV (id,o1,o2,label); synthetic if omitted");
  app.add_option("--harvest", o.harvest_path, "Harvest CSV (t_start_s,i_h_ma)");
  app.add_option("--ih-ma", o.ih_ma, "Constant harvested current in mA")->excludes("--harvest");
}

void add_run_options(CLI::App& app, Options& o) {
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

SimConfig resolve(const Options& o) {
  SimConfig cfg = o.config_path.empty() ? SimConfig{} : load_config_file(o.config_path);
  if (o.horizon_s) cfg.horizon_s = *o.horizon_s;
  if (o.seed) cfg.seed = *o.seed;
  if (o.policy) cfg.policy = policy_from_string(*o.policy);
  if (o.gating) cfg.gating = gating_from_string(*o.gating);
  if (o.initial_v) cfg.initial_v = *o.initial_v;
  if (o.capacitance_f) cfg.device.capacitor.capacitance_f = *o.capacitance_f;
  if (o.n_attempts) cfg.device.schedule.n_attempts = *o.n_attempts;
  if (o.gamma1) cfg.device.thresholds.gamma1 = *o.gamma1;
  if (o.gamma2) cfg.device.thresholds.gamma2 = *o.gamma2;
  if (o.delta_j) cfg.device.schedule.guard_delta_j = *o.delta_j;
  cfg.validate();
  return cfg;
}

HarvestProfile load_harvest_input(const Options& o, double default_ma) {
  if (!o.harvest_path.empty()) return load_harvest_file(o.harvest_path);
  const double ma = o.ih_ma.value_or(default_ma);
  if (!(ma >= 0.0)) throw ConfigError("--ih-ma must be >= 0");
  return HarvestProfile::constant(ma * 1e-3);
}

std::vector<InferenceInstance> load_trace_input(const Options& o, const SimConfig& cfg,
                                                std::ostream& err) {
  if (!o.trace_path.empty()) {
    std::vector<std::string> warnings;
    auto trace = load_trace_file(o.trace_path, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    return trace;
  }
  GeneratorSpec spec;
  spec.seed = cfg.seed;
  spec.n = std::max<std::int64_t>(
      spec.n, static_cast<std::int64_t>(cfg.horizon_s / cfg.device.schedule.window_s) + 1);
  return generate_trace(spec);
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string input_digest(std::span<const InferenceInstance> trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return sha256_hex(os.str());
}

std::string input_digest(const HarvestProfile& harvest) {
  std::ostringstream os;
  write_harvest(os, harvest);
  return sha256_hex(os.str());
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

void write_hash_line(std::ostream& f, const std::string& hash) {
  f << "# config_sha256=" << hash << "\n";
}

json totals_json(const Totals& t) {
  json j{
      {"energy_consumed_j", t.energy_consumed_j},
      {"harvested_j", t.harvested_j},
      {"clamp_loss_j", t.clamp_loss_j},
      {"unserved_j", t.unserved_j},
      {"initial_energy_j", t.initial_energy_j},
      {"final_energy_j", t.final_energy_j},
      {"wasted_j", t.wasted_j},
      {"ledger_residual_j", t.ledger_residual_j()},
      {"windows", t.windows},
      {"completed_pipelines", t.completed_pipelines},
      {"power_failures", t.power_failures},
      {"deferred_windows", t.deferred_windows},
      {"measurements", t.measurements},
      {"brownouts", t.brownouts},
      {"n_ex1", t.n_ex1},
      {"n_ex2", t.n_ex2},
      {"n_fallback", t.n_fallback},
      {"correct", t.correct},
  };
  j["accuracy_total"] = t.accuracy_total ? json(*t.accuracy_total) : json(nullptr);
  return j;
}

void write_trajectory(std::ostream& f, const std::string& hash, const SimResult& r) {
  write_hash_line(f, hash);
  f << "time_s,v_c,mode,event\n";
  for (const auto& s : r.trajectory) {
    f << fmt(s.time_s) << ',' << fmt(s.v_c) << ',' << to_string(s.mode) << ',' << s.event << '\n';
  }
}

void write_windows(std::ostream& f, const std::string& hash, const SimResult& r) {
  write_hash_line(f, hash);
  f << "window,started_at_s,instance_id,exit,prediction,escalation_requested,energy_denied,"
       "deferred,power_failure,measurements,energy_spent_j,admission_reading_j,"
       "escalation_reading_j\n";
  for (const auto& w : r.windows) {
    f << w.window_index << ',' << (w.started_at ? fmt(to_seconds(*w.started_at)) : "") << ','
      << (w.instance_id ? std::to_string(*w.instance_id) : "") << ',';
    if (w.decision) {
      const auto& d = *w.decision;
      f << to_string(d.exit_taken) << ',' << (d.prediction ? to_string(*d.prediction) : "")
        << ',' << d.escalation_requested << ',' << d.energy_denied;
    } else {
      f << ",,,";
    }
    f << ',' << w.deferred << ',' << w.power_failure << ',' << w.measurements << ','
      << fmt(w.energy_spent_j) << ',' << fmt(w.admission_reading_j) << ','
      << fmt(w.escalation_reading_j) << '\n';
  }
}

std::vector<double> parse_axis(const std::string& text, const std::string& name) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw UsageError(name + ": not a number: '" + s + "'");
    }
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError(name + ": expected start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError(name + ": need step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      // Snap to 1e-12 so 0.1 + 3·0.05 prints as 0.25.
      out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) out.push_back(number(p));
    }
  }
  if (out.empty()) throw UsageError(name + ": empty grid");
  return out;
}

Variant parse_variant(const std::string& token) {
  Variant v;
  v.name = token;
  std::stringstream ss(token);
  std::string part;
  std::getline(ss, part, ':');
  v.policy = policy_from_string(part);
  while (std::getline(ss, part, ':')) {
    if (part.rfind("n=", 0) == 0) {
      try {
        v.n_attempts = std::stoi(part.substr(2));
      } catch (const std::exception&) {
        throw UsageError("variant '" + token + "': bad attempt count");
      }
    } else {
      v.gating = gating_from_string(part);
    }
  }
  return v;
}

// --- subcommands -------------------------------------------------------------

int cmd_run(const Options& o, bool replay, std::ostream& out, std::ostream& err) {
  const SimConfig cfg = resolve(o);
  const HarvestProfile harvest = load_harvest_input(o, 0.0);
  const auto trace = load_trace_input(o, cfg, err);
  const SimResult r = simulate(cfg, harvest, trace);
  const std::string hash = config_hash(cfg);

  const fs::path dir = prepare_out(o.out_dir);
  {
    auto f = open_out(dir / "trajectory.csv");
    write_trajectory(f, hash, r);
  }
  {
    auto f = open_out(dir / "windows.csv");
    write_windows(f, hash, r);
  }
  {
    auto f = open_out(dir / "resolved_config.json");
    f << config_to_json(cfg).dump(2) << "\n";
  }
  json summary{{"config_sha256", hash},
               {"trace_sha256", input_digest(trace)},
               {"harvest_sha256", input_digest(harvest)},
               {"policy", to_string(cfg.policy)},
               {"gating", to_string(cfg.gating)},
               {"totals", totals_json(r.totals)}};
  if (replay) {
    const ReplayReport rep = replay_check(r, cfg, harvest, trace);
    summary["replay"] = to_string(rep.status);
    if (!rep) err << rep.diff;
  }
  {
    auto f = open_out(dir / "summary.json");
    f << summary.dump(2) << "\n";
  }

  const Totals& t = r.totals;
  out << "policy=" << to_string(cfg.policy) << " gating=" << to_string(cfg.gating)
      << " windows=" << t.windows << " completed=" << t.completed_pipelines
      << " power_failures=" << t.power_failures << " energy_j=" << fmt(t.energy_consumed_j)
      << " accuracy=" << fmt(t.accuracy_total) << "\n";
  if (replay) out << "replay=" << summary["replay"].get<std::string>() << "\n";
  return 0;
}

int cmd_compare(const Options& o, const std::string& variants_text, std::ostream& out,
                std::ostream& err) {
  const SimConfig cfg = resolve(o);
  const HarvestProfile harvest = load_harvest_input(o, 0.0);
  const auto trace = load_trace_input(o, cfg, err);

  std::vector<Variant> variants;
  std::stringstream ss(variants_text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) variants.push_back(parse_variant(tok));
  }
  if (variants.empty()) throw UsageError("--variants: empty list");
  for (const auto& v : variants) {
    SimConfig c = cfg;
    c.policy = v.policy;
    c.gating = v.gating;
    if (v.n_attempts) c.device.schedule.n_attempts = *v.n_attempts;
    c.validate();
  }

  const auto rows = compare_policies(cfg, variants, harvest, trace, o.jobs);
  const std::string hash = config_hash(cfg);
  const fs::path dir = prepare_out(o.out_dir);
  auto f = open_out(dir / "comparison.csv");
  write_hash_line(f, hash);
  f << "variant,policy,gating,n_attempts,energy_j,completed,power_failures,deferred,n_ex1,n_ex2,"
       "n_fallback,accuracy,energy_delta_pct,accuracy_delta,completed_delta\n";
  for (const auto& row : rows) {
    const Totals& t = row.result.totals;
    const auto plan = [&] {
      SimConfig c = cfg;
      c.policy = row.variant.policy;
      c.gating = row.variant.gating;
      if (row.variant.n_attempts) c.device.schedule.n_attempts = *row.variant.n_attempts;
      return c.plan();
    }();
    f << row.variant.name << ',' << to_string(row.variant.policy) << ','
      << to_string(plan.gating) << ',' << plan.schedule.n_attempts << ','
      << fmt(t.energy_consumed_j) << ',' << t.completed_pipelines << ',' << t.power_failures
      << ',' << t.deferred_windows << ',' << t.n_ex1 << ',' << t.n_ex2 << ',' << t.n_fallback
      << ',' << fmt(t.accuracy_total) << ',' << fmt(row.energy_delta_pct) << ','
      << fmt(row.accuracy_delta) << ',' << row.completed_delta << '\n';
    out << row.variant.name << ": energy_j=" << fmt(t.energy_consumed_j)
        << " completed=" << t.completed_pipelines << " delta_pct=" << fmt(row.energy_delta_pct)
        << "\n";
  }
  return 0;
}

int cmd_sweep_thresholds(const Options& o, const std::string& g1_text, const std::string& g2_text,
                         std::ostream& out, std::ostream& err) {
  const SimConfig cfg = resolve(o);
  const auto g1 = parse_axis(g1_text, "--gamma1-grid");
  const auto g2 = parse_axis(g2_text, "--gamma2-grid");
  std::vector<Thresholds> grid;
  for (double a : g1) {
    for (double b : g2) {
      Thresholds th{a, b};
      th.validate();
      grid.push_back(th);
    }
  }
  const auto trace = load_trace_input(o, cfg, err);
  if (trace.empty()) throw ConfigError("threshold sweep needs a non-empty trace");
  const auto cells = sweep_thresholds(trace, grid, o.jobs);

  const std::string hash = config_hash(cfg);
  const fs::path dir = prepare_out(o.out_dir);
  {
    auto f = open_out(dir / "sweep.csv");
    write_hash_line(f, hash);
    f << "gamma1,gamma2,acc_ex1,acc_ex2,acc_total,n_ex1,n_ex2\n";
    for (const auto& c : cells) {
      f << fmt(c.thresholds.gamma1) << ',' << fmt(c.thresholds.gamma2) << ',' << fmt(c.acc_ex1)
        << ',' << fmt(c.acc_ex2) << ',' << fmt(c.acc_total) << ',' << c.n_ex1 << ',' << c.n_ex2
        << '\n';
    }
  }
  // One matrix per metric: rows gamma1, columns gamma2.
  const auto surface = [&](const std::string& name, auto&& value) {
    auto f = open_out(dir / ("surface_" + name + ".csv"));
    write_hash_line(f, hash);
    f << "gamma1";
    for (double b : g2) f << ',' << fmt(b);
    f << '\n';
    for (std::size_t i = 0; i < g1.size(); ++i) {
      f << fmt(g1[i]);
      for (std::size_t k = 0; k < g2.size(); ++k) f << ',' << value(cells[i * g2.size() + k]);
      f << '\n';
    }
  };
  surface("acc_ex1", [](const SweepCell& c) { return fmt(c.acc_ex1); });
  surface("acc_ex2", [](const SweepCell& c) { return fmt(c.acc_ex2); });
  surface("acc_total", [](const SweepCell& c) { return fmt(c.acc_total); });
  surface("n_ex1", [](const SweepCell& c) { return std::to_string(c.n_ex1); });
  surface("n_ex2", [](const SweepCell& c) { return std::to_string(c.n_ex2); });

  out << "cells=" << cells.size() << " trace=" << trace.size() << "\n";
  return 0;
}

int cmd_sweep_capacitance(const Options& o, const std::string& c_text,
                          const std::string& policies_text, std::ostream& out,
                          std::ostream& err) {
  const SimConfig base = resolve(o);
  auto caps = parse_axis(c_text, "--capacitances");
  std::sort(caps.begin(), caps.end());
  std::vector<Variant> variants;
  std::stringstream ss(policies_text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) variants.push_back(parse_variant(tok));
  }
  if (variants.empty()) throw UsageError("--policies: empty list");

  const HarvestProfile harvest = load_harvest_input(o, 2.0);
  const auto trace = load_trace_input(o, base, err);

  struct Job {
    double c;
    Variant v;
    SimConfig cfg;
    Totals totals;
  };
  std::vector<Job> jobs;
  for (double c : caps) {
    for (const auto& v : variants) {
      SimConfig cfg = base;
      cfg.device.capacitor.capacitance_f = c;
      cfg.policy = v.policy;
      cfg.gating = v.gating;
      if (v.n_attempts) cfg.device.schedule.n_attempts = *v.n_attempts;
      cfg.validate();
      jobs.push_back({c, v, cfg, {}});
    }
  }
  parallel_for(jobs.size(), o.jobs,
               [&](std::size_t i) { jobs[i].totals = simulate(jobs[i].cfg, harvest, trace).totals; });

  const std::string hash = config_hash(base);
  const fs::path dir = prepare_out(o.out_dir);
  auto f = open_out(dir / "capacitance.csv");
  write_hash_line(f, hash);
  f << "capacitance_f,variant,completed,power_failures,deferred,energy_j,accuracy\n";
  for (const auto& j : jobs) {
    f << fmt(j.c) << ',' << j.v.name << ',' << j.totals.completed_pipelines << ','
      << j.totals.power_failures << ',' << j.totals.deferred_windows << ','
      << fmt(j.totals.energy_consumed_j) << ',' << fmt(j.totals.accuracy_total) << '\n';
    out << "C=" << fmt(j.c) << " " << j.v.name << ": completed=" << j.totals.completed_pipelines
        << "\n";
  }
  return 0;
}

int cmd_gen_trace(const GeneratorSpec& spec, const std::string& out_dir, std::ostream& out) {
  const GeneratorFit fit = fit_generator(spec);
  const auto trace = generate_trace(spec);
  const TraceStatistics stats = trace_statistics(trace);

  const fs::path dir = prepare_out(out_dir);
  {
    auto f = open_out(dir / "trace.csv");
    f << "# generator n=" << spec.n << " acc1=" << fmt(spec.target_acc1)
      << " acc2=" << fmt(spec.target_acc2) << " person_fraction=" << fmt(spec.person_fraction)
      << " seed=" << spec.seed << "\n";
    write_trace(f, trace);
  }
  const json report{
      {"spec",
       {{"n", spec.n},
        {"acc1", spec.target_acc1},
        {"acc2", spec.target_acc2},
        {"person_fraction", spec.person_fraction},
        {"seed", spec.seed}}},
      {"fit",
       {{"confident_weight", fit.confident_weight},
        {"ambiguous_ex2_accuracy", fit.ambiguous_ex2_accuracy},
        {"confident_min", fit.confident_min},
        {"ambiguous_max", fit.ambiguous_max},
        {"n_person", fit.n_person},
        {"n_confident", fit.n_confident},
        {"n_ambiguous_ex1_correct", fit.n_ambiguous_ex1_correct},
        {"n_ambiguous_ex2_correct", fit.n_ambiguous_ex2_correct}}},
      {"statistics",
       {{"n", stats.n},
        {"acc_at_half_ex1", stats.acc_at_half_ex1},
        {"acc_at_half_ex2", stats.acc_at_half_ex2},
        {"person_fraction", stats.person_fraction}}},
      {"trace_sha256", input_digest(trace)}};
  {
    auto f = open_out(dir / "trace_stats.json");
    f << report.dump(2) << "\n";
  }
  out << "n=" << stats.n << " acc1=" << fmt(stats.acc_at_half_ex1)
      << " acc2=" << fmt(stats.acc_at_half_ex2) << " person_fraction=" << fmt(stats.person_fraction)
      << "\n";
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const SimConfig cfg = resolve(o);
  const PipelinePlan plan = cfg.plan();
  const double e_adm = plan.policy == PolicyVariant::SingleExitBaseline
                           ? plan.e_req_baseline
                           : plan.budget.e_req_ex1 + plan.budget.admission_reserve;
  const double v_start = min_start_voltage(cfg.device.capacitor, e_adm, plan.schedule.guard_delta_j);
  out << "config ok sha256=" << config_hash(cfg) << "\n"
      << "t_exe_worst_s=" << fmt(plan.worst_case_execution_s())
      << " e_req_ex1_j=" << fmt(plan.budget.e_req_ex1)
      << " e_req_escalate_j=" << fmt(plan.budget.e_req_escalate)
      << " min_start_v=" << fmt(v_start) << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"zedsim: energy-harvesting multi-exit inference simulator"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Simulate one configuration");
  bool replay = false;
  add_config_options(*run, o);
  add_input_options(*run, o);
  add_run_options(*run, o);
  run->add_flag("--replay", replay, "Re-simulate and report determinism");

  auto* compare = app.add_subcommand("compare", "Run several policy variants on the same inputs");
  std::string variants = "proposed,proposed:load-switch,proposed:n=1,policy-i,policy-ii,baseline";
  add_config_options(*compare, o);
  add_input_options(*compare, o);
  add_run_options(*compare, o);
  compare->add_option("--variants", variants,
                      "Comma list of policy[:gating][:n=N]")->capture_default_str();

  auto* sweep_t = app.add_subcommand("sweep-thresholds", "Accuracy/exit-count grid over (g1, g2)");
  std::string g1 = "0.1:0.5:0.05";
  std::string g2 = "0.5:0.9:0.05";
  add_config_options(*sweep_t, o);
  sweep_t->add_option("--trace", o.trace_path, "Trace CSV; synthetic if omitted");
  add_run_options(*sweep_t, o);
  sweep_t->add_option("--gamma1-grid", g1, "start:stop:step or comma list")->capture_default_str();
  sweep_t->add_option("--gamma2-grid", g2, "start:stop:step or comma list")->capture_default_str();

  auto* sweep_c = app.add_subcommand("sweep-capacitance", "Completed pipelines versus C");
  std::string caps = "0.1,0.25,0.5,1.0,1.5";
  std::string policies = "proposed,baseline";
  add_config_options(*sweep_c, o);
  add_input_options(*sweep_c, o);
  add_run_options(*sweep_c, o);
  sweep_c->add_option("--capacitances", caps, "Farads, start:stop:step or comma list")->capture_default_str();
  sweep_c->add_option("--policies", policies, "Comma list of policy[:gating][:n=N]")->capture_default_str();

  auto* gen = app.add_subcommand("gen-trace", "Write a calibrated synthetic trace");
  GeneratorSpec spec;
  std::string gen_out = ".";
  gen->add_option("--n", spec.n, "Instances")->capture_default_str();
  gen->add_option("--acc1", spec.target_acc1, "EX1 accuracy at 0.5")->capture_default_str();
  gen->add_option("--acc2", spec.target_acc2, "EX2 accuracy at 0.5")->capture_default_str();
  gen->add_option("--pf", spec.person_fraction, "Person fraction")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check a config and print derived guards");
  add_config_options(*validate, o);
  validate->get_option("--config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*run) return cmd_run(o, replay, out, err);
    if (*compare) return cmd_compare(o, variants, out, err);
    if (*sweep_t) return cmd_sweep_thresholds(o, g1, g2, out, err);
    if (*sweep_c) return cmd_sweep_capacitance(o, caps, policies, out, err);
    if (*gen) return cmd_gen_trace(spec, gen_out, out);
    if (*validate) return cmd_validate(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const UnreachableRequirement& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace zedsim::cli
