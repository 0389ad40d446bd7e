// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "zedsim/sim.hpp"
#include "zedsim/traces.hpp"

using namespace zedsim;

namespace {

const std::vector<InferenceInstance>& calibrated() {
  static const auto trace = generate_trace(GeneratorSpec{});
  return trace;
}

SimConfig table_iv(double horizon = 200.0) {
  SimConfig cfg;
  cfg.horizon_s = horizon;
  return cfg;
}

}  // namespace

TEST_CASE("energy ledger closes") {
  for (auto p : {PolicyVariant::Proposed, PolicyVariant::PolicyI, PolicyVariant::PolicyII,
                 PolicyVariant::SingleExitBaseline}) {
    for (double ih : {0.0, 2e-3, 8e-3}) {
      SimConfig cfg = table_iv();
      cfg.device.capacitor.capacitance_f = 0.1;
      cfg.initial_v = 4.0;
      cfg.policy = p;
      const auto r = simulate(cfg, HarvestProfile::constant(ih), calibrated());
      CHECK(std::abs(r.totals.ledger_residual_j()) <= 1e-6);
    }
  }
}

TEST_CASE("exit counts add up to completed pipelines") {
  SimConfig cfg = table_iv(500.0);
  cfg.device.capacitor.capacitance_f = 0.25;
  cfg.initial_v = 3.9;
  const auto r = simulate(cfg, HarvestProfile::constant(2e-3), calibrated());
  const Totals& t = r.totals;
  CHECK(t.n_ex1 + t.n_ex2 + t.n_fallback == t.completed_pipelines);
  CHECK(t.completed_pipelines + t.power_failures + t.deferred_windows == t.windows);
  std::int64_t completed = 0;
  for (const auto& w : r.windows) completed += w.completed();
  CHECK(completed == t.completed_pipelines);
  for (const auto& w : r.windows) CHECK(w.deferred == !w.started_at.has_value());
}

TEST_CASE("zero harvest at v_off does nothing") {
  SimConfig cfg = table_iv();
  cfg.initial_v = 3.6;
  const auto r = simulate(cfg, HarvestProfile::constant(0.0), calibrated());
  CHECK(r.totals.completed_pipelines == 0);
  CHECK(r.totals.power_failures == 0);
  CHECK(r.totals.measurements == 0);
  for (const auto& s : r.trajectory) CHECK(s.v_c == 3.6);
}

TEST_CASE("strong harvest saturates a small capacitor") {
  SimConfig cfg = table_iv(400.0);
  cfg.device.capacitor.capacitance_f = 0.1;
  cfg.initial_v = 4.0;
  const HarvestProfile h({{0.0, 1e-3}, {200.0, 6e-3}});
  const auto r = simulate(cfg, h, calibrated());
  double vmax_first = 0.0, vmax_second = 0.0;
  for (const auto& s : r.trajectory) {
    (s.time_s < 200.0 ? vmax_first : vmax_second) =
        std::max(s.time_s < 200.0 ? vmax_first : vmax_second, s.v_c);
  }
  CHECK(vmax_first < 4.5);
  CHECK(vmax_second == 4.5);
  CHECK(r.totals.clamp_loss_j > 0.0);
}

TEST_CASE("trajectory is sampled every 10 ms") {
  const auto r = simulate(table_iv(20.0), HarvestProfile::constant(0.0), calibrated());
  std::int64_t plain = 0;
  for (const auto& s : r.trajectory) plain += s.event.empty();
  CHECK(plain == 2001);
  CHECK(std::is_sorted(r.trajectory.begin(), r.trajectory.end(),
                       [](const auto& a, const auto& b) { return a.time_s < b.time_s; }));
}

TEST_CASE("EX2 pipelines add 255 ms of inference plus the green LED") {
  SimConfig cfg = table_iv(20.0);
  cfg.device.reserve_escalation_measurement = false;
  cfg.policy = PolicyVariant::PolicyII;
  const std::vector<InferenceInstance> trace{{0, 0.9, 0.9, Label::Person},
                                             {1, 0.55, 0.9, Label::Person}};
  const auto r = simulate(cfg, HarvestProfile::constant(0.0), trace);
  auto duration = [&](double t0) {
    double begin = -1, end = -1;
    for (const auto& s : r.trajectory) {
      if (s.time_s < t0 || s.time_s >= t0 + 10.0) continue;
      if (s.event == "capture_preprocess_mosfet") begin = s.time_s;
      if (s.event == "ex1" || s.event == "ex2") end = s.time_s;
    }
    return end - begin;
  };
  // Blue LED both times; the escalated run adds the remaining segment and green.
  const auto& st = cfg.device.stages;
  CHECK(duration(10.0) - duration(0.0) ==
        doctest::Approx(0.255 + st.at(Stage::LedGreen).duration_s).epsilon(1e-9));
  CHECK(st.at(Stage::InferenceEx2).duration_s / st.at(Stage::InferenceEx1).duration_s ==
        doctest::Approx(1.587).epsilon(0.005 / 1.587));
}

TEST_CASE("narrowing the band never increases energy with ample harvest") {
  const std::vector<Thresholds> bands{{0.05, 0.95}, {0.2, 0.8}, {0.3, 0.7}, {0.45, 0.55},
                                      {0.5, 0.5}};
  double prev = 1e300;
  for (const auto& th : bands) {
    SimConfig cfg = table_iv();
    cfg.device.thresholds = th;
    const auto r = simulate(cfg, HarvestProfile::constant(20e-3), calibrated());
    CHECK(r.totals.completed_pipelines == 20);
    CHECK(r.totals.energy_consumed_j <= prev);
    prev = r.totals.energy_consumed_j;
  }
}

TEST_CASE("proposed policy never fails on random inputs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<HarvestProfile::Segment> segs;
    for (int k = 0; k < 10; ++k) segs.push_back({20.0 * k, 6e-3 * u(rng)});
    GeneratorSpec g;
    g.seed = seed;
    g.n = 50;
    SimConfig cfg = table_iv();
    cfg.device.capacitor.capacitance_f = 0.1 + 0.4 * u(rng);
    cfg.initial_v = 3.6 + 0.9 * u(rng);
    const auto r = simulate(cfg, HarvestProfile(segs), generate_trace(g));
    CHECK(r.totals.power_failures == 0);
  }
}

TEST_CASE("configuration errors are raised before running") {
  SimConfig cfg = table_iv();
  cfg.device.schedule.deadline_s = 8.0;
  CHECK_THROWS_AS(simulate(cfg, HarvestProfile{}, calibrated()), ConfigError);
  cfg = table_iv();
  cfg.initial_v = 3.5;
  CHECK_THROWS_AS(simulate(cfg, HarvestProfile{}, calibrated()), ConfigError);
  cfg = table_iv();
  cfg.horizon_s = 0.0;
  CHECK_THROWS_AS(simulate(cfg, HarvestProfile{}, calibrated()), ConfigError);
  cfg = table_iv();
  std::vector<InferenceInstance> short_trace(calibrated().begin(), calibrated().begin() + 5);
  CHECK_THROWS_AS(simulate(cfg, HarvestProfile{}, short_trace), ConfigError);
  cfg.device.dt = Micros{0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("replay") {
  SimConfig cfg = table_iv();
  cfg.device.capacitor.capacitance_f = 0.25;
  cfg.initial_v = 4.0;
  const HarvestProfile h = HarvestProfile::constant(2e-3);
  const auto r = simulate(cfg, h, calibrated());

  SUBCASE("identical inputs replay exactly") {
    const auto rep = replay_check(r, cfg, h, calibrated());
    CHECK(rep.status == ReplayStatus::Exact);
    CHECK(static_cast<bool>(rep));
    CHECK(rep.diff.empty());
  }
  SUBCASE("a different trace seed is a mismatch") {
    GeneratorSpec g;
    g.seed = 8;
    const auto rep = replay_check(r, cfg, h, generate_trace(g));
    CHECK_FALSE(static_cast<bool>(rep));
    CHECK_FALSE(rep.diff.empty());
  }
  SUBCASE("halving dt stays within tolerance of a dt/4 reference") {
    SimConfig ref = cfg;
    ref.device.dt = Micros{250};
    SimConfig half = cfg;
    half.device.dt = Micros{500};
    const auto r_ref = simulate(ref, h, calibrated());
    const auto r_half = simulate(half, h, calibrated());
    const double e_ref = r_ref.totals.energy_consumed_j;
    CHECK(std::abs(r.totals.energy_consumed_j - e_ref) <= 1e-3 * e_ref);
    CHECK(std::abs(r_half.totals.energy_consumed_j - e_ref) <= 1e-3 * e_ref);
    const auto rep = compare_runs(r, r_half);
    CHECK(rep.status == ReplayStatus::TolerantMatch);
    CHECK_FALSE(static_cast<bool>(rep));
  }
}

TEST_CASE("compare_policies") {
  SimConfig cfg = table_iv();
  const std::vector<Variant> variants{{"mosfet", PolicyVariant::Proposed, Gating::Mosfet, {}},
                                      {"load-switch", PolicyVariant::Proposed, Gating::LoadSwitch, {}},
                                      {"baseline", PolicyVariant::SingleExitBaseline, Gating::Mosfet, {}}};
  const auto rows = compare_policies(cfg, variants, HarvestProfile{}, calibrated(), 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].energy_delta_pct == 0.0);
  CHECK(rows[0].energy_delta_pct < rows[1].energy_delta_pct);
  CHECK(rows[0].result.totals.n_ex1 == rows[1].result.totals.n_ex1);
  const auto serial = compare_policies(cfg, variants, HarvestProfile{}, calibrated(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(serial[i].result.totals == rows[i].result.totals);
  }

  const std::vector<Variant> fixed_vs_adaptive{{"adaptive", PolicyVariant::Proposed, Gating::Mosfet, {}},
                                               {"fixed", PolicyVariant::Proposed, Gating::Mosfet, 1}};
  const auto fa = compare_policies(cfg, fixed_vs_adaptive, HarvestProfile{}, calibrated());
  CHECK(fa[1].result.totals.measurements <= fa[0].result.totals.measurements);
}
