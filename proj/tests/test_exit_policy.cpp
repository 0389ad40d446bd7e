// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "zedsim/exit_policy.hpp"
#include "zedsim/traces.hpp"

using namespace zedsim;

namespace {

const Thresholds kDefault{0.3, 0.7};

EnergyBudget table_budget() {
  return make_budget(StageTable::published(), Gating::Mosfet, LedRequirement::WorstCase, 0.0);
}

EnergyOracle fixed_oracle(double admission, double escalation) {
  return [=](MeasurementPoint p) -> std::optional<double> {
    return p == MeasurementPoint::Admission ? admission : escalation;
  };
}

std::vector<InferenceInstance> random_trace(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<InferenceInstance> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, u(rng), u(rng), u(rng) < 0.5 ? Label::Person : Label::NoPerson});
  }
  return t;
}

}  // namespace

TEST_CASE("evaluate_ex1") {
  CHECK(evaluate_ex1(0.95, kDefault) == Ex1Outcome::Person);
  CHECK(evaluate_ex1(0.3, kDefault) == Ex1Outcome::NoPerson);
  CHECK(evaluate_ex1(0.7, kDefault) == Ex1Outcome::Person);
  CHECK(evaluate_ex1(0.31, kDefault) == Ex1Outcome::Ambiguous);
  CHECK(evaluate_ex1(0.5, {0.5, 0.5}) == Ex1Outcome::Person);
}

TEST_CASE("fallback and EX2 labels") {
  CHECK(fallback_label(0.5) == Label::Person);
  CHECK(fallback_label(0.49) == Label::NoPerson);
  CHECK(fallback_label(0.69) == Label::Person);
  CHECK(evaluate_ex2(0.5) == Label::Person);
  CHECK(evaluate_ex2(0.0) == Label::NoPerson);
  CHECK(evaluate_ex2(1.0) == Label::Person);
}

TEST_CASE("policy_i_select") {
  CHECK(policy_i_select(13.4e-3, 8.118e-3, 13.390e-3) == PlannedExit::Ex2);
  CHECK(policy_i_select(10e-3, 8.118e-3, 13.390e-3) == PlannedExit::Ex1);
  CHECK(policy_i_select(0.0, 8.118e-3, 13.390e-3) == PlannedExit::None);
}

TEST_CASE("decide_proposed") {
  const EnergyBudget b = table_budget();
  SUBCASE("confident early exit") {
    const auto d = decide_proposed({0, 0.9, 0.1, Label::Person}, kDefault, b, fixed_oracle(1, 1));
    CHECK(d.exit_taken == ExitTaken::Ex1);
    CHECK(d.prediction == Label::Person);
    CHECK_FALSE(d.escalation_requested);
  }
  SUBCASE("ambiguous escalates with energy") {
    const auto d = decide_proposed({0, 0.55, 0.2, Label::NoPerson}, kDefault, b, fixed_oracle(1, 1));
    CHECK(d.exit_taken == ExitTaken::Ex2);
    CHECK(d.prediction == Label::NoPerson);
    CHECK(d.escalation_requested);
  }
  SUBCASE("ambiguous falls back when the second reading is short") {
    const auto d = decide_proposed({0, 0.55, 0.2, Label::NoPerson}, kDefault, b,
                                   fixed_oracle(1, b.escalation_requirement() * 0.99));
    CHECK(d.exit_taken == ExitTaken::Ex1Fallback);
    CHECK(d.prediction == Label::Person);
    CHECK(d.energy_denied);
  }
  SUBCASE("admission denied") {
    const auto d = decide_proposed({0, 0.9, 0.9, Label::Person}, kDefault, b,
                                   fixed_oracle(b.e_req_ex1 * 0.5, 1));
    CHECK(d.exit_taken == ExitTaken::None);
    CHECK_FALSE(d.prediction);
    CHECK(d.energy_denied);
  }
  SUBCASE("oracle failure is a fault") {
    const EnergyOracle broken = [](MeasurementPoint p) -> std::optional<double> {
      if (p == MeasurementPoint::Escalation) throw std::runtime_error("adc");
      return 1.0;
    };
    const auto d = decide_proposed({0, 0.55, 0.2, Label::NoPerson}, kDefault, b, broken);
    CHECK(d.fault);
    CHECK(d.exit_taken == ExitTaken::None);
    CHECK_FALSE(d.prediction);
  }
}

TEST_CASE("confidence-only rule never checks the second reading") {
  const EnergyBudget b = table_budget();
  int escalation_queries = 0;
  const EnergyOracle counting = [&](MeasurementPoint p) -> std::optional<double> {
    if (p == MeasurementPoint::Escalation) ++escalation_queries;
    return p == MeasurementPoint::Admission ? 1.0 : 0.0;
  };
  const auto d = decide_confidence_only({0, 0.55, 0.2, Label::NoPerson}, kDefault, b, counting);
  CHECK(d.exit_taken == ExitTaken::Ex2);
  CHECK(escalation_queries == 0);
}

TEST_CASE("decision invariants under random oracle answers") {
  const EnergyBudget b = table_budget();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> e(0.0, 0.2);
  for (int i = 0; i < 5000; ++i) {
    const InferenceInstance inst{i, u(rng), u(rng), Label::Person};
    double g1 = 0.5 * u(rng), g2 = 0.5 + 0.5 * u(rng);
    const Thresholds th{g1, g2};
    const double a = e(rng), s = 0.01 * u(rng);
    const auto d = decide_proposed(inst, th, b, fixed_oracle(a, s));
    REQUIRE((d.exit_taken == ExitTaken::None) == !d.prediction.has_value());
    if (d.energy_denied) {
      REQUIRE((d.exit_taken == ExitTaken::Ex1Fallback || d.exit_taken == ExitTaken::None));
    }
    if (d.exit_taken == ExitTaken::Ex2) REQUIRE(s >= b.escalation_requirement());
    REQUIRE(d.escalation_requested == (a >= b.admission_requirement() &&
                                       evaluate_ex1(inst.o1, th) == Ex1Outcome::Ambiguous));
    REQUIRE(d == decide_proposed(inst, th, b, fixed_oracle(a, s)));
  }
}

TEST_CASE("unlimited energy partitions every instance") {
  const EnergyBudget b = table_budget();
  for (const auto& inst : random_trace(4, 2000)) {
    const auto d = decide_proposed(inst, kDefault, b, fixed_oracle(10.0, 10.0));
    CHECK((d.exit_taken == ExitTaken::Ex1 || d.exit_taken == ExitTaken::Ex2));
  }
}

TEST_CASE("sweep_thresholds") {
  const auto trace = random_trace(8, 3000);
  const std::vector<Thresholds> grid{{0.5, 0.5}, {0.0, 1.0}, {0.3, 0.7}};
  const auto cells = sweep_thresholds(trace, grid, 3);
  REQUIRE(cells.size() == 3);

  std::int64_t correct = 0;
  for (const auto& inst : trace) correct += fallback_label(inst.o1) == inst.label;
  CHECK(cells[0].n_ex2 == 0);
  CHECK_FALSE(cells[0].acc_ex2);
  CHECK(*cells[0].acc_total == doctest::Approx(static_cast<double>(correct) / trace.size()));
  CHECK(cells[0].acc_ex1 == cells[0].acc_total);

  CHECK(cells[1].n_ex1 == 0);
  CHECK_FALSE(cells[1].acc_ex1);
  CHECK(cells[1].acc_total == cells[1].acc_ex2);

  for (const auto& c : cells) CHECK(c.n_ex1 + c.n_ex2 == static_cast<std::int64_t>(trace.size()));
  CHECK(sweep_thresholds(trace, grid, 1)[2].acc_total == cells[2].acc_total);
  CHECK_THROWS_AS(sweep_thresholds({}, grid, 1), std::invalid_argument);
}

TEST_CASE("widening the band never reduces escalations") {
  const auto trace = random_trace(12, 2000);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Thresholds inner{0.5 * u(rng), 0.5 + 0.5 * u(rng)};
    const Thresholds outer{inner.gamma1 * u(rng), inner.gamma2 + (1.0 - inner.gamma2) * u(rng)};
    const std::vector<Thresholds> grid{inner, outer};
    const auto cells = sweep_thresholds(trace, grid);
    REQUIRE(cells[1].n_ex2 >= cells[0].n_ex2);
  }
}

TEST_CASE("degenerate band equals single-threshold rule") {
  const EnergyBudget b = table_budget();
  const Thresholds half{0.5, 0.5};
  for (const auto& inst : random_trace(31, 2000)) {
    const auto d = decide_proposed(inst, half, b, fixed_oracle(10.0, 10.0));
    CHECK(d.exit_taken == ExitTaken::Ex1);
    CHECK(d.prediction == fallback_label(inst.o1));
  }
}

TEST_CASE("wider band helps on the calibrated trace") {
  const auto trace = generate_trace(GeneratorSpec{});
  const std::vector<Thresholds> grid{{0.1, 0.9}, {0.5, 0.5}};
  const auto cells = sweep_thresholds(trace, grid);
  CHECK(*cells[0].acc_total >= *cells[1].acc_total);
}

TEST_CASE("threshold validation") {
  CHECK_NOTHROW(kDefault.validate());
  CHECK_THROWS_AS((Thresholds{0.6, 0.7}.validate()), ConfigError);
  CHECK_THROWS_AS((Thresholds{0.3, 0.4}.validate()), ConfigError);
  CHECK_THROWS_AS((Thresholds{-0.1, 0.7}.validate()), ConfigError);
}
