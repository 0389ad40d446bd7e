// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "zedsim/traces.hpp"

using namespace zedsim;

namespace {

std::vector<InferenceInstance> parse(const std::string& text,
                                     std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return load_trace(in, warnings);
}

// Accuracy at 0.5, scored directly from the raw scores.
double raw_accuracy(const std::vector<InferenceInstance>& t, bool second) {
  int ok = 0;
  for (const auto& i : t) {
    const double s = second ? i.o2 : i.o1;
    ok += (s >= 0.5) == (i.label == Label::Person);
  }
  return static_cast<double>(ok) / t.size();
}

}  // namespace

TEST_CASE("load_trace reads rows") {
  const auto t = parse("id,o1,o2,label\n0,0.95,0.99,1\n# note\n\n1,0.1,0.2,0\n");
  REQUIRE(t.size() == 2);
  CHECK(t[0] == InferenceInstance{0, 0.95, 0.99, Label::Person});
  CHECK(t[1].label == Label::NoPerson);
}

TEST_CASE("load_trace rejects bad input with line numbers") {
  try {
    parse("id,o1,o2,label\n0,0.5,0.5,1\n3,1.2,0.5,1\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse("id,o1,o2,label\n0,abc,0.5,1\n");
    FAIL("expected a parse error");
  } catch (const ValidationError&) {
    FAIL("wrong error type");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("id,o1,o2,label\n0,0.5,0.5\n"), ParseError);
  CHECK_THROWS_AS(parse("id,o1,o2,label\n0,0.5,0.5,2\n"), ValidationError);
  CHECK_THROWS_AS(parse("id,o1,o2,label\n1,0.5,0.5,1\n1,0.5,0.5,1\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b,c,d\n"), ParseError);
}

TEST_CASE("empty trace input warns") {
  std::vector<std::string> warnings;
  CHECK(parse("", &warnings).empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("trace round-trips through CSV") {
  GeneratorSpec g;
  g.n = 200;
  const auto t = generate_trace(g);
  std::ostringstream out;
  write_trace(out, t);
  CHECK(parse(out.str()) == t);
}

TEST_CASE("harvest CSV") {
  std::istringstream in("t_start_s,i_h_ma\n0,1\n200,5.5\n");
  const HarvestProfile h = load_harvest(in);
  CHECK(h.current_at(10.0) == doctest::Approx(1e-3));
  CHECK(h.current_at(250.0) == doctest::Approx(5.5e-3));
  std::ostringstream out;
  write_harvest(out, h);
  std::istringstream again(out.str());
  CHECK(load_harvest(again).segments().size() == 2);

  std::istringstream late("t_start_s,i_h_ma\n5,1\n");
  CHECK_THROWS_AS(load_harvest(late), ValidationError);
  std::istringstream negative("t_start_s,i_h_ma\n0,-1\n");
  CHECK_THROWS_AS(load_harvest(negative), ValidationError);
  std::istringstream empty("t_start_s,i_h_ma\n");
  CHECK_THROWS_AS(load_harvest(empty), ParseError);
}

TEST_CASE("generator hits its calibration targets") {
  const auto t = generate_trace(GeneratorSpec{});
  REQUIRE(t.size() == 5000);
  CHECK(std::abs(raw_accuracy(t, false) - 0.7265) <= 0.01);
  CHECK(std::abs(raw_accuracy(t, true) - 0.8309) <= 0.01);
  const TraceStatistics s = trace_statistics(t);
  CHECK(s.acc_at_half_ex1 == raw_accuracy(t, false));
  CHECK(s.acc_at_half_ex2 == raw_accuracy(t, true));
  CHECK(std::abs(s.person_fraction - 0.5386) <= 0.02);
}

TEST_CASE("calibration holds across feasible specs") {
  for (const auto& [a1, a2, pf] : std::vector<std::tuple<double, double, double>>{
           {0.5, 0.5, 0.3}, {0.6, 0.9, 0.5}, {0.8, 0.85, 0.7}, {0.95, 0.99, 0.2}}) {
    GeneratorSpec g{5000, a1, a2, pf, 3};
    const auto t = generate_trace(g);
    const auto s = trace_statistics(t);
    CHECK(std::abs(s.acc_at_half_ex1 - a1) <= 0.01);
    CHECK(std::abs(s.acc_at_half_ex2 - a2) <= 0.01);
    const double sigma = std::sqrt(pf * (1 - pf) / 5000.0);
    CHECK(std::abs(s.person_fraction - pf) <= 3 * sigma);
  }
}

TEST_CASE("EX2 is the stronger head") {
  const auto t = generate_trace(GeneratorSpec{});
  int o1_right_o2_wrong = 0;
  for (const auto& i : t) {
    const bool r1 = (i.o1 >= 0.5) == (i.label == Label::Person);
    const bool r2 = (i.o2 >= 0.5) == (i.label == Label::Person);
    o1_right_o2_wrong += r1 && !r2;
    // Confidently right at EX1 implies right at EX2.
    if (std::abs(i.o1 - 0.5) >= 0.3 && r1) CHECK(r2);
  }
  CHECK(raw_accuracy(t, true) > raw_accuracy(t, false));
  CHECK(o1_right_o2_wrong < 5000);
}

TEST_CASE("perfect classifiers put every score on the right side") {
  GeneratorSpec g{1000, 1.0, 1.0, 0.5, 1};
  for (const auto& i : generate_trace(g)) {
    const bool person = i.label == Label::Person;
    CHECK((i.o1 >= 0.5) == person);
    CHECK((i.o2 >= 0.5) == person);
    CHECK(i.o1 != 0.5);
  }
}

TEST_CASE("generation is a pure function of GeneratorSpec") {
  GeneratorSpec g;
  g.n = 1000;
  CHECK(generate_trace(g) == generate_trace(g));
  GeneratorSpec other = g;
  other.seed = 8;
  CHECK(generate_trace(g) != generate_trace(other));
}

TEST_CASE("infeasible generator specs") {
  CHECK_THROWS_AS(fit_generator({5000, 0.4, 0.8, 0.5, 1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_generator({5000, 0.9, 0.8, 0.5, 1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_generator({5000, 0.7, 0.8, 1.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_generator({0, 0.7, 0.8, 0.5, 1}), std::invalid_argument);
}

TEST_CASE("trace_statistics edge cases") {
  const std::vector<InferenceInstance> one{{0, 0.7, 0.2, Label::Person}};
  const auto s = trace_statistics(one);
  CHECK(s.n == 1);
  CHECK(s.acc_at_half_ex1 == 1.0);
  CHECK(s.acc_at_half_ex2 == 0.0);
  CHECK_THROWS_AS(trace_statistics({}), std::invalid_argument);
}
