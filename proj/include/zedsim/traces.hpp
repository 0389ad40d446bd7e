// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zedsim/exit_policy.hpp"
#include "zedsim/pmu.hpp"

namespace zedsim {

/// Malformed input row; line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed row whose values break a field invariant.
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Reads an `id,o1,o2,label` CSV. Blank lines and lines starting with '#'
/// are skipped. Empty input yields an empty trace and a warning.
std::vector<InferenceInstance> load_trace(std::istream& in,
                                          std::vector<std::string>* warnings = nullptr);
std::vector<InferenceInstance> load_trace_file(const std::string& path,
                                               std::vector<std::string>* warnings = nullptr);
void write_trace(std::ostream& out, std::span<const InferenceInstance> trace);

/// Reads a `t_start_s,i_h_ma` CSV into a piecewise-constant profile.
HarvestProfile load_harvest(std::istream& in);
HarvestProfile load_harvest_file(const std::string& path);
void write_harvest(std::ostream& out, const HarvestProfile& profile);

struct GeneratorSpec {
  std::int64_t n = 5000;
  double target_acc1 = 0.7265;
  double target_acc2 = 0.8309;
  double person_fraction = 0.5386;
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument unless
  /// 0.5 <= acc1 <= acc2 <= 1, 0 < person_fraction < 1 and n >= 1.
  void validate() const;
};

/*
 * Score model behind generate_trace. Each instance falls in one of two EX1
 * components:
 *
 *   confident  (weight w)     o1 on the correct side, distance from 0.5 in
 *                             [confident_min, 0.5]; o2 also confident and
 *                             correct.
 *   ambiguous  (weight 1 - w) o1 distance from 0.5 in (0, ambiguous_max],
 *                             on the correct side for exactly half of them;
 *                             o2 correct for a fraction r, distance in (0, 0.5].
 *
 * Thresholding at 0.5 then gives acc1 = w + (1 - w)/2 and
 * acc2 = w + (1 - w)·r. Component sizes are rounded to whole instances.
 */
struct GeneratorFit {
  double confident_weight = 0.0;
  double ambiguous_ex2_accuracy = 0.0;
  double confident_min = 0.2;
  double ambiguous_max = 0.3;
  std::int64_t n_person = 0;
  std::int64_t n_confident = 0;
  std::int64_t n_ambiguous_ex1_correct = 0;
  std::int64_t n_ambiguous_ex2_correct = 0;
};

/// Throws std::invalid_argument for infeasible targets.
GeneratorFit fit_generator(const GeneratorSpec& spec);

/// Pure function of the GeneratorSpec (seed included), identical across platforms.
std::vector<InferenceInstance> generate_trace(const GeneratorSpec& spec);

struct TraceStatistics {
  double acc_at_half_ex1 = 0.0;
  double acc_at_half_ex2 = 0.0;
  double person_fraction = 0.0;
  std::int64_t n = 0;
};

/// Throws std::invalid_argument on an empty trace.
TraceStatistics trace_statistics(std::span<const InferenceInstance> trace);

}  // namespace zedsim
