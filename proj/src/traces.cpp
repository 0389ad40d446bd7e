// SPDX-License-Identifier: Apache-2.0
#include "zedsim/traces.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

namespace zedsim {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::string_view name) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(line, "field '" + std::string(name) + "' is not a number: '" +
                               std::string(field) + "'");
  }
  return value;
}

// Iterates data lines, skipping blanks and comments. The first data line is
// checked against `header`.
template <typename RowFn>
bool for_each_row(std::istream& in, std::string_view header, RowFn&& row) {
  std::string raw;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      std::string compact;
      for (char c : line) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != header) {
        throw ParseError(line_no, "expected header '" + std::string(header) + "', got '" +
                                      std::string(line) + "'");
      }
      seen_header = true;
      continue;
    }
    row(split(line), line_no);
  }
  return seen_header;
}

void write_double(std::ostream& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

struct Rng {
  std::mt19937_64 engine;

  double uniform01() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine();
    } while (x >= limit);
    return x % bound;
  }

  // Fisher-Yates; std::shuffle is not specified across standard libraries.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }
};

double score(Label label, bool correct, double distance) {
  const bool high = (label == Label::Person) == correct;
  return high ? 0.5 + distance : 0.5 - distance;
}

}  // namespace

std::vector<InferenceInstance> load_trace(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<InferenceInstance> trace;
  const bool had_header = for_each_row(
      in, "id,o1,o2,label", [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() != 4) {
          throw ParseError(line, "expected 4 fields, got " + std::to_string(f.size()));
        }
        InferenceInstance inst;
        inst.id = parse_number<std::int64_t>(f[0], line, "id");
        inst.o1 = parse_number<double>(f[1], line, "o1");
        inst.o2 = parse_number<double>(f[2], line, "o2");
        const int label = parse_number<int>(f[3], line, "label");
        if (!(inst.o1 >= 0.0 && inst.o1 <= 1.0)) {
          throw ValidationError(line, "o1 out of [0,1]: " + std::string(f[1]));
        }
        if (!(inst.o2 >= 0.0 && inst.o2 <= 1.0)) {
          throw ValidationError(line, "o2 out of [0,1]: " + std::string(f[2]));
        }
        if (label != 0 && label != 1) {
          throw ValidationError(line, "label must be 0 or 1: " + std::string(f[3]));
        }
        if (!trace.empty() && inst.id <= trace.back().id) {
          throw ValidationError(line, "ids must be unique and ascending");
        }
        inst.label = label == 1 ? Label::Person : Label::NoPerson;
        trace.push_back(inst);
      });
  if (trace.empty() && warnings) {
    warnings->push_back(had_header ? "trace has a header but no rows" : "trace input is empty");
  }
  return trace;
}

std::vector<InferenceInstance> load_trace_file(const std::string& path,
                                               std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
  return load_trace(in, warnings);
}

void write_trace(std::ostream& out, std::span<const InferenceInstance> trace) {
  out << "id,o1,o2,label\n";
  for (const auto& inst : trace) {
    out << inst.id << ',';
    write_double(out, inst.o1);
    out << ',';
    write_double(out, inst.o2);
    out << ',' << (inst.label == Label::Person ? 1 : 0) << '\n';
  }
}

HarvestProfile load_harvest(std::istream& in) {
  std::vector<HarvestProfile::Segment> segments;
  for_each_row(in, "t_start_s,i_h_ma", [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 2) {
      throw ParseError(line, "expected 2 fields, got " + std::to_string(f.size()));
    }
    const double t = parse_number<double>(f[0], line, "t_start_s");
    const double ma = parse_number<double>(f[1], line, "i_h_ma");
    if (!(ma >= 0.0)) throw ValidationError(line, "harvest current must be >= 0");
    if (segments.empty() ? t != 0.0 : !(t > segments.back().start_s)) {
      throw ValidationError(line, "segment starts must begin at 0 and strictly increase");
    }
    segments.push_back({t, ma * 1e-3});
  });
  if (segments.empty()) throw ParseError(0, "harvest profile has no segments");
  return HarvestProfile(std::move(segments));
}

HarvestProfile load_harvest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open harvest file '" + path + "'");
  return load_harvest(in);
}

void write_harvest(std::ostream& out, const HarvestProfile& profile) {
  out << "t_start_s,i_h_ma\n";
  for (const auto& s : profile.segments()) {
    write_double(out, s.start_s);
    out << ',';
    write_double(out, s.current_a * 1e3);
    out << '\n';
  }
}

void GeneratorSpec::validate() const {
  if (n < 1) throw std::invalid_argument("generator: n must be >= 1");
  if (!(target_acc1 >= 0.5 && target_acc1 <= target_acc2 && target_acc2 <= 1.0)) {
    throw std::invalid_argument("generator: infeasible targets, need 0.5 <= acc1 <= acc2 <= 1");
  }
  if (!(person_fraction > 0.0 && person_fraction < 1.0)) {
    throw std::invalid_argument("generator: person_fraction must lie in (0, 1)");
  }
}

GeneratorFit fit_generator(const GeneratorSpec& spec) {
  spec.validate();
  GeneratorFit fit;
  const auto n = spec.n;
  fit.confident_weight = 2.0 * spec.target_acc1 - 1.0;
  fit.n_person = std::llround(n * spec.person_fraction);
  fit.n_confident = std::llround(n * fit.confident_weight);
  const std::int64_t n_amb = n - fit.n_confident;
  const auto clamp_amb = [n_amb](std::int64_t k) { return std::clamp<std::int64_t>(k, 0, n_amb); };
  fit.n_ambiguous_ex1_correct = clamp_amb(std::llround(n * spec.target_acc1) - fit.n_confident);
  fit.n_ambiguous_ex2_correct = clamp_amb(std::llround(n * spec.target_acc2) - fit.n_confident);
  fit.ambiguous_ex2_accuracy =
      n_amb > 0 ? static_cast<double>(fit.n_ambiguous_ex2_correct) / n_amb : 1.0;
  return fit;
}

std::vector<InferenceInstance> generate_trace(const GeneratorSpec& spec) {
  const GeneratorFit fit = fit_generator(spec);
  const auto n = static_cast<std::size_t>(spec.n);
  Rng rng{std::mt19937_64{spec.seed}};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<InferenceInstance> trace(n);
  for (std::size_t i = 0; i < n; ++i) trace[i].id = static_cast<std::int64_t>(i);

  auto by_label = order;
  rng.shuffle(by_label);
  for (std::size_t k = 0; k < n; ++k) {
    trace[by_label[k]].label =
        k < static_cast<std::size_t>(fit.n_person) ? Label::Person : Label::NoPerson;
  }

  auto by_component = order;
  rng.shuffle(by_component);
  const auto n_conf = static_cast<std::size_t>(fit.n_confident);
  std::vector<std::size_t> ambiguous(by_component.begin() + static_cast<std::ptrdiff_t>(n_conf),
                                     by_component.end());
  std::vector<bool> o1_correct(n, true);
  std::vector<bool> o2_correct(n, true);
  std::vector<bool> confident(n, false);
  for (std::size_t k = 0; k < n_conf; ++k) confident[by_component[k]] = true;
  for (std::size_t k = 0; k < ambiguous.size(); ++k) {
    o1_correct[ambiguous[k]] = k < static_cast<std::size_t>(fit.n_ambiguous_ex1_correct);
  }
  // EX2 correctness is drawn independently of EX1 correctness inside the
  // ambiguous component.
  rng.shuffle(ambiguous);
  for (std::size_t k = 0; k < ambiguous.size(); ++k) {
    o2_correct[ambiguous[k]] = k < static_cast<std::size_t>(fit.n_ambiguous_ex2_correct);
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& inst = trace[i];
    if (confident[i]) {
      const double d1 = fit.confident_min + (0.5 - fit.confident_min) * rng.uniform01();
      const double d2 = fit.confident_min + (0.5 - fit.confident_min) * rng.uniform01();
      inst.o1 = score(inst.label, true, d1);
      inst.o2 = score(inst.label, true, d2);
    } else {
      const double d1 = fit.ambiguous_max * (1.0 - rng.uniform01());
      const double d2 = 0.5 * (1.0 - rng.uniform01());
      inst.o1 = score(inst.label, o1_correct[i], d1);
      inst.o2 = score(inst.label, o2_correct[i], d2);
    }
  }
  return trace;
}

TraceStatistics trace_statistics(std::span<const InferenceInstance> trace) {
  if (trace.empty()) throw std::invalid_argument("trace statistics need a non-empty trace");
  TraceStatistics s;
  s.n = static_cast<std::int64_t>(trace.size());
  std::int64_t c1 = 0, c2 = 0, persons = 0;
  for (const auto& inst : trace) {
    c1 += fallback_label(inst.o1) == inst.label;
    c2 += evaluate_ex2(inst.o2) == inst.label;
    persons += inst.label == Label::Person;
  }
  s.acc_at_half_ex1 = static_cast<double>(c1) / s.n;
  s.acc_at_half_ex2 = static_cast<double>(c2) / s.n;
  s.person_fraction = static_cast<double>(persons) / s.n;
  return s;
}

}  // namespace zedsim
