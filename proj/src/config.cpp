// SPDX-License-Identifier: Apache-2.0
#include "zedsim/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

namespace zedsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": must be finite");
  return x;
}

template <typename Int>
Int integer(const json& obj, const std::string& key, const std::string& where, Int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.is_number_unsigned()) return v.get<Int>();
    if (v.get<std::int64_t>() < 0) throw ConfigError(where + "." + key + ": must be >= 0");
  }
  return v.get<Int>();
}

std::string text(const json& obj, const std::string& key, const std::string& where,
                 std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

StageProfile stage_from_json(const json& j, const std::string& where, const StageProfile* base) {
  reject_unknown(j, where,
                 {"current_a", "current_ma", "energy_mj", "duration_s", "duration_ms", "supply_v"});
  StageProfile p = base ? *base : StageProfile{};
  p.supply_v = number(j, "supply_v", where, p.supply_v);

  const int n_duration = j.contains("duration_s") + j.contains("duration_ms");
  if (n_duration > 1) throw ConfigError(where + ": give one of duration_s, duration_ms");
  if (j.contains("duration_s")) p.duration_s = number(j, "duration_s", where, 0.0);
  if (j.contains("duration_ms")) p.duration_s = number(j, "duration_ms", where, 0.0) * 1e-3;

  const int n_amount = j.contains("current_a") + j.contains("current_ma") + j.contains("energy_mj");
  if (n_amount > 1) throw ConfigError(where + ": give one of current_a, current_ma, energy_mj");
  if (j.contains("current_a")) p.current_a = number(j, "current_a", where, 0.0);
  if (j.contains("current_ma")) p.current_a = number(j, "current_ma", where, 0.0) * 1e-3;
  if (j.contains("energy_mj")) {
    const double e = number(j, "energy_mj", where, 0.0) * 1e-3;
    if (e > 0.0 && !(p.duration_s > 0.0 && p.supply_v > 0.0)) {
      throw ConfigError(where + ": energy_mj needs a positive duration and supply_v");
    }
    p.current_a = e > 0.0 ? e / (p.supply_v * p.duration_s) : 0.0;
  }
  if (p.current_a < 0.0 || p.duration_s < 0.0 || p.supply_v < 0.0) {
    throw ConfigError(where + ": current, duration and supply_v must be >= 0");
  }
  return p;
}

std::string_view to_string(HarvestModel m) {
  return m == HarvestModel::TerminalVoltage ? "terminal_voltage" : "fixed_voltage";
}

HarvestModel harvest_model_from_string(const std::string& s) {
  if (s == "terminal_voltage") return HarvestModel::TerminalVoltage;
  if (s == "fixed_voltage") return HarvestModel::FixedVoltage;
  throw ConfigError("pmu.harvest_model: unknown value '" + s +
                    "' (expected terminal_voltage|fixed_voltage)");
}

}  // namespace

SimConfig config_from_json(const json& j) {
  reject_unknown(j, "config",
                 {"capacitor", "stages", "thresholds", "schedule", "pmu", "dt_ms", "dt_us",
                  "led_requirement", "reserve_escalation_measurement", "initial_v", "horizon_s",
                  "seed", "policy", "gating"});
  SimConfig cfg;
  DeviceConfig& d = cfg.device;

  if (j.contains("capacitor")) {
    const json& c = j.at("capacitor");
    reject_unknown(c, "capacitor", {"capacitance_f", "v_off", "v_on", "v_max"});
    d.capacitor.capacitance_f = number(c, "capacitance_f", "capacitor", d.capacitor.capacitance_f);
    d.capacitor.v_off = number(c, "v_off", "capacitor", d.capacitor.v_off);
    d.capacitor.v_on = number(c, "v_on", "capacitor", d.capacitor.v_on);
    d.capacitor.v_max = number(c, "v_max", "capacitor", d.capacitor.v_max);
  }
  if (j.contains("stages")) {
    const json& s = j.at("stages");
    if (!s.is_object()) throw ConfigError("stages: expected an object");
    for (const auto& [name, entry] : s.items()) {
      Stage stage;
      try {
        stage = stage_from_string(name);
      } catch (const ConfigError&) {
        throw ConfigError("stages: unknown stage '" + name + "'");
      }
      const StageProfile* base = d.stages.contains(stage) ? &d.stages.at(stage) : nullptr;
      d.stages.set(stage, stage_from_json(entry, "stages." + name, base));
    }
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    reject_unknown(t, "thresholds", {"gamma1", "gamma2"});
    d.thresholds.gamma1 = number(t, "gamma1", "thresholds", d.thresholds.gamma1);
    d.thresholds.gamma2 = number(t, "gamma2", "thresholds", d.thresholds.gamma2);
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    reject_unknown(s, "schedule", {"window_s", "deadline_s", "n_attempts", "guard_delta_j"});
    d.schedule.window_s = number(s, "window_s", "schedule", d.schedule.window_s);
    d.schedule.deadline_s = number(s, "deadline_s", "schedule", d.schedule.deadline_s);
    d.schedule.n_attempts = integer<int>(s, "n_attempts", "schedule", d.schedule.n_attempts);
    d.schedule.guard_delta_j = number(s, "guard_delta_j", "schedule", d.schedule.guard_delta_j);
  }
  if (j.contains("pmu")) {
    const json& p = j.at("pmu");
    reject_unknown(p, "pmu", {"converter_efficiency", "harvest_model", "fixed_harvest_voltage"});
    d.pmu.converter_efficiency =
        number(p, "converter_efficiency", "pmu", d.pmu.converter_efficiency);
    d.pmu.harvest_model = harvest_model_from_string(
        text(p, "harvest_model", "pmu", std::string(to_string(d.pmu.harvest_model))));
    d.pmu.fixed_harvest_voltage =
        number(p, "fixed_harvest_voltage", "pmu", d.pmu.fixed_harvest_voltage);
  }
  if (j.contains("dt_ms") && j.contains("dt_us")) throw ConfigError("config: give one of dt_ms, dt_us");
  if (j.contains("dt_us")) d.dt = Micros{integer<std::int64_t>(j, "dt_us", "config", d.dt.count())};
  if (j.contains("dt_ms")) d.dt = from_seconds(number(j, "dt_ms", "config", 1.0) * 1e-3);
  d.led_requirement = led_requirement_from_string(
      text(j, "led_requirement", "config", std::string(to_string(d.led_requirement))));
  d.reserve_escalation_measurement = boolean(j, "reserve_escalation_measurement", "config",
                                             d.reserve_escalation_measurement);

  cfg.initial_v = number(j, "initial_v", "config", cfg.initial_v);
  cfg.horizon_s = number(j, "horizon_s", "config", cfg.horizon_s);
  cfg.seed = integer<std::uint64_t>(j, "seed", "config", cfg.seed);
  cfg.policy = policy_from_string(text(j, "policy", "config", std::string(to_string(cfg.policy))));
  cfg.gating = gating_from_string(text(j, "gating", "config", std::string(to_string(cfg.gating))));
  return cfg;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const SimConfig& cfg) {
  const DeviceConfig& d = cfg.device;
  json stages = json::object();
  for (const auto& [stage, p] : d.stages.profiles()) {
    stages[std::string(to_string(stage))] = {
        {"current_a", p.current_a}, {"duration_s", p.duration_s}, {"supply_v", p.supply_v}};
  }
  return json{
      {"capacitor",
       {{"capacitance_f", d.capacitor.capacitance_f},
        {"v_off", d.capacitor.v_off},
        {"v_on", d.capacitor.v_on},
        {"v_max", d.capacitor.v_max}}},
      {"stages", stages},
      {"thresholds", {{"gamma1", d.thresholds.gamma1}, {"gamma2", d.thresholds.gamma2}}},
      {"schedule",
       {{"window_s", d.schedule.window_s},
        {"deadline_s", d.schedule.deadline_s},
        {"n_attempts", d.schedule.n_attempts},
        {"guard_delta_j", d.schedule.guard_delta_j}}},
      {"pmu",
       {{"converter_efficiency", d.pmu.converter_efficiency},
        {"harvest_model", to_string(d.pmu.harvest_model)},
        {"fixed_harvest_voltage", d.pmu.fixed_harvest_voltage}}},
      {"dt_us", d.dt.count()},
      {"led_requirement", to_string(d.led_requirement)},
      {"reserve_escalation_measurement", d.reserve_escalation_measurement},
      {"initial_v", cfg.initial_v},
      {"horizon_s", cfg.horizon_s},
      {"seed", cfg.seed},
      {"policy", to_string(cfg.policy)},
      {"gating", to_string(cfg.gating)},
  };
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string config_hash(const SimConfig& cfg) { return sha256_hex(config_to_json(cfg).dump()); }

}  // namespace zedsim
