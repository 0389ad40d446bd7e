// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "zedsim/sim.hpp"

namespace zedsim {

/*
 * Config files are JSON objects. Every key is optional; missing keys take the
 * defaults of SimConfig. Layout:
 *
 *   capacitor   {capacitance_f, v_off, v_on, v_max}
 *   stages      {<stage name>: {current_ma | energy_mj, duration_ms, supply_v}}
 *   thresholds  {gamma1, gamma2}
 *   schedule    {window_s, deadline_s, n_attempts, guard_delta_j}
 *   pmu         {converter_efficiency, harvest_model, fixed_harvest_voltage}
 *   dt_ms, led_requirement, reserve_escalation_measurement,
 *   initial_v, horizon_s, seed, policy, gating
 *
 * A stage given by energy_mj gets the current that reproduces that energy
 * over duration_ms at supply_v. Unknown keys are rejected.
 */
SimConfig config_from_json(const nlohmann::json& j);
SimConfig load_config_file(const std::string& path);

/// Fully resolved form; config_from_json(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const SimConfig& cfg);

/// SHA-256 (hex) of the canonical dump of config_to_json(cfg).
std::string config_hash(const SimConfig& cfg);

std::string sha256_hex(const std::string& data);

}  // namespace zedsim
