/*
 *   Copyright 2026 The tblock Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <map>
#include <string>
#include <string_view>

namespace tblock {

/// Device constants consumed by the cost model. Bandwidths are bytes/s,
/// compute is flop/s, latencies are cycles and op throughputs are
/// operations per cycle per SM.
struct HardwareSpec {
    std::string name = "custom";
    double gm_bandwidth = 0;
    double sm_bandwidth = 0;
    double compute_throughput = 0;
    double cell_bytes = 0;
    double onchip_capacity = 0; ///< bytes per block
    int sm_count = 0;
    double device_sync_latency = 0;
    int max_threads_per_sm = 0;
    std::map<std::string, double> op_latencies;
    std::map<std::string, double> op_throughputs;

    friend bool operator==(const HardwareSpec&, const HardwareSpec&) = default;
};

/// Throws ConfigError unless every quantity is strictly positive and each
/// op has both a latency and a throughput.
void check_hardware(const HardwareSpec& hw);

HardwareSpec a100();

HardwareSpec hardware_from_json(std::string_view text);
std::string hardware_to_json(const HardwareSpec& hw);

/// A preset name ("a100") or the path of a JSON file.
HardwareSpec load_hardware(const std::string& preset_or_path);

} // namespace tblock
