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

#include "tblock/hardware.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tblock/error.hpp"

namespace tblock {

void check_hardware(const HardwareSpec& hw) {
    const auto positive = [](double v, const char* key) {
        if (!(v > 0))
            throw ConfigError(std::string("hardware field '") + key + "' must be strictly positive");
    };
    positive(hw.gm_bandwidth, "gm_bandwidth_bytes_per_s");
    positive(hw.sm_bandwidth, "sm_bandwidth_bytes_per_s");
    positive(hw.compute_throughput, "compute_flops_per_s");
    positive(hw.cell_bytes, "cell_bytes");
    positive(hw.onchip_capacity, "onchip_capacity_bytes");
    positive(hw.sm_count, "sm_count");
    positive(hw.device_sync_latency, "device_sync_latency_s");
    positive(hw.max_threads_per_sm, "max_threads_per_sm");
    for (const auto& [op, l] : hw.op_latencies) {
        positive(l, "op_latencies");
        if (!hw.op_throughputs.count(op))
            throw ConfigError("op '" + op + "' has a latency but no throughput");
    }
    for (const auto& [op, thr] : hw.op_throughputs) {
        positive(thr, "op_throughputs");
        if (!hw.op_latencies.count(op))
            throw ConfigError("op '" + op + "' has a throughput but no latency");
    }
}

HardwareSpec a100() {
    HardwareSpec hw;
    hw.name = "a100";
    hw.gm_bandwidth = 1555e9;
    hw.sm_bandwidth = 19.49e12;
    hw.compute_throughput = 9.7e12;
    hw.cell_bytes = 8;
    hw.onchip_capacity = 164 * 1024;
    hw.sm_count = 108;
    hw.device_sync_latency = 1.2e-6;
    hw.max_threads_per_sm = 2048;
    // Double FMA, shared load and global load: in-flight work per SM stays
    // at or below 1024 for all three.
    hw.op_latencies = {{"dfma", 8}, {"lds", 23}, {"ldg", 466}};
    hw.op_throughputs = {{"dfma", 32}, {"lds", 16}, {"ldg", 1.28}};
    return hw;
}

HardwareSpec hardware_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("hardware spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("hardware spec must be a JSON object");
    HardwareSpec hw;
    const auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key))
            throw ConfigError(std::string("hardware spec lacks '") + key + "'");
        if (!j.at(key).is_number())
            throw ConfigError(std::string("hardware field '") + key + "' must be a number");
        return j.at(key);
    };
    hw.name = j.value("name", std::string("custom"));
    hw.gm_bandwidth = need("gm_bandwidth_bytes_per_s").get<double>();
    hw.sm_bandwidth = need("sm_bandwidth_bytes_per_s").get<double>();
    hw.compute_throughput = need("compute_flops_per_s").get<double>();
    hw.cell_bytes = need("cell_bytes").get<double>();
    hw.onchip_capacity = need("onchip_capacity_bytes").get<double>();
    hw.sm_count = need("sm_count").get<int>();
    hw.device_sync_latency = need("device_sync_latency_s").get<double>();
    hw.max_threads_per_sm = need("max_threads_per_sm").get<int>();
    for (const char* key : {"op_latencies", "op_throughputs"}) {
        if (!j.contains(key))
            continue;
        if (!j.at(key).is_object())
            throw ConfigError(std::string("hardware field '") + key + "' must be an object");
        auto& dst = std::string_view(key) == "op_latencies" ? hw.op_latencies : hw.op_throughputs;
        for (const auto& [op, v] : j.at(key).items()) {
            if (!v.is_number())
                throw ConfigError("op '" + op + "' in '" + key + "' must be a number");
            dst[op] = v.get<double>();
        }
    }
    check_hardware(hw);
    return hw;
}

std::string hardware_to_json(const HardwareSpec& hw) {
    nlohmann::ordered_json j;
    j["name"] = hw.name;
    j["gm_bandwidth_bytes_per_s"] = hw.gm_bandwidth;
    j["sm_bandwidth_bytes_per_s"] = hw.sm_bandwidth;
    j["compute_flops_per_s"] = hw.compute_throughput;
    j["cell_bytes"] = hw.cell_bytes;
    j["onchip_capacity_bytes"] = hw.onchip_capacity;
    j["sm_count"] = hw.sm_count;
    j["device_sync_latency_s"] = hw.device_sync_latency;
    j["max_threads_per_sm"] = hw.max_threads_per_sm;
    j["op_latencies"] = hw.op_latencies;
    j["op_throughputs"] = hw.op_throughputs;
    return j.dump(2) + "\n";
}

HardwareSpec load_hardware(const std::string& preset_or_path) {
    if (preset_or_path == "a100")
        return a100();
    std::ifstream in(preset_or_path);
    if (!in)
        throw ConfigError("unknown hardware preset or unreadable file '" + preset_or_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return hardware_from_json(ss.str());
}

} // namespace tblock
