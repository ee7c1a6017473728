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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tblock/cost_model.hpp"
#include "tblock/hardware.hpp"
#include "tblock/tiling.hpp"

namespace tblock {

/// Engine settings that replace the planned ones when present.
struct ParamOverrides {
    std::optional<Scheme> scheme;
    std::optional<int> t;
    std::optional<std::vector<int>> tile;
    std::optional<std::vector<int>> device_tile_grid;
    std::optional<bool> lazy;
    std::optional<bool> rst;
    std::optional<bool> prefetch;
    std::optional<QueueVariant> variant;

    /// Fields set in `over` win.
    ParamOverrides merged(const ParamOverrides& over) const;
    void apply(TilingParams& p) const;
};

struct SuiteEntry {
    std::string name;
    std::optional<std::vector<int>> domain;
    ParamOverrides params;
};

struct SuiteConfig {
    std::vector<SuiteEntry> stencils;
    std::string hardware = "a100";
    std::uint64_t seed = 1;
    std::string output;
    std::uint64_t max_cells = std::uint64_t{1} << 24;
    bool full_scale = false;
    ParamOverrides params;
};

/// Parses a JSON suite. Errors name the offending key, or the line and
/// column for malformed text.
SuiteConfig parse_suite(std::string_view text);
SuiteConfig load_suite(const std::string& path);

/// Every catalog stencil at its desk-scale domain.
SuiteConfig default_suite();

/// Halves every extent until the cell count is at most `max_cells`.
std::vector<int> desk_domain(const std::vector<int>& full, std::uint64_t max_cells);

struct CommandOptions {
    HardwareSpec hardware = a100();
    int workers = 1;
    std::optional<std::uint64_t> seed;
    bool two_sided = true;
    ParamOverrides params;
};

/// Output of one subcommand: JSON records, CSV rows and a human table.
struct Report {
    std::string command;
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    std::string csv;
    std::string roofline_csv;
    std::string table;
    int exit_code = 0;
    /// Additional (file name, contents) pairs written next to the report.
    std::vector<std::pair<std::string, std::string>> extra_files;
};

Report cmd_plan(const SuiteConfig& suite, const CommandOptions& opts);

/// Runs the engine on every suite entry, checks it against the reference
/// and compares measured counters with the model.
Report cmd_simulate(const SuiteConfig& suite, const CommandOptions& opts);

/// Worked-example parity rows. Rows whose value moves with a non-reference
/// hardware spec are reported as expected divergence.
Report cmd_validate(const CommandOptions& opts);

/// Plan and simulate in one pass.
Report cmd_report(const SuiteConfig& suite, const CommandOptions& opts);

/// Writes `<command>.json`, `<command>.csv` and, when present, `roofline.csv`.
void write_report(const Report& report, const std::string& dir);

std::string report_json(const Report& report);

} // namespace tblock
