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

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tblock/error.hpp"
#include "tblock/planner.hpp"

namespace {

struct Args {
    std::string hardware;
    std::string suite;
    std::string out;
    std::vector<std::string> stencils;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    bool two_sided = true;
    bool one_sided = false;
    bool full_scale = false;
    std::optional<std::uint64_t> max_cells;

    std::string scheme;
    std::optional<int> t;
    std::vector<int> tile;
    std::vector<int> grid;
    std::optional<bool> lazy;
    std::optional<bool> rst;
    std::optional<bool> prefetch;
    std::string variant;
};

void add_suite_flags(CLI::App* cmd, Args& a) {
    cmd->add_option("--hardware", a.hardware, "hardware preset (a100) or JSON file");
    cmd->add_option("--suite", a.suite, "JSON suite file");
    cmd->add_option("--stencils", a.stencils, "catalog stencils to run instead of a suite")->delimiter(',');
    cmd->add_option("--out", a.out, "directory for JSON and CSV output");
    cmd->add_option("--two-sided-halo", a.two_sided, "count the halo on both tile sides (default true)");
    cmd->add_flag("--paper-parity", a.one_sided, "one-sided valid-proportion formula");
    cmd->add_option("--max-cells", a.max_cells, "cell cap for desk-scale domains");
    cmd->add_flag("--full-scale", a.full_scale, "run the full catalog domains");
}

void add_engine_flags(CLI::App* cmd, Args& a) {
    cmd->add_option("--workers", a.workers, "worker threads (default: available cores)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "seed for the random input grids");
    cmd->add_option("--scheme", a.scheme, "sm-tiling or device-tiling");
    cmd->add_option("--t", a.t, "temporal depth")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tile", a.tile, "tile extents, streaming dimension excluded")->delimiter(',');
    cmd->add_option("--grid", a.grid, "device tile grid in blocks")->delimiter(',');
    cmd->add_option("--lazy", a.lazy, "lazy halo batching");
    cmd->add_option("--rst", a.rst, "register streaming accounting");
    cmd->add_option("--prefetch", a.prefetch, "prefetch phase tagging");
    cmd->add_option("--variant", a.variant, "shifting-data, shifting-address or computing-address");
}

tblock::SuiteConfig make_suite(const Args& a) {
    tblock::SuiteConfig s = a.suite.empty() ? tblock::default_suite() : tblock::load_suite(a.suite);
    if (!a.stencils.empty()) {
        s.stencils.clear();
        for (const auto& n : a.stencils) {
            tblock::make_benchmark(n);
            s.stencils.push_back({n, std::nullopt, {}});
        }
    }
    if (!a.hardware.empty())
        s.hardware = a.hardware;
    if (!a.out.empty())
        s.output = a.out;
    if (a.max_cells)
        s.max_cells = *a.max_cells;
    if (a.full_scale)
        s.full_scale = true;
    return s;
}

tblock::CommandOptions make_options(const Args& a, const std::string& hardware) {
    tblock::CommandOptions o;
    o.hardware = tblock::load_hardware(hardware.empty() ? "a100" : hardware);
    o.workers = a.workers > 0 ? a.workers : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    o.seed = a.seed;
    o.two_sided = a.two_sided && !a.one_sided;
    if (!a.scheme.empty())
        o.params.scheme = tblock::scheme_from_string(a.scheme);
    o.params.t = a.t;
    if (!a.tile.empty())
        o.params.tile = a.tile;
    if (!a.grid.empty())
        o.params.device_tile_grid = a.grid;
    o.params.lazy = a.lazy;
    o.params.rst = a.rst;
    o.params.prefetch = a.prefetch;
    if (!a.variant.empty()) {
        try {
            o.params.variant = tblock::queue_variant_from_string(a.variant);
        } catch (const tblock::Error& e) {
            throw tblock::ConfigError(e.what());
        }
    }
    return o;
}

int emit(const tblock::Report& rep, const std::string& out) {
    std::cout << rep.table;
    if (!out.empty()) {
        tblock::write_report(rep, out);
        std::cout << "wrote " << rep.command << " output to " << out << "\n";
    }
    return rep.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal-blocking planner and desk-scale stencil simulator"};
    app.require_subcommand(1);
    Args a;
    auto* plan = app.add_subcommand("plan", "choose scheme, depth and tile per stencil");
    auto* simulate = app.add_subcommand("simulate", "run the tiling engine and check it against the reference");
    auto* validate = app.add_subcommand("validate", "worked-example parity table");
    auto* report = app.add_subcommand("report", "plan and simulate, writing every output file");
    for (auto* cmd : {plan, simulate, report})
        add_suite_flags(cmd, a);
    for (auto* cmd : {simulate, report})
        add_engine_flags(cmd, a);
    validate->add_option("--hardware", a.hardware, "hardware preset (a100) or JSON file");
    validate->add_option("--out", a.out, "directory for JSON and CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed())
            return emit(tblock::cmd_validate(make_options(a, a.hardware)), a.out);
        const tblock::SuiteConfig suite = make_suite(a);
        const tblock::CommandOptions opts = make_options(a, suite.hardware);
        if (plan->parsed())
            return emit(tblock::cmd_plan(suite, opts), suite.output);
        if (simulate->parsed())
            return emit(tblock::cmd_simulate(suite, opts), suite.output);
        return emit(tblock::cmd_report(suite, opts), suite.output);
    } catch (const tblock::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
