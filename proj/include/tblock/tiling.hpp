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
#include <string>
#include <string_view>
#include <vector>

#include "tblock/grid.hpp"
#include "tblock/multiqueue.hpp"
#include "tblock/stencil.hpp"

namespace tblock {

enum class Scheme { sm_tiling, device_tiling };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

/// Temporal-blocking configuration. Dimension 0 of the grid is streamed;
/// `tile` and `device_tile_grid` list the remaining (tiled) dimensions in
/// grid order, so the last entry is the contiguous tile_x.
struct TilingParams {
    Scheme scheme = Scheme::sm_tiling;
    int t = 1;
    std::vector<int> tile;
    std::vector<int> device_tile_grid;
    bool lazy = false;
    bool rst = false;
    bool prefetch = false;
    bool transpose_halo = true;
    QueueVariant variant = QueueVariant::computing_address;
    int workers = 1;
};

struct Phase {
    std::string tag;
    std::uint64_t cells = 0;

    friend bool operator==(const Phase&, const Phase&) = default;
};

/// Counters from one simulated run. `cells_computed` counts lane updates of
/// the simulated thread blocks (every block updates its full tile, padding
/// lanes included); `cells_valid` counts the updates of the output core.
struct ExecutionTrace {
    std::uint64_t gm_loads = 0;
    std::uint64_t gm_stores = 0;
    std::uint64_t gm_halo_loads = 0;
    std::uint64_t gm_halo_stores = 0;
    std::uint64_t halo_transactions = 0;
    std::uint64_t onchip_register = 0;
    std::uint64_t onchip_shared = 0;
    std::uint64_t syncs_block = 0;
    std::uint64_t syncs_device = 0;
    std::uint64_t cells_computed = 0;
    std::uint64_t cells_valid = 0;
    std::uint64_t blocks = 0;
    std::uint64_t device_tiles = 0;
    std::vector<Phase> wall_phases;

    friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

struct RunResult {
    Grid output;
    ExecutionTrace trace;
};

/// Throws PreconditionError when the parameters cannot drive a run.
void check_params(const Grid& grid, const StencilShape& stencil, const TilingParams& params);

/// Overlapped tiling: every block loads its tile plus a rad*t halo, streams
/// t steps on chip and stores its core.
RunResult run_sm_tiling(const Grid& grid, const StencilShape& stencil, const TilingParams& params);

/// One device tile at a time. Non-lazy runs exchange a rad-wide halo
/// through a staging buffer every step (update, block sync, push, device
/// barrier, swap, pull, block sync); lazy runs fetch a rad*t halo once and
/// fire one device barrier per device tile.
RunResult run_device_tiling(const Grid& grid, const StencilShape& stencil, const TilingParams& params);

RunResult run_tiling(const Grid& grid, const StencilShape& stencil, const TilingParams& params);

struct AccountingReport {
    double a_gm = 0;   ///< global accesses (halo traffic included) per valid update
    double a_sm = 0;   ///< shared-level accesses per computed update
    double a_reg = 0;  ///< register-level accesses per computed update
    double valid_proportion = 0;
    std::uint64_t syncs_block = 0;
    std::uint64_t syncs_device = 0;
};

AccountingReport trace_summary(const ExecutionTrace& trace);

std::string trace_to_json(const ExecutionTrace& trace);
std::string phases_to_csv(const ExecutionTrace& trace);

} // namespace tblock
