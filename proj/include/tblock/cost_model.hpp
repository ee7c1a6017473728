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

#include "tblock/hardware.hpp"
#include "tblock/multiqueue.hpp"
#include "tblock/stencil.hpp"
#include "tblock/tiling.hpp"

namespace tblock {

/// Per-cell costs and cell counts of one kernel configuration. Global
/// traffic grows with depth when halos are fetched: d_gm(t) = d_gm +
/// gm_halo_per_depth * t.
struct KernelProfile {
    double a_gm = 2;
    double a_sm = 0;
    double a_cmp = 0;
    double d_gm = 0;
    double gm_halo_per_depth = 0;
    double d_sm = 0;
    double d_cmp = 0;
    double d_all = 0;
    int t = 1;
    int rad = 1;
    std::vector<int> tile; ///< tiled extents, grid order (last is tile_x)
    int n_syncs = 1;

    double d_gm_at(double depth) const { return d_gm + gm_halo_per_depth * depth; }
};

/// Throws PreconditionError unless d_all > 0 and t >= 1.
void check_profile(const KernelProfile& p);

enum class Component { gm, sm, cmp };
std::string_view to_string(Component c);

struct ComponentTimes {
    double gm = 0;
    double sm = 0;
    double cmp = 0;
    double max() const;
};

ComponentTimes component_times(const HardwareSpec& hw, const KernelProfile& p);

/// Largest time; ties resolve in the order gm, sm, cmp.
Component bottleneck(const ComponentTimes& times);

/// Cells per second: d_all * t / max(T).
double attainable_perf(const HardwareSpec& hw, const KernelProfile& p);

/// Product over tiled dims of (tile - k*t*rad) / tile, k = 2 for two-sided
/// halos and 1 otherwise.
double valid_proportion_sm(const KernelProfile& p, bool two_sided = true);

double valid_proportion_device(double t_stencil, double t_sync, int n);

struct DepthThreshold {
    bool attainable = false;
    double t_real = 0;
    int t_int = 0;
};

/// Least depth at which global memory stops being the bottleneck, solved in
/// closed form (all times are linear in t).
DepthThreshold min_depth_to_shift(const HardwareSpec& hw, const KernelProfile& p);

struct TileWidth {
    double bound = 0;
    int chosen = 0; ///< bound rounded up to a multiple of 32
};

/// Square tile width at which a device tile shifts the bottleneck.
TileWidth min_tile_width_3d(const HardwareSpec& hw, const KernelProfile& p);

struct LittlesLaw {
    double concurrency = 0; ///< latency * throughput
    double parallelism = 0; ///< threads * ilp
    bool saturates = false;
};

LittlesLaw littles_check(const HardwareSpec& hw, const std::string& op, int n_threads, int ilp);

struct OnchipBudget {
    int planes = 0; ///< circular range of the multi-queue
    std::uint64_t plane_cells = 0;
    std::uint64_t bytes = 0;
    std::uint64_t capacity = 0;
    bool fits = false;
};

/// Multi-queue footprint of a block: range x plane x cell size. Device tiles
/// keep a rad-wide ring around the tile in each plane.
OnchipBudget onchip_bytes_required(const HardwareSpec& hw, const StencilShape& st, const TilingParams& params);

struct Practical {
    double P = 0; ///< cells/s
    double V = 0;
    double PP = 0; ///< cells/s
    ComponentTimes times;
    Component bottleneck = Component::gm;
};

/// PP = P * V with the scheme's valid proportion.
Practical practical_perf(const HardwareSpec& hw, const KernelProfile& p, Scheme scheme, bool two_sided = true);

/// Per-block profile of an SM tile; a_sm uses the register-streaming column
/// when `rst` is set.
KernelProfile sm_profile(const StencilShape& st, const std::vector<int>& tile, int t, bool rst = true);

/// Device-wide profile of one device tile made of `grid` blocks of `tile`.
KernelProfile device_profile(const StencilShape& st, const std::vector<int>& tile, const std::vector<int>& grid,
                             int t, bool rst = true, int n_syncs = 1);

struct PlanOptions {
    bool two_sided = true;
    int depth_ceiling = 64;
    int n_syncs = 1;
    int n_threads = 256;
    int ilp = 4;
    bool rst = true;
};

struct Plan {
    Scheme scheme = Scheme::sm_tiling;
    bool feasible = false;
    int t = 0;
    std::vector<int> tile;
    std::vector<int> device_tile_grid;
    QueueVariant variant = QueueVariant::computing_address;
    bool lazy = false;
    KernelProfile profile;
    ComponentTimes times;
    Component bottleneck = Component::gm;
    double predicted_P = 0; ///< cells/s
    double predicted_V = 0;
    double predicted_PP = 0; ///< cells/s
    OnchipBudget onchip;
    std::string note;
    std::vector<Plan> candidates; ///< per-scheme estimates, sm-tiling first
};

/// Best depth for each scheme, then the scheme with the larger PP (ties go
/// to sm-tiling). `domain` lists grid extents, streaming dimension first.
Plan choose_scheme(const HardwareSpec& hw, const StencilShape& st, const std::vector<int>& domain,
                   const PlanOptions& opts = {});

/// TilingParams realising a plan's scheme, depth and tile.
TilingParams plan_params(const Plan& plan);

} // namespace tblock
