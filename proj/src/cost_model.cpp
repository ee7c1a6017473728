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

#include "tblock/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tblock/error.hpp"

namespace tblock {

namespace {

double product(const std::vector<int>& v) {
    return std::accumulate(v.begin(), v.end(), 1.0, [](double a, int b) { return a * b; });
}

QueueVariant table_variant(int dims) {
    return dims == 3 ? QueueVariant::shifting_address : QueueVariant::computing_address;
}

TilingParams budget_params(Scheme scheme, int t, const std::vector<int>& tile, QueueVariant variant) {
    TilingParams p;
    p.scheme = scheme;
    p.t = t;
    p.tile = tile;
    p.variant = variant;
    return p;
}

void finish(Plan& plan, const HardwareSpec& hw, bool two_sided) {
    const Practical pr = practical_perf(hw, plan.profile, plan.scheme, two_sided);
    plan.times = pr.times;
    plan.bottleneck = pr.bottleneck;
    plan.predicted_P = pr.P;
    plan.predicted_V = pr.V;
    plan.predicted_PP = pr.PP;
}

bool core_positive(const std::vector<int>& tile, int t, int rad) {
    return std::all_of(tile.begin(), tile.end(), [&](int x) { return x - 2 * t * rad > 0; });
}

Plan plan_sm(const HardwareSpec& hw, const StencilShape& st, const PlanOptions& o) {
    Plan plan;
    plan.scheme = Scheme::sm_tiling;
    plan.variant = table_variant(st.dims);
    const int r = st.radius;
    if (st.dims == 2) {
        plan.tile = {o.n_threads};
    } else if (st.dims == 3) {
        const int w = min_tile_width_3d(hw, sm_profile(st, {}, 1, o.rst)).chosen + 2 * r;
        plan.tile = {w, w};
    }
    const DepthThreshold shift = min_depth_to_shift(hw, sm_profile(st, plan.tile, 1, o.rst));
    int t = shift.attainable ? std::min(shift.t_int, o.depth_ceiling) : o.depth_ceiling;
    const auto ok = [&](int d) {
        return core_positive(plan.tile, d, r) &&
               onchip_bytes_required(hw, st, budget_params(Scheme::sm_tiling, d, plan.tile, plan.variant)).fits;
    };
    while (t > 1 && !ok(t))
        --t;
    if (!ok(t)) {
        plan.note = "no depth fits the on-chip capacity with a non-empty core";
        return plan;
    }
    plan.feasible = true;
    plan.t = t;
    plan.onchip = onchip_bytes_required(hw, st, budget_params(Scheme::sm_tiling, t, plan.tile, plan.variant));
    plan.profile = sm_profile(st, plan.tile, t, o.rst);
    plan.note = shift.attainable ? (t < shift.t_int ? "depth capped below the shift threshold" : "shift depth")
                                 : "bottleneck never leaves global memory";
    finish(plan, hw, o.two_sided);
    return plan;
}

Plan plan_device(const HardwareSpec& hw, const StencilShape& st, const std::vector<int>& domain,
                 const PlanOptions& o) {
    Plan plan;
    plan.scheme = Scheme::device_tiling;
    plan.variant = table_variant(st.dims);
    plan.lazy = o.n_syncs == 1;
    const int r = st.radius;
    if (st.dims == 2)
        plan.tile = {o.n_threads};
    else if (st.dims == 3)
        plan.tile = {32, 32};
    for (std::size_t i = 0; i < plan.tile.size(); ++i) {
        const int interior = domain[i + 1] - 2 * r;
        plan.device_tile_grid.push_back((interior + plan.tile[i] - 1) / plan.tile[i]);
    }
    while (product(plan.device_tile_grid) > hw.sm_count) {
        auto it = std::max_element(plan.device_tile_grid.begin(), plan.device_tile_grid.end());
        --*it;
    }
    const auto ok = [&](int d) {
        for (std::size_t i = 0; i < plan.tile.size(); ++i) {
            const int lanes = plan.tile[i] * plan.device_tile_grid[i];
            if (lanes < domain[i + 1] && lanes - 2 * d * r < 1)
                return false;
        }
        return onchip_bytes_required(hw, st, budget_params(Scheme::device_tiling, d, plan.tile, plan.variant)).fits;
    };
    int t = 0;
    for (int d = 1; d <= o.depth_ceiling && ok(d); ++d)
        t = d;
    if (t == 0) {
        plan.note = "no depth fits the on-chip capacity";
        return plan;
    }
    plan.feasible = true;
    plan.t = t;
    plan.onchip = onchip_bytes_required(hw, st, budget_params(Scheme::device_tiling, t, plan.tile, plan.variant));
    plan.profile = device_profile(st, plan.tile, plan.device_tile_grid, t, o.rst, o.n_syncs);
    plan.note = t == o.depth_ceiling ? "depth ceiling reached" : "deepest depth fitting on chip";
    finish(plan, hw, o.two_sided);
    return plan;
}

} // namespace

void check_profile(const KernelProfile& p) {
    if (!(p.d_all > 0))
        throw PreconditionError("profile needs d_all > 0");
    if (p.t < 1)
        throw PreconditionError("profile needs t >= 1");
}

std::string_view to_string(Component c) {
    switch (c) {
    case Component::gm:
        return "gm";
    case Component::sm:
        return "sm";
    case Component::cmp:
        return "cmp";
    }
    return "gm";
}

double ComponentTimes::max() const { return std::max({gm, sm, cmp}); }

ComponentTimes component_times(const HardwareSpec& hw, const KernelProfile& p) {
    check_profile(p);
    ComponentTimes t;
    t.gm = p.a_gm * p.d_gm_at(p.t) * hw.cell_bytes / hw.gm_bandwidth;
    t.sm = p.a_sm * p.d_sm * p.t * hw.cell_bytes / hw.sm_bandwidth;
    t.cmp = p.a_cmp * p.d_cmp * p.t / hw.compute_throughput;
    return t;
}

Component bottleneck(const ComponentTimes& t) {
    if (t.gm >= t.sm && t.gm >= t.cmp)
        return Component::gm;
    return t.sm >= t.cmp ? Component::sm : Component::cmp;
}

double attainable_perf(const HardwareSpec& hw, const KernelProfile& p) {
    const double m = component_times(hw, p).max();
    if (!(m > 0))
        throw PreconditionError("profile has no cost in any component");
    return p.d_all * p.t / m;
}

double valid_proportion_sm(const KernelProfile& p, bool two_sided) {
    const int k = two_sided ? 2 : 1;
    double v = 1.0;
    for (int x : p.tile) {
        const int core = x - k * p.t * p.rad;
        if (core <= 0)
            throw PreconditionError("tile " + std::to_string(x) + " has no valid core at depth " + std::to_string(p.t));
        v *= static_cast<double>(core) / x;
    }
    return v;
}

double valid_proportion_device(double t_stencil, double t_sync, int n) {
    if (!(t_stencil > 0))
        throw PreconditionError("stencil time must be positive");
    if (n < 1)
        throw PreconditionError("device sync count must be at least 1");
    if (t_sync < 0)
        throw PreconditionError("sync latency must be non-negative");
    return t_stencil / (t_stencil + t_sync * n);
}

DepthThreshold min_depth_to_shift(const HardwareSpec& hw, const KernelProfile& p) {
    const double g0 = p.a_gm * p.d_gm * hw.cell_bytes / hw.gm_bandwidth;
    const double g1 = p.a_gm * p.gm_halo_per_depth * hw.cell_bytes / hw.gm_bandwidth;
    const double per_depth[] = {p.a_sm * p.d_sm * hw.cell_bytes / hw.sm_bandwidth,
                                p.a_cmp * p.d_cmp / hw.compute_throughput};
    DepthThreshold out;
    for (double slope : per_depth) {
        const double coef = slope - g1;
        if (!(coef > 0))
            continue;
        const double t = g0 / coef;
        if (!out.attainable || t < out.t_real)
            out.t_real = t;
        out.attainable = true;
    }
    if (out.attainable)
        out.t_int = std::max(1, static_cast<int>(std::ceil(out.t_real)));
    return out;
}

TileWidth min_tile_width_3d(const HardwareSpec& hw, const KernelProfile& p) {
    if (!(p.a_sm > 0))
        throw PreconditionError("tile width bound needs a_sm > 0");
    TileWidth w;
    w.bound = 4.0 * p.a_gm * hw.sm_bandwidth / (p.a_sm * hw.gm_bandwidth) * p.rad;
    w.chosen = std::max(32, static_cast<int>(std::ceil(w.bound / 32.0)) * 32);
    return w;
}

LittlesLaw littles_check(const HardwareSpec& hw, const std::string& op, int n_threads, int ilp) {
    const auto l = hw.op_latencies.find(op);
    const auto thr = hw.op_throughputs.find(op);
    if (l == hw.op_latencies.end() || thr == hw.op_throughputs.end())
        throw ConfigError("hardware spec has no latency/throughput for op '" + op + "'");
    LittlesLaw out;
    out.concurrency = l->second * thr->second;
    out.parallelism = static_cast<double>(n_threads) * ilp;
    out.saturates = out.parallelism > 0 && out.parallelism >= out.concurrency;
    return out;
}

OnchipBudget onchip_bytes_required(const HardwareSpec& hw, const StencilShape& st, const TilingParams& params) {
    OnchipBudget b;
    b.capacity = static_cast<std::uint64_t>(hw.onchip_capacity);
    if (params.t < 1) {
        b.fits = true;
        return b;
    }
    b.planes = plan_queue(params.t, st.radius, params.variant, params.lazy).range;
    b.plane_cells = 1;
    const int ring = params.scheme == Scheme::device_tiling ? 2 * st.radius : 0;
    for (int x : params.tile)
        b.plane_cells *= static_cast<std::uint64_t>(x + ring);
    b.bytes = static_cast<std::uint64_t>(b.planes) * b.plane_cells * static_cast<std::uint64_t>(hw.cell_bytes);
    b.fits = b.bytes <= b.capacity;
    return b;
}

Practical practical_perf(const HardwareSpec& hw, const KernelProfile& p, Scheme scheme, bool two_sided) {
    Practical out;
    out.times = component_times(hw, p);
    out.bottleneck = bottleneck(out.times);
    out.P = attainable_perf(hw, p);
    out.V = scheme == Scheme::sm_tiling ? valid_proportion_sm(p, two_sided)
                                        : valid_proportion_device(out.times.max(), hw.device_sync_latency, p.n_syncs);
    out.PP = out.P * out.V;
    return out;
}

KernelProfile sm_profile(const StencilShape& st, const std::vector<int>& tile, int t, bool rst) {
    KernelProfile p;
    const double cells = product(tile);
    p.a_gm = st.gm_accesses_per_cell;
    p.a_sm = rst ? st.sm_accesses_with_rst : st.sm_accesses_no_rst;
    p.a_cmp = st.flops_per_cell;
    p.d_gm = p.d_sm = p.d_cmp = p.d_all = cells;
    p.t = t;
    p.rad = st.radius;
    p.tile = tile;
    return p;
}

KernelProfile device_profile(const StencilShape& st, const std::vector<int>& tile, const std::vector<int>& grid,
                             int t, bool rst, int n_syncs) {
    if (grid.size() != tile.size())
        throw PreconditionError("device tile grid and tile must list the same dimensions");
    KernelProfile p = sm_profile(st, tile, t, rst);
    const double blocks = product(grid);
    double ring = 0;
    for (std::size_t i = 0; i < tile.size(); ++i) {
        double side = 2.0 * st.radius;
        for (std::size_t j = 0; j < tile.size(); ++j)
            if (j != i)
                side *= tile[j];
        ring += side;
    }
    p.d_gm *= blocks;
    p.d_sm *= blocks;
    p.d_cmp *= blocks;
    p.d_all *= blocks;
    p.gm_halo_per_depth = ring * blocks;
    p.n_syncs = n_syncs;
    return p;
}

Plan choose_scheme(const HardwareSpec& hw, const StencilShape& st, const std::vector<int>& domain,
                   const PlanOptions& opts) {
    check_hardware(hw);
    if (domain.size() != static_cast<std::size_t>(st.dims))
        throw PreconditionError("domain has " + std::to_string(domain.size()) + " extents, stencil '" + st.name +
                                "' needs " + std::to_string(st.dims));
    for (int x : domain)
        if (x <= 2 * st.radius)
            throw PreconditionError("domain extent " + std::to_string(x) + " is too small for radius " +
                                    std::to_string(st.radius));
    Plan sm = plan_sm(hw, st, opts);
    Plan dev = plan_device(hw, st, domain, opts);
    if (!sm.feasible && !dev.feasible)
        throw PreconditionError("no feasible configuration for '" + st.name + "'");
    const bool pick_device = dev.feasible && (!sm.feasible || dev.predicted_PP > sm.predicted_PP * (1 + 1e-9));
    Plan chosen = pick_device ? dev : sm;
    chosen.candidates = {sm, dev};
    return chosen;
}

TilingParams plan_params(const Plan& plan) {
    TilingParams p;
    p.scheme = plan.scheme;
    p.t = plan.t;
    p.tile = plan.tile;
    p.device_tile_grid = plan.device_tile_grid;
    p.lazy = plan.lazy;
    p.rst = true;
    p.variant = plan.variant;
    return p;
}

} // namespace tblock
