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

#include "tblock/tiling.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tblock/error.hpp"
#include "tblock/parallel.hpp"

namespace tblock {

namespace {

struct Interval {
    int lo = 0;
    int hi = 0;
    int size() const { return hi > lo ? hi - lo : 0; }
};

Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

// Box over the tiled dimensions; d[i] spans grid dimension i + 1.
struct Box {
    int n = 0;
    std::array<Interval, 2> d{};

    std::uint64_t cells() const {
        std::uint64_t c = 1;
        for (int i = 0; i < n; ++i)
            c *= static_cast<std::uint64_t>(d[i].size());
        return c;
    }
    bool empty() const { return n > 0 && cells() == 0; }
};

Box intersect(const Box& a, const Box& b) {
    Box out{a.n, {}};
    for (int i = 0; i < a.n; ++i)
        out.d[i] = intersect(a.d[i], b.d[i]);
    return out;
}

Box grow(const Box& a, int by) {
    Box out = a;
    for (int i = 0; i < a.n; ++i)
        out.d[i] = {a.d[i].lo - by, a.d[i].hi + by};
    return out;
}

// Lanes [region, region + lanes) of one tile and the core it stores.
struct Slot {
    int region = 0;
    Interval core;
};

// Fixed-width cores covering [r, n - r); the last one is shifted back so
// every tile keeps its full width.
std::vector<Slot> fixed_cores(int n, int r, int lanes, int halo) {
    const int core = lanes - 2 * halo;
    std::vector<Slot> out;
    for (int lo = r;; lo += core) {
        const int c = std::min(lo, n - r - core);
        out.push_back({c - halo, {c, c + core}});
        if (c + core >= n - r)
            break;
    }
    return out;
}

std::vector<std::array<std::size_t, 2>> cartesian(int n, const std::array<std::size_t, 2>& counts) {
    std::vector<std::array<std::size_t, 2>> out;
    const std::size_t c0 = n > 0 ? counts[0] : 1;
    const std::size_t c1 = n > 1 ? counts[1] : 1;
    for (std::size_t a = 0; a < c0; ++a)
        for (std::size_t b = 0; b < c1; ++b)
            out.push_back({a, b});
    return out;
}

template <class Fn>
void for_box(const Box& box, Fn&& fn) {
    std::size_t idx = 0;
    if (box.n == 0) {
        fn(idx, 0, 0);
    } else if (box.n == 1) {
        for (int a = box.d[0].lo; a < box.d[0].hi; ++a)
            fn(idx++, a, 0);
    } else {
        for (int a = box.d[0].lo; a < box.d[0].hi; ++a)
            for (int b = box.d[1].lo; b < box.d[1].hi; ++b)
                fn(idx++, a, b);
    }
}

Coord to_coord(int n, int p, int a, int b) {
    Coord c{p, 0, 0};
    if (n > 0)
        c[1] = a;
    if (n > 1)
        c[2] = b;
    return c;
}

struct Domain {
    int n = 0; // tiled dimensions
    int r = 0;
    std::array<int, 3> extent{1, 1, 1};
    bool keep_frame = true;

    Box full() const {
        Box b{n, {}};
        for (int i = 0; i < n; ++i)
            b.d[i] = {0, extent[i + 1]};
        return b;
    }
    bool frame(int a, int b) const {
        if (n > 0 && (a < r || a >= extent[1] - r))
            return true;
        return n > 1 && (b < r || b >= extent[2] - r);
    }
};

using Plane = std::vector<double>;

// Streams `box` of `src` (whose tiled coordinates start at `origin`) through
// `steps` queue levels and hands every produced plane to `sink(p, plane)`.
// Cells whose taps leave the box receive a stale copy of their centre; the
// caller only keeps cells far enough from the box edges.
template <class Sink>
std::uint64_t stream_box(const Grid& src, std::array<int, 2> origin, const Domain& dom,
                         const StencilShape& st, const Box& box, int steps,
                         const TilingParams& params, Sink&& sink) {
    const int r = dom.r;
    const std::size_t plane_cells = static_cast<std::size_t>(box.cells());
    std::array<std::ptrdiff_t, 2> ps{1, 1};
    if (box.n == 2)
        ps[0] = box.d[1].size();

    std::vector<int> slot;
    std::vector<std::ptrdiff_t> off;
    std::vector<double> coef;
    for (const Tap& t : st.taps) {
        slot.push_back(r + t.offset[0]);
        std::ptrdiff_t o = 0;
        for (int i = 0; i < box.n; ++i)
            o += t.offset[i + 1] * ps[i];
        off.push_back(o);
        coef.push_back(t.coefficient);
    }

    const auto load = [&](int p) {
        Plane out(plane_cells);
        const auto cells = src.cells();
        for_box(box, [&](std::size_t i, int a, int b) {
            out[i] = cells[src.index(to_coord(box.n, p, a - origin[0], b - origin[1]))];
        });
        return out;
    };
    const auto frame = [&](int, int p) { return dom.keep_frame ? load(p) : Plane(plane_cells, 0.0); };

    const QueueGeometry geo = plan_queue(steps, r, params.variant, params.lazy);
    CircularMultiQueue<Plane> mq(geo, Plane(plane_cells));
    std::vector<const double*> win(static_cast<std::size_t>(geo.window));

    const auto inner = [&](int a, int b) {
        if (box.n > 0 && (a - r < box.d[0].lo || a + r >= box.d[0].hi))
            return false;
        return !(box.n > 1 && (b - r < box.d[1].lo || b + r >= box.d[1].hi));
    };
    const auto step = [&](int s, int) {
        for (int k = 0; k < geo.window; ++k)
            win[static_cast<std::size_t>(k)] = mq.at(s, k).data();
        const double* centre = win[static_cast<std::size_t>(r)];
        Plane out(plane_cells);
        for_box(box, [&](std::size_t i, int a, int b) {
            if (dom.frame(a, b)) {
                out[i] = dom.keep_frame ? centre[i] : 0.0;
                return;
            }
            if (!inner(a, b)) {
                out[i] = centre[i];
                return;
            }
            double acc = 0.0;
            for (std::size_t q = 0; q < coef.size(); ++q)
                acc += coef[q] * win[static_cast<std::size_t>(slot[q])][static_cast<std::ptrdiff_t>(i) + off[q]];
            out[i] = acc;
        });
        return out;
    };
    drive_pipeline(mq, dom.extent[0], load, frame, step, sink);
    return mq.syncs();
}

// Copies the cells of `part` out of a plane laid out over `box`.
void gather(const Box& box, const Box& part, const Plane& plane, std::vector<double>& dst) {
    std::array<std::ptrdiff_t, 2> ps{1, 1};
    if (box.n == 2)
        ps[0] = box.d[1].size();
    for_box(part, [&](std::size_t, int a, int b) {
        std::ptrdiff_t i = 0;
        if (box.n > 0)
            i += (a - box.d[0].lo) * ps[0];
        if (box.n > 1)
            i += (b - box.d[1].lo) * ps[1];
        dst.push_back(plane[static_cast<std::size_t>(i)]);
    });
}

void scatter(Grid& g, std::array<int, 2> origin, const Box& part, int p, const double*& src) {
    auto cells = g.cells();
    for_box(part, [&](std::size_t, int a, int b) {
        cells[g.index(to_coord(part.n, p, a - origin[0], b - origin[1]))] = *src++;
    });
}

Grid prepare_output(const Grid& grid, int radius, int t) {
    Grid out = grid;
    if (grid.boundary() == Boundary::skip_update && t >= 1) {
        auto cells = out.cells();
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (grid.on_frame(grid.coord(i), radius))
                cells[i] = 0.0;
    }
    return out;
}

Domain make_domain(const Grid& grid, const StencilShape& st) {
    Domain d;
    d.n = grid.dims() - 1;
    d.r = st.radius;
    for (int i = 0; i < grid.dims(); ++i)
        d.extent[i] = grid.extent(i);
    d.keep_frame = grid.boundary() == Boundary::fixed_value;
    return d;
}

// On-chip traffic of `lanes` lane updates by blocks shaped `tile`.
void charge_onchip(ExecutionTrace& tr, const StencilShape& st, const TilingParams& p,
                   const std::vector<int>& tile, std::uint64_t lanes, std::uint64_t planes) {
    if (!p.rst) {
        tr.onchip_shared += (st.taps.size() + 1) * lanes;
        return;
    }
    const RstCost rc = rst_cost(st);
    tr.onchip_shared += static_cast<std::uint64_t>(rc.shared_taps + 2) * lanes;
    tr.onchip_register += static_cast<std::uint64_t>(rc.register_taps) * lanes;
    if (rc.strip_radius > 0 && tile.size() == 2) {
        const std::uint64_t strips = static_cast<std::uint64_t>(tile[1]) *
                                     static_cast<std::uint64_t>((tile[0] + kRstIlp - 1) / kRstIlp);
        tr.onchip_shared += strips * 2 * static_cast<std::uint64_t>(rc.strip_radius) * planes;
    }
}

// 32-byte sectors needed to move the ring box \ own, per plane.
std::uint64_t ring_transactions(const Box& own, const Box& box, bool transpose) {
    const std::uint64_t ring = box.cells() - own.cells();
    if (ring == 0)
        return 0;
    if (transpose)
        return (ring + 3) / 4;
    if (box.n == 1)
        return static_cast<std::uint64_t>(own.d[0].lo > box.d[0].lo) +
               static_cast<std::uint64_t>(own.d[0].hi < box.d[0].hi);
    const std::uint64_t rows = static_cast<std::uint64_t>(box.d[0].size() - own.d[0].size());
    const std::uint64_t row_sectors = (static_cast<std::uint64_t>(box.d[1].size()) + 3) / 4;
    const std::uint64_t sides = static_cast<std::uint64_t>(own.d[1].lo > box.d[1].lo) +
                                static_cast<std::uint64_t>(own.d[1].hi < box.d[1].hi);
    return rows * row_sectors + sides * static_cast<std::uint64_t>(own.d[0].size());
}

void add_phase(ExecutionTrace& tr, std::string tag, std::uint64_t cells) {
    tr.wall_phases.push_back({std::move(tag), cells});
}

void merge(ExecutionTrace& into, const ExecutionTrace& from) {
    into.gm_loads += from.gm_loads;
    into.gm_stores += from.gm_stores;
    into.gm_halo_loads += from.gm_halo_loads;
    into.gm_halo_stores += from.gm_halo_stores;
    into.halo_transactions += from.halo_transactions;
    into.onchip_register += from.onchip_register;
    into.onchip_shared += from.onchip_shared;
    into.syncs_block += from.syncs_block;
    into.syncs_device += from.syncs_device;
    into.cells_computed += from.cells_computed;
    into.cells_valid += from.cells_valid;
    into.blocks += from.blocks;
    into.device_tiles += from.device_tiles;
    into.wall_phases.insert(into.wall_phases.end(), from.wall_phases.begin(), from.wall_phases.end());
}

std::uint64_t product(const std::vector<int>& v) {
    std::uint64_t c = 1;
    for (int x : v)
        c *= static_cast<std::uint64_t>(x);
    return c;
}

void load_phases(ExecutionTrace& tr, const TilingParams& p, std::uint64_t loaded, std::uint64_t halo) {
    if (p.prefetch) {
        add_phase(tr, "prefetch", loaded + halo);
        return;
    }
    add_phase(tr, "load", loaded);
    if (halo > 0)
        add_phase(tr, "load_halo", halo);
}

struct BlockWork {
    ExecutionTrace trace;
    std::vector<double> values;
};

} // namespace

std::string_view to_string(Scheme s) {
    return s == Scheme::sm_tiling ? "sm-tiling" : "device-tiling";
}

Scheme scheme_from_string(std::string_view s) {
    if (s == "sm-tiling" || s == "sm_tiling")
        return Scheme::sm_tiling;
    if (s == "device-tiling" || s == "device_tiling")
        return Scheme::device_tiling;
    throw ConfigError("unknown scheme '" + std::string(s) + "' (expected sm-tiling or device-tiling)");
}

void check_params(const Grid& grid, const StencilShape& st, const TilingParams& p) {
    if (grid.dims() != st.dims)
        throw PreconditionError("grid has " + std::to_string(grid.dims()) + " dimensions, stencil '" +
                                st.name + "' has " + std::to_string(st.dims));
    if (st.radius < 1)
        throw PreconditionError("stencil radius must be at least 1");
    for (int d = 0; d < grid.dims(); ++d)
        if (grid.extent(d) <= 2 * st.radius)
            throw PreconditionError("extent " + std::to_string(grid.extent(d)) + " in dimension " +
                                    std::to_string(d) + " is too small for radius " +
                                    std::to_string(st.radius));
    if (p.t < 0)
        throw PreconditionError("temporal depth must be non-negative");
    if (p.workers < 1)
        throw PreconditionError("worker count must be positive");
    const std::size_t n = static_cast<std::size_t>(grid.dims() - 1);
    if (p.tile.size() != n)
        throw PreconditionError("expected " + std::to_string(n) + " tile extents, got " +
                                std::to_string(p.tile.size()));
    const int halo = st.radius * p.t;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.tile[i] < 1)
            throw PreconditionError("tile extents must be positive");
        const int interior = grid.extent(static_cast<int>(i) + 1) - 2 * st.radius;
        if (p.scheme == Scheme::sm_tiling) {
            const int core = p.tile[i] - 2 * halo;
            if (core < 1)
                throw PreconditionError("tile " + std::to_string(p.tile[i]) + " leaves no valid core at depth " +
                                        std::to_string(p.t) + " and radius " + std::to_string(st.radius));
            if (core > interior)
                throw PreconditionError("tile core " + std::to_string(core) + " exceeds the interior extent " +
                                        std::to_string(interior) + " of dimension " + std::to_string(i + 1));
        }
    }
    if (p.scheme == Scheme::device_tiling) {
        if (p.device_tile_grid.size() != n)
            throw PreconditionError("expected " + std::to_string(n) + " device tile grid entries, got " +
                                    std::to_string(p.device_tile_grid.size()));
        for (std::size_t i = 0; i < n; ++i) {
            if (p.device_tile_grid[i] < 1)
                throw PreconditionError("device tile grid entries must be positive");
            const int lanes = p.device_tile_grid[i] * p.tile[i];
            const int extent = grid.extent(static_cast<int>(i) + 1);
            if (lanes < extent && lanes - 2 * halo < 1)
                throw PreconditionError("device tile of " + std::to_string(lanes) + " lanes leaves no core at depth " +
                                        std::to_string(p.t) + " in dimension " + std::to_string(i + 1));
        }
    }
}

RunResult run_sm_tiling(const Grid& grid, const StencilShape& st, const TilingParams& p) {
    if (p.scheme != Scheme::sm_tiling)
        throw PreconditionError("run_sm_tiling needs scheme sm-tiling");
    check_params(grid, st, p);
    RunResult res{prepare_output(grid, st.radius, p.t), {}};
    if (p.t == 0)
        return res;

    const Domain dom = make_domain(grid, st);
    const int r = dom.r;
    const int halo = r * p.t;
    const std::uint64_t stream_interior = static_cast<std::uint64_t>(dom.extent[0] - 2 * r);

    std::array<std::vector<Slot>, 2> slots;
    std::array<std::size_t, 2> counts{1, 1};
    for (int i = 0; i < dom.n; ++i) {
        slots[i] = fixed_cores(dom.extent[i + 1], r, p.tile[i], halo);
        counts[i] = slots[i].size();
    }
    const auto blocks = cartesian(dom.n, counts);
    const Box full = dom.full();
    const std::uint64_t lanes = product(p.tile);

    std::vector<BlockWork> work(blocks.size());
    std::vector<Box> cores(blocks.size());
    parallel_for(blocks.size(), p.workers, [&](std::size_t bi) {
        Box region{dom.n, {}}, core{dom.n, {}};
        for (int i = 0; i < dom.n; ++i) {
            const Slot& s = slots[i][blocks[bi][static_cast<std::size_t>(i)]];
            region.d[i] = {s.region, s.region + p.tile[i]};
            core.d[i] = s.core;
        }
        const Box box = intersect(region, full);
        cores[bi] = core;
        BlockWork& w = work[bi];
        w.values.reserve(core.cells() * stream_interior);
        ExecutionTrace& tr = w.trace;
        tr.syncs_block = stream_box(grid, {0, 0}, dom, st, box, p.t, p, [&](int q, const Plane& plane) {
            if (q >= r && q < dom.extent[0] - r)
                gather(box, core, plane, w.values);
        });
        const std::uint64_t planes = static_cast<std::uint64_t>(dom.extent[0]);
        const std::uint64_t updates = lanes * stream_interior * static_cast<std::uint64_t>(p.t);
        tr.blocks = 1;
        tr.gm_loads = box.cells() * planes;
        tr.gm_stores = core.cells() * stream_interior;
        tr.cells_computed = updates;
        tr.cells_valid = core.cells() * stream_interior * static_cast<std::uint64_t>(p.t);
        charge_onchip(tr, st, p, p.tile, updates, stream_interior * static_cast<std::uint64_t>(p.t));
        load_phases(tr, p, core.cells() * planes, (box.cells() - core.cells()) * planes);
        add_phase(tr, "compute", updates);
        add_phase(tr, "store", tr.gm_stores);
    });

    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const double* src = work[bi].values.data();
        for (int q = r; q < dom.extent[0] - r; ++q)
            scatter(res.output, {0, 0}, cores[bi], q, src);
        merge(res.trace, work[bi].trace);
    }
    res.trace.device_tiles = 0;
    return res;
}

RunResult run_device_tiling(const Grid& grid, const StencilShape& st, const TilingParams& p) {
    if (p.scheme != Scheme::device_tiling)
        throw PreconditionError("run_device_tiling needs scheme device-tiling");
    check_params(grid, st, p);
    RunResult res{prepare_output(grid, st.radius, p.t), {}};
    if (p.t == 0)
        return res;

    const Domain dom = make_domain(grid, st);
    const int r = dom.r;
    const int halo = r * p.t;
    const int n0 = dom.extent[0];
    const std::uint64_t planes = static_cast<std::uint64_t>(n0);
    const std::uint64_t stream_interior = static_cast<std::uint64_t>(n0 - 2 * r);
    const std::uint64_t t = static_cast<std::uint64_t>(p.t);

    std::array<std::vector<Slot>, 2> slots;
    std::array<std::size_t, 2> counts{1, 1};
    std::array<std::size_t, 2> grid_counts{1, 1};
    std::vector<int> region_lanes(static_cast<std::size_t>(dom.n));
    for (int i = 0; i < dom.n; ++i) {
        const int lanes = p.device_tile_grid[i] * p.tile[i];
        const int extent = dom.extent[i + 1];
        region_lanes[i] = lanes;
        slots[i] = lanes >= extent ? std::vector<Slot>{{0, {r, extent - r}}} : fixed_cores(extent, r, lanes, halo);
        counts[i] = slots[i].size();
        grid_counts[i] = static_cast<std::size_t>(p.device_tile_grid[i]);
    }
    const auto tiles = cartesian(dom.n, counts);
    const auto blocks = cartesian(dom.n, grid_counts);
    const Box full = dom.full();

    std::vector<int> lazy_tile(p.tile);
    for (int& x : lazy_tile)
        x += 2 * halo;
    const std::uint64_t block_lanes = product(p.lazy ? lazy_tile : p.tile);

    for (const auto& ti : tiles) {
        Box region{dom.n, {}}, core{dom.n, {}};
        for (int i = 0; i < dom.n; ++i) {
            const Slot& s = slots[i][ti[static_cast<std::size_t>(i)]];
            region.d[i] = {s.region, s.region + region_lanes[i]};
            core.d[i] = s.core;
        }
        const Box sim = intersect(region, full);
        std::vector<Box> own(blocks.size());
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            Box lanes{dom.n, {}};
            for (int i = 0; i < dom.n; ++i) {
                const int lo = region.d[i].lo + static_cast<int>(blocks[bi][static_cast<std::size_t>(i)]) * p.tile[i];
                lanes.d[i] = {lo, lo + p.tile[i]};
            }
            own[bi] = intersect(lanes, sim);
        }

        ExecutionTrace tile_tr;
        tile_tr.device_tiles = 1;
        tile_tr.blocks = blocks.size();
        std::vector<BlockWork> work(blocks.size());

        if (p.lazy) {
            parallel_for(blocks.size(), p.workers, [&](std::size_t bi) {
                ExecutionTrace& tr = work[bi].trace;
                const std::uint64_t updates = block_lanes * stream_interior * t;
                tr.cells_computed = updates;
                charge_onchip(tr, st, p, lazy_tile, updates, stream_interior * t);
                if (own[bi].empty())
                    return;
                const Box box = intersect(grow(own[bi], halo), sim);
                const Box keep = intersect(own[bi], core);
                auto& vals = work[bi].values;
                tr.syncs_block = stream_box(grid, {0, 0}, dom, st, box, p.t, p, [&](int q, const Plane& plane) {
                    if (q >= r && q < n0 - r && !keep.empty())
                        gather(box, keep, plane, vals);
                });
                tr.gm_loads = own[bi].cells() * planes;
                tr.gm_halo_loads = (box.cells() - own[bi].cells()) * planes;
                tr.halo_transactions = ring_transactions(own[bi], box, p.transpose_halo) * planes;
                tr.gm_stores = keep.cells() * stream_interior;
                load_phases(tr, p, tr.gm_loads, tr.gm_halo_loads);
                add_phase(tr, "compute", updates);
                add_phase(tr, "store", tr.gm_stores);
            });
            for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
                const Box keep = intersect(own[bi], core);
                if (!own[bi].empty() && !keep.empty()) {
                    const double* src = work[bi].values.data();
                    for (int q = r; q < n0 - r; ++q)
                        scatter(res.output, {0, 0}, keep, q, src);
                }
                merge(tile_tr, work[bi].trace);
            }
            tile_tr.syncs_device = 1;
            add_phase(tile_tr, "device_sync", 0);
        } else {
            std::vector<int> sim_ext{n0};
            for (int i = 0; i < dom.n; ++i)
                sim_ext.push_back(sim.d[i].size());
            Grid stage_in(sim_ext, grid.boundary());
            Grid stage_out(sim_ext, grid.boundary());
            const std::array<int, 2> origin{dom.n > 0 ? sim.d[0].lo : 0, dom.n > 1 ? sim.d[1].lo : 0};
            {
                auto cells = stage_in.cells();
                const auto src = grid.cells();
                for (int q = 0; q < n0; ++q)
                    for_box(sim, [&](std::size_t, int a, int b) {
                        cells[stage_in.index(to_coord(dom.n, q, a - origin[0], b - origin[1]))] =
                            src[grid.index(to_coord(dom.n, q, a, b))];
                    });
            }
            const std::uint64_t updates = block_lanes * stream_interior;
            for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
                if (own[bi].empty())
                    continue;
                const Box ring = intersect(grow(own[bi], r), sim);
                tile_tr.gm_loads += own[bi].cells() * planes;
                tile_tr.gm_halo_loads += (ring.cells() - own[bi].cells()) * planes;
            }
            load_phases(tile_tr, p, tile_tr.gm_loads, tile_tr.gm_halo_loads);

            for (int s = 0; s < p.t; ++s) {
                for (auto& w : work)
                    w.trace = ExecutionTrace{};
                parallel_for(blocks.size(), p.workers, [&](std::size_t bi) {
                    ExecutionTrace& tr = work[bi].trace;
                    tr.cells_computed = updates;
                    charge_onchip(tr, st, p, p.tile, updates, stream_interior);
                    tr.syncs_block = 2;
                    if (own[bi].empty())
                        return;
                    const Box box = intersect(grow(own[bi], r), sim);
                    const Box mine = own[bi];
                    std::vector<double> vals;
                    vals.reserve(mine.cells() * planes);
                    tr.syncs_block += stream_box(stage_in, origin, dom, st, box, 1, p,
                                                 [&](int, const Plane& plane) { gather(box, mine, plane, vals); });
                    // Blocks own disjoint lanes of the staging buffer.
                    const double* src = vals.data();
                    for (int q = 0; q < n0; ++q)
                        scatter(stage_out, origin, mine, q, src);
                    const std::uint64_t ring = (box.cells() - mine.cells()) * planes;
                    tr.gm_halo_stores = ring;
                    tr.halo_transactions = 2 * ring_transactions(mine, box, p.transpose_halo) * planes;
                    if (s + 1 < p.t)
                        tr.gm_halo_loads = ring;
                });
                std::uint64_t pushed = 0, pulled = 0;
                for (auto& w : work) {
                    pushed += w.trace.gm_halo_stores;
                    pulled += w.trace.gm_halo_loads;
                    w.trace.wall_phases.clear();
                    merge(tile_tr, w.trace);
                }
                tile_tr.syncs_device += 1;
                add_phase(tile_tr, "compute", updates * blocks.size());
                add_phase(tile_tr, "block_sync", 0);
                add_phase(tile_tr, "push_halo", pushed);
                add_phase(tile_tr, "device_sync", 0);
                add_phase(tile_tr, "swap", 0);
                add_phase(tile_tr, "pull_halo", pulled);
                add_phase(tile_tr, "block_sync", 0);
                std::swap(stage_in, stage_out);
            }
            const auto cells = stage_in.cells();
            auto out = res.output.cells();
            for (int q = r; q < n0 - r; ++q)
                for_box(core, [&](std::size_t, int a, int b) {
                    out[res.output.index(to_coord(dom.n, q, a, b))] =
                        cells[stage_in.index(to_coord(dom.n, q, a - origin[0], b - origin[1]))];
                });
            tile_tr.gm_stores = core.cells() * stream_interior;
            add_phase(tile_tr, "store", tile_tr.gm_stores);
        }
        tile_tr.cells_valid = core.cells() * stream_interior * t;
        tile_tr.blocks = blocks.size();
        tile_tr.device_tiles = 1;
        merge(res.trace, tile_tr);
    }
    return res;
}

RunResult run_tiling(const Grid& grid, const StencilShape& st, const TilingParams& p) {
    return p.scheme == Scheme::sm_tiling ? run_sm_tiling(grid, st, p) : run_device_tiling(grid, st, p);
}

AccountingReport trace_summary(const ExecutionTrace& tr) {
    if (tr.cells_computed == 0 || tr.cells_valid == 0)
        throw PreconditionError("trace holds no updates");
    AccountingReport rep;
    const double valid = static_cast<double>(tr.cells_valid);
    const double computed = static_cast<double>(tr.cells_computed);
    rep.a_gm = static_cast<double>(tr.gm_loads + tr.gm_stores + tr.gm_halo_loads + tr.gm_halo_stores) / valid;
    rep.a_sm = static_cast<double>(tr.onchip_shared) / computed;
    rep.a_reg = static_cast<double>(tr.onchip_register) / computed;
    rep.valid_proportion = valid / computed;
    rep.syncs_block = tr.syncs_block;
    rep.syncs_device = tr.syncs_device;
    return rep;
}

std::string trace_to_json(const ExecutionTrace& tr) {
    nlohmann::ordered_json j;
    j["gm_loads"] = tr.gm_loads;
    j["gm_stores"] = tr.gm_stores;
    j["gm_halo_loads"] = tr.gm_halo_loads;
    j["gm_halo_stores"] = tr.gm_halo_stores;
    j["halo_transactions"] = tr.halo_transactions;
    j["onchip_accesses"] = {{"register", tr.onchip_register}, {"shared", tr.onchip_shared}};
    j["syncs"] = {{"block", tr.syncs_block}, {"device", tr.syncs_device}};
    j["cells_computed"] = tr.cells_computed;
    j["cells_valid"] = tr.cells_valid;
    j["blocks"] = tr.blocks;
    j["device_tiles"] = tr.device_tiles;
    auto phases = nlohmann::ordered_json::array();
    for (const Phase& ph : tr.wall_phases)
        phases.push_back({{"tag", ph.tag}, {"cells", ph.cells}});
    j["wall_phases"] = phases;
    return j.dump(2);
}

std::string phases_to_csv(const ExecutionTrace& tr) {
    std::ostringstream os;
    os << "phase,cells\n";
    for (const Phase& ph : tr.wall_phases)
        os << ph.tag << ',' << ph.cells << '\n';
    return os.str();
}

} // namespace tblock
