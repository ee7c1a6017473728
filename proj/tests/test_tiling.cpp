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

#include <doctest.h>

#include <sstream>

#include "tblock/error.hpp"
#include "tblock/reference.hpp"
#include "tblock/tiling.hpp"

using namespace tblock;

namespace {

Grid random_grid(std::initializer_list<int> ext, std::uint64_t seed, Boundary b = Boundary::fixed_value) {
    Grid g(ext, b);
    fill_random(g, seed);
    return g;
}

TilingParams sm(int t, std::vector<int> tile) {
    TilingParams p;
    p.scheme = Scheme::sm_tiling;
    p.t = t;
    p.tile = std::move(tile);
    return p;
}

TilingParams device(int t, std::vector<int> tile, std::vector<int> grid, bool lazy) {
    TilingParams p;
    p.scheme = Scheme::device_tiling;
    p.t = t;
    p.tile = std::move(tile);
    p.device_tile_grid = std::move(grid);
    p.lazy = lazy;
    return p;
}

void check_oracle(const Grid& in, const StencilShape& st, const TilingParams& p) {
    const RunResult res = run_tiling(in, st, p);
    const Grid want = reference_run(in, st, p.t);
    CHECK(first_difference(res.output, want) == -1);
}

} // namespace

TEST_CASE("sm tiling matches the oracle on a 1024^2 five-point run") {
    const Grid in = random_grid({1024, 1024}, 11);
    const StencilShape st = make_benchmark("j2d5pt");
    const RunResult res = run_sm_tiling(in, st, sm(7, {256}));
    CHECK(first_difference(res.output, reference_run(in, st, 7)) == -1);
    const double v = static_cast<double>(res.trace.cells_valid) / static_cast<double>(res.trace.cells_computed);
    CHECK(v == doctest::Approx((256.0 - 14.0) / 256.0).epsilon(1e-12));
}

TEST_CASE("sm tiling valid proportion for a 34x34 tile at depth 3") {
    const Grid in = random_grid({12, 60, 60}, 3);
    const RunResult res = run_sm_tiling(in, make_benchmark("j3d7pt"), sm(3, {34, 34}));
    const double v = static_cast<double>(res.trace.cells_valid) / static_cast<double>(res.trace.cells_computed);
    CHECK(std::abs(v - 784.0 / 1156.0) < 1e-12);
}

TEST_CASE("every catalog stencil matches the oracle under both schemes") {
    for (auto name : catalog_names()) {
        const StencilShape st = make_benchmark(name);
        const int r = st.radius;
        CAPTURE(name);
        for (Boundary b : {Boundary::fixed_value, Boundary::skip_update}) {
            if (st.dims == 1) {
                const Grid in = random_grid({97}, 5, b);
                check_oracle(in, st, sm(3, {}));
                check_oracle(in, st, device(3, {}, {}, false));
                check_oracle(in, st, device(3, {}, {}, true));
            } else if (st.dims == 2) {
                const Grid in = random_grid({23, 41}, 7, b);
                check_oracle(in, st, sm(2, {4 * r + 5}));
                check_oracle(in, st, device(2, {8}, {2}, false));
                check_oracle(in, st, device(2, {8}, {2}, true));
            } else {
                const Grid in = random_grid({11, 19, 23}, 9, b);
                check_oracle(in, st, sm(2, {4 * r + 3, 4 * r + 4}));
                check_oracle(in, st, device(2, {8, 8}, {2, 2}, false));
                check_oracle(in, st, device(2, {8, 8}, {2, 2}, true));
            }
        }
    }
}

TEST_CASE("non-lazy device tiling fires one barrier per step") {
    const Grid in = random_grid({40, 64}, 21);
    const StencilShape st = make_benchmark("j2d5pt");
    const RunResult res = run_device_tiling(in, st, device(2, {32}, {2}, false));
    CHECK(res.trace.syncs_device == 2);
    CHECK(res.trace.device_tiles == 1);
    CHECK(first_difference(res.output, reference_run(in, st, 2)) == -1);
}

TEST_CASE("non-lazy phase order per step") {
    const Grid in = random_grid({16, 32}, 2);
    const RunResult res = run_device_tiling(in, make_benchmark("j2d5pt"), device(1, {16}, {2}, false));
    std::vector<std::string> tags;
    for (const Phase& ph : res.trace.wall_phases)
        tags.push_back(ph.tag);
    const std::vector<std::string> want{"load",      "load_halo", "compute",   "block_sync", "push_halo",
                                        "device_sync", "swap",    "pull_halo", "block_sync", "store"};
    CHECK(tags == want);
}

TEST_CASE("a single device tile of one block moves no halo") {
    const Grid in = random_grid({20, 30}, 4);
    const StencilShape st = make_benchmark("j2d9pt");
    for (bool lazy : {false, true}) {
        const RunResult res = run_device_tiling(in, st, device(3, {30}, {1}, lazy));
        CHECK(res.trace.gm_halo_loads == 0);
        CHECK(res.trace.gm_halo_stores == 0);
        CHECK(first_difference(res.output, reference_run(in, st, 3)) == -1);
    }
}

TEST_CASE("lazy device tiling fires one barrier per device tile") {
    const Grid in = random_grid({10, 70, 70}, 8);
    const StencilShape st = make_benchmark("j3d7pt");
    const RunResult lazy = run_device_tiling(in, st, device(4, {8, 8}, {3, 2}, true));
    CHECK(lazy.trace.device_tiles > 1);
    CHECK(lazy.trace.syncs_device == lazy.trace.device_tiles);
    CHECK(first_difference(lazy.output, reference_run(in, st, 4)) == -1);
    const RunResult eager = run_device_tiling(in, st, device(4, {8, 8}, {3, 2}, false));
    CHECK(eager.trace.syncs_device == eager.trace.device_tiles * 4);
    CHECK(eager.output == lazy.output);
}

TEST_CASE("traces do not depend on the worker count") {
    const Grid in = random_grid({14, 37, 29}, 13);
    const StencilShape st = make_benchmark("poisson");
    for (TilingParams p : {sm(2, {9, 10}), device(2, {4, 8}, {3, 2}, false), device(2, {4, 8}, {3, 2}, true)}) {
        p.workers = 1;
        const RunResult one = run_tiling(in, st, p);
        p.workers = 8;
        const RunResult eight = run_tiling(in, st, p);
        CHECK(one.trace == eight.trace);
        CHECK(one.output == eight.output);
    }
}

TEST_CASE("rst moves traffic between levels without changing the output") {
    const Grid in = random_grid({12, 40, 40}, 17);
    const StencilShape st = make_benchmark("j3d7pt");
    TilingParams p = device(2, {32, 32}, {1, 1}, false);
    const RunResult off = run_tiling(in, st, p);
    p.rst = true;
    const RunResult on = run_tiling(in, st, p);
    CHECK(on.output == off.output);
    CHECK(trace_summary(off.trace).a_sm == 8.0);
    CHECK(trace_summary(on.trace).a_sm == 4.5);
    CHECK(on.trace.onchip_register > 0);
    CHECK(off.trace.onchip_register == 0);
}

TEST_CASE("measured shared accesses without rst equal taps plus one") {
    CHECK(trace_summary(run_sm_tiling(random_grid({16, 64}, 1), make_benchmark("j2d5pt"), sm(2, {32})).trace).a_sm ==
          6.0);
    CHECK(trace_summary(
              run_sm_tiling(random_grid({16, 30, 30}, 1), make_benchmark("j3d13pt"), sm(2, {12, 12})).trace)
              .a_sm == 14.0);
}

TEST_CASE("global traffic per valid update approaches 2/t for one large tile") {
    const StencilShape st = make_benchmark("j2d5pt");
    const Grid in = random_grid({200, 200}, 6);
    const AccountingReport rep = trace_summary(run_device_tiling(in, st, device(4, {200}, {1}, true)).trace);
    CHECK(rep.a_gm > 2.0 / 4);
    CHECK(rep.a_gm < 2.0 / 4 * 1.05);
}

TEST_CASE("depth zero copies the input and leaves the trace empty") {
    const Grid in = random_grid({10, 10}, 1);
    const RunResult res = run_sm_tiling(in, make_benchmark("j2d5pt"), sm(0, {8}));
    CHECK(res.output == in);
    CHECK(res.trace == ExecutionTrace{});
    CHECK_THROWS_AS(trace_summary(res.trace), PreconditionError);
}

TEST_CASE("parameter errors") {
    const Grid in = random_grid({20, 20}, 1);
    const StencilShape st = make_benchmark("j2d5pt");
    CHECK_THROWS_AS(run_sm_tiling(in, st, sm(3, {6})), PreconditionError);
    CHECK_THROWS_AS(run_sm_tiling(in, st, sm(1, {6, 6})), PreconditionError);
    CHECK_THROWS_AS(run_sm_tiling(in, st, device(1, {6}, {1}, false)), PreconditionError);
    CHECK_THROWS_AS(run_device_tiling(in, st, device(1, {6}, {}, false)), PreconditionError);
    CHECK_THROWS_AS(run_device_tiling(in, st, device(4, {3}, {2}, false)), PreconditionError);
    CHECK_THROWS_AS(run_sm_tiling(random_grid({20, 20, 20}, 1), st, sm(1, {8})), PreconditionError);
    CHECK_THROWS_AS(scheme_from_string("mesh"), ConfigError);
}

TEST_CASE("prefetch only renames the load phase") {
    const Grid in = random_grid({12, 50}, 3);
    const StencilShape st = make_benchmark("j2d5pt");
    TilingParams p = sm(2, {20});
    const RunResult plain = run_tiling(in, st, p);
    p.prefetch = true;
    const RunResult pre = run_tiling(in, st, p);
    CHECK(pre.output == plain.output);
    CHECK(pre.trace.wall_phases.front().tag == "prefetch");
    CHECK(pre.trace.gm_loads == plain.trace.gm_loads);
}

TEST_CASE("trace export") {
    const RunResult res = run_sm_tiling(random_grid({12, 40}, 3), make_benchmark("j2d5pt"), sm(1, {20}));
    const std::string json = trace_to_json(res.trace);
    CHECK(json.find("\"cells_valid\"") != std::string::npos);
    CHECK(json.find("\"wall_phases\"") != std::string::npos);
    CHECK(phases_to_csv(res.trace).rfind("phase,cells\n", 0) == 0);
}
