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

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "tblock/cost_model.hpp"
#include "tblock/error.hpp"

using namespace tblock;

namespace {

KernelProfile flat(double a_gm, double a_sm, double a_cmp, double d, int t) {
    KernelProfile p;
    p.a_gm = a_gm;
    p.a_sm = a_sm;
    p.a_cmp = a_cmp;
    p.d_gm = p.d_sm = p.d_cmp = p.d_all = d;
    p.t = t;
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("component times follow the per-component formulas") {
    const HardwareSpec hw = a100();
    const ComponentTimes t = component_times(hw, flat(2, 4, 10, 1e6, 1));
    CHECK(t.gm == doctest::Approx(10.289e-6).epsilon(1e-4));
    CHECK(t.sm == doctest::Approx(4 * 1e6 * 8 / 19.49e12));
    CHECK(t.cmp == doctest::Approx(10 * 1e6 / 9.7e12));

    const ComponentTimes t2 = component_times(hw, flat(2, 4, 10, 1e6, 2));
    CHECK(t2.sm == 2 * t.sm);
    CHECK(t2.cmp == 2 * t.cmp);
    CHECK(t2.gm == t.gm);

    CHECK(component_times(hw, flat(2, 1, 0, 100, 3)).cmp == 0.0);
    CHECK_THROWS_AS(component_times(hw, flat(2, 1, 0, 0, 3)), PreconditionError);
    CHECK_THROWS_AS(component_times(hw, flat(2, 1, 0, 10, 0)), PreconditionError);
}

TEST_CASE("bottleneck ordering and ties") {
    CHECK(bottleneck({10e-6, 5e-6, 1e-6}) == Component::gm);
    CHECK(bottleneck({1, 1, 1}) == Component::gm);
    CHECK(bottleneck({1, 2, 2}) == Component::sm);
    CHECK(bottleneck({1, 2, 3}) == Component::cmp);
    const HardwareSpec hw = a100();
    CHECK(bottleneck(component_times(hw, sm_profile(make_benchmark("j2d5pt"), {256}, 7))) == Component::sm);
    CHECK(bottleneck(component_times(hw, sm_profile(make_benchmark("j2d5pt"), {256}, 6))) == Component::gm);
}

TEST_CASE("attainable performance limits") {
    const HardwareSpec hw = a100();
    CHECK(attainable_perf(hw, flat(2, 0.001, 0, 1000, 3)) == doctest::Approx(3 * hw.gm_bandwidth / 16));
    const double asymptote = hw.sm_bandwidth / (4 * 8);
    CHECK(rel(attainable_perf(hw, flat(2, 4, 0, 1000, 4096)), asymptote) < 1e-12);
    CHECK_THROWS_AS(attainable_perf(hw, flat(0, 0, 0, 1000, 1)), PreconditionError);
}

TEST_CASE("sm valid proportion") {
    KernelProfile p = flat(2, 4, 10, 1, 7);
    p.tile = {256};
    CHECK(valid_proportion_sm(p, true) == 242.0 / 256.0);
    CHECK(valid_proportion_sm(p, false) == 249.0 / 256.0);
    p.t = 0;
    CHECK(valid_proportion_sm(p) == 1.0);
    p.tile = {34, 34};
    p.t = 3;
    CHECK(valid_proportion_sm(p) == doctest::Approx(784.0 / 1156.0));
    p.t = 17;
    CHECK_THROWS_AS(valid_proportion_sm(p), PreconditionError);
}

TEST_CASE("device valid proportion") {
    CHECK(valid_proportion_device(2.05e-6, 1.2e-6, 1) == doctest::Approx(0.6308).epsilon(1e-3));
    CHECK(valid_proportion_device(2.42e-6, 1.2e-6, 1) == doctest::Approx(0.6685).epsilon(1e-3));
    CHECK(valid_proportion_device(1e-6, 0, 1) == 1.0);
    CHECK(valid_proportion_device(1e-6, std::numeric_limits<double>::infinity(), 1) == 0.0);
    CHECK_THROWS_AS(valid_proportion_device(0, 1, 1), PreconditionError);
    CHECK_THROWS_AS(valid_proportion_device(1, 1, 0), PreconditionError);
}

TEST_CASE("shift depth thresholds") {
    const HardwareSpec hw = a100();
    const DepthThreshold d2 = min_depth_to_shift(hw, sm_profile(make_benchmark("j2d5pt"), {256}, 1));
    REQUIRE(d2.attainable);
    // a_gm * B_sm / (a_sm * B_gm)
    CHECK(d2.t_real == doctest::Approx(2 * 19.49e12 / (4 * 1555e9)));
    CHECK(d2.t_int == 7);

    const DepthThreshold d3 = min_depth_to_shift(hw, device_profile(make_benchmark("j3d7pt"), {32, 32}, {1, 1}, 1));
    REQUIRE(d3.attainable);
    CHECK(d3.t_real > 18.3);
    CHECK(d3.t_real < 18.4);
    CHECK(d3.t_int == 19);

    HardwareSpec fast = hw;
    fast.gm_bandwidth = 1e30;
    CHECK(min_depth_to_shift(fast, sm_profile(make_benchmark("j2d5pt"), {256}, 1)).t_int == 1);
    HardwareSpec slow = hw;
    slow.sm_bandwidth = 1e3;
    CHECK(min_depth_to_shift(slow, sm_profile(make_benchmark("j2d5pt"), {256}, 1)).t_int == 1);
    HardwareSpec wide = hw;
    wide.sm_bandwidth = 1e30;
    wide.compute_throughput = 1e30;
    CHECK(min_depth_to_shift(wide, sm_profile(make_benchmark("j2d5pt"), {256}, 1)).t_real > 1e9);
    CHECK_FALSE(min_depth_to_shift(hw, flat(2, 0, 0, 10, 1)).attainable);
}

TEST_CASE("shift depth equals a brute-force scan") {
    SplitMix64 rng(2024);
    HardwareSpec hw = a100();
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        KernelProfile p = flat(0.5 + 3 * rng.uniform(), 0.5 + 10 * rng.uniform(), 30 * rng.uniform(),
                               1 + 1e5 * rng.uniform(), 1);
        p.gm_halo_per_depth = rng.uniform() < 0.5 ? 0 : p.d_gm * 0.1 * rng.uniform();
        const DepthThreshold d = min_depth_to_shift(hw, p);
        int scan = 0;
        for (int t = 1; t <= 256 && scan == 0; ++t) {
            p.t = t;
            if (bottleneck(component_times(hw, p)) != Component::gm)
                scan = t;
        }
        if (!d.attainable || d.t_int > 256) {
            CHECK(scan == 0);
            continue;
        }
        CHECK(scan == d.t_int);
        ++checked;
    }
    CHECK(checked > 500);
}

TEST_CASE("minimum square tile width") {
    const HardwareSpec hw = a100();
    KernelProfile p = sm_profile(make_benchmark("j3d7pt"), {}, 1);
    const TileWidth w = min_tile_width_3d(hw, p);
    CHECK(w.bound == doctest::Approx(4 * 2 * 19.49e12 / (4.5 * 1555e9)));
    CHECK(w.bound > 22.2);
    CHECK(w.bound < 22.4);
    CHECK(w.chosen == 32);
    p.rad = 2;
    CHECK(min_tile_width_3d(hw, p).bound == doctest::Approx(44.565).epsilon(1e-4));
    CHECK(min_tile_width_3d(hw, p).chosen == 64);
    HardwareSpec same = hw;
    same.sm_bandwidth = same.gm_bandwidth;
    p.a_sm = p.a_gm;
    CHECK(min_tile_width_3d(same, p).bound == doctest::Approx(8.0));
}

TEST_CASE("little's law") {
    const HardwareSpec hw = a100();
    const LittlesLaw l = littles_check(hw, "dfma", 256, 4);
    CHECK(l.parallelism == 1024);
    CHECK(l.saturates);
    for (const auto& [op, lat] : hw.op_latencies)
        CHECK(littles_check(hw, op, 256, 4).saturates == (lat * hw.op_throughputs.at(op) <= 1024));
    CHECK(littles_check(hw, "dfma", 256, 0).parallelism == 0);
    CHECK_FALSE(littles_check(hw, "dfma", 256, 0).saturates);
    HardwareSpec h = hw;
    h.op_latencies["lane"] = 8;
    h.op_throughputs["lane"] = 64;
    CHECK(littles_check(h, "lane", 256, 4).concurrency == 512);
    CHECK(littles_check(h, "lane", 256, 4).saturates);
    CHECK_FALSE(littles_check(h, "lane", 64, 4).saturates);
    CHECK_THROWS_AS(littles_check(hw, "tensor", 256, 4), ConfigError);
}

TEST_CASE("on-chip budget") {
    const HardwareSpec hw = a100();
    TilingParams p;
    p.t = 3;
    p.variant = QueueVariant::shifting_data;
    CHECK(onchip_bytes_required(hw, make_benchmark("j1d3pt"), p).bytes == 56);
    p.variant = QueueVariant::computing_address;
    CHECK(onchip_bytes_required(hw, make_benchmark("j1d3pt"), p).bytes == 64);
    p.scheme = Scheme::device_tiling;
    p.t = 19;
    p.tile = {32, 32};
    p.variant = QueueVariant::shifting_address;
    const OnchipBudget b = onchip_bytes_required(hw, make_benchmark("j3d7pt"), p);
    CHECK(b.planes == 39);
    CHECK(b.plane_cells == 34 * 34);
    CHECK(b.bytes == 39 * 34 * 34 * 8);
    CHECK_FALSE(b.fits);
    p.t = 8;
    CHECK(onchip_bytes_required(hw, make_benchmark("j3d7pt"), p).fits);
}

TEST_CASE("device profile for the 3D case study") {
    const HardwareSpec hw = a100();
    const KernelProfile p = device_profile(make_benchmark("j3d7pt"), {32, 32}, {12, 9}, 8);
    CHECK(p.d_all == 1024.0 * 108);
    CHECK(p.gm_halo_per_depth == 128.0 * 108);
    const Practical pr = practical_perf(hw, p, Scheme::device_tiling);
    // Halo of t layers: d_gm = 2048 cells per block.
    CHECK(pr.times.gm == doctest::Approx(2.0 * 2048 * 108 * 8 / 1555e9));
    CHECK(pr.P * 1e-9 == doctest::Approx(388.75).epsilon(1e-4));
    CHECK(pr.PP == doctest::Approx(pr.P * pr.V));
    CHECK(pr.PP * 1e-9 == doctest::Approx(254.54).epsilon(1e-4));
    // Charging t+1 halo layers instead reproduces the quoted 2.42 us and 365 GCells/s.
    const double gm_t9 = 2.0 * p.d_gm_at(9) * 8 / 1555e9;
    CHECK(gm_t9 * 1e6 == doctest::Approx(2.42).epsilon(1e-3));
    CHECK(p.d_all * 8 / gm_t9 * 1e-9 == doctest::Approx(365.9).epsilon(1e-3));
}

TEST_CASE("scheme choice on the reference device") {
    const HardwareSpec hw = a100();
    for (const char* name : {"j2d5pt", "j2d9pt", "j2d9pt-gol", "j2d25pt"}) {
        const StencilShape st = make_benchmark(name);
        CHECK(choose_scheme(hw, st, st.default_domain).scheme == Scheme::sm_tiling);
    }
    for (const char* name : {"j3d7pt", "j3d17pt", "j3d27pt", "poisson"}) {
        const StencilShape st = make_benchmark(name);
        CHECK(choose_scheme(hw, st, st.default_domain).scheme == Scheme::device_tiling);
    }
    const StencilShape j2 = make_benchmark("j2d5pt");
    const Plan p2 = choose_scheme(hw, j2, j2.default_domain);
    CHECK(p2.tile == std::vector<int>{256});
    CHECK(p2.t == 7);

    const StencilShape j3 = make_benchmark("j3d7pt");
    const Plan p3 = choose_scheme(hw, j3, j3.default_domain);
    CHECK(p3.tile == std::vector<int>{32, 32});
    CHECK(p3.device_tile_grid == std::vector<int>{9, 12});
    CHECK(p3.t == 8);
    CHECK(p3.predicted_PP * 1e-9 == doctest::Approx(244).epsilon(0.05));
    const Plan& sm = p3.candidates.at(0);
    CHECK(sm.tile == std::vector<int>{34, 34});
    CHECK(sm.t == 6);
    CHECK(sm.predicted_PP * 1e-9 == doctest::Approx(225).epsilon(0.05));
    CHECK(p3.predicted_PP > sm.predicted_PP);
}

TEST_CASE("radius-2 3D star is capacity-limited on the device") {
    const HardwareSpec hw = a100();
    const StencilShape st = make_benchmark("j3d13pt");
    const Plan p = choose_scheme(hw, st, st.default_domain);
    const Plan& sm = p.candidates.at(0);
    const Plan& dev = p.candidates.at(1);
    // 13 planes of 36x36 fit, 17 do not.
    CHECK(dev.t == 3);
    CHECK(dev.onchip.planes == 13);
    CHECK(sm.tile == std::vector<int>{36, 36});
    CHECK(sm.t == 3);
    const double sm_pp = 3 * 1555e9 / 16 * (24.0 * 24.0) / (36.0 * 36.0);
    CHECK(sm.predicted_PP == doctest::Approx(sm_pp));
    CHECK(dev.predicted_PP < sm.predicted_PP);
    CHECK(p.scheme == Scheme::sm_tiling);
}

TEST_CASE("an unbounded device barrier always favours sm tiling") {
    HardwareSpec hw = a100();
    hw.device_sync_latency = 1e30;
    for (auto name : catalog_names()) {
        const StencilShape st = make_benchmark(name);
        const Plan p = choose_scheme(hw, st, st.default_domain);
        CHECK(p.scheme == Scheme::sm_tiling);
        CHECK(p.candidates.at(1).predicted_PP < 1e-6);
    }
}

TEST_CASE("plans are internally consistent") {
    const HardwareSpec hw = a100();
    for (auto name : catalog_names()) {
        const StencilShape st = make_benchmark(name);
        const Plan p = choose_scheme(hw, st, st.default_domain);
        for (const Plan& c : p.candidates) {
            if (!c.feasible)
                continue;
            CAPTURE(name);
            CHECK(c.predicted_PP == doctest::Approx(c.predicted_P * c.predicted_V).epsilon(1e-12));
            const KernelProfile prof = c.scheme == Scheme::sm_tiling
                                           ? sm_profile(st, c.tile, c.t)
                                           : device_profile(st, c.tile, c.device_tile_grid, c.t);
            CHECK(practical_perf(hw, prof, c.scheme).PP == c.predicted_PP);
        }
        CHECK(plan_params(p).t == p.t);
    }
    CHECK_THROWS_AS(choose_scheme(hw, make_benchmark("j2d5pt"), {100}), PreconditionError);
    CHECK_THROWS_AS(choose_scheme(hw, make_benchmark("j2d5pt"), {2, 100}), PreconditionError);
}

TEST_CASE("scale invariance and monotonicity sweep") {
    SplitMix64 rng(7);
    const auto names = catalog_names();
    for (int i = 0; i < 1000; ++i) {
        HardwareSpec hw = a100();
        hw.gm_bandwidth *= 0.5 + rng.uniform();
        hw.sm_bandwidth *= 0.5 + rng.uniform();
        hw.compute_throughput *= 0.5 + rng.uniform();
        const double k = 0.25 + 4 * rng.uniform();
        HardwareSpec scaled = hw;
        scaled.gm_bandwidth *= k;
        scaled.sm_bandwidth *= k;
        scaled.compute_throughput *= k;
        scaled.device_sync_latency /= k;
        const StencilShape st = make_benchmark(names[static_cast<std::size_t>(rng.range(1, 9))]);
        const Plan a = choose_scheme(hw, st, st.default_domain);
        const Plan b = choose_scheme(scaled, st, st.default_domain);
        CHECK(a.scheme == b.scheme);
        CHECK(a.t == b.t);
        CHECK(a.bottleneck == b.bottleneck);
        CHECK(rel(b.predicted_P, k * a.predicted_P) < 1e-9);
        const KernelProfile prof = sm_profile(st, {256}, 1);
        const DepthThreshold da = min_depth_to_shift(hw, prof);
        const DepthThreshold db = min_depth_to_shift(scaled, prof);
        CHECK(da.t_int == db.t_int);
        CHECK(rel(db.t_real, da.t_real) < 1e-12);

        KernelProfile v = prof;
        v.tile = {rng.range(8, 300)};
        v.rad = rng.range(1, 2);
        v.t = 0;
        double prev = 1.0;
        for (int t = 1; v.tile[0] - 2 * t * v.rad > 0; ++t) {
            v.t = t;
            const double cur = valid_proportion_sm(v);
            CHECK(cur < prev);
            prev = cur;
        }
        const double ts = 1e-7 + 1e-5 * rng.uniform();
        CHECK(valid_proportion_device(ts * 1.01, hw.device_sync_latency, 1) >
              valid_proportion_device(ts, hw.device_sync_latency, 1));
    }
}

TEST_CASE("hardware spec files") {
    const HardwareSpec hw = a100();
    CHECK(hardware_from_json(hardware_to_json(hw)) == hw);
    CHECK(load_hardware("a100") == hw);
    CHECK_THROWS_AS(load_hardware("/nonexistent/spec.json"), ConfigError);
    CHECK_THROWS_AS(hardware_from_json("{"), ConfigError);
    CHECK_THROWS_AS(hardware_from_json("[]"), ConfigError);
    CHECK_THROWS_AS(hardware_from_json(R"({"gm_bandwidth_bytes_per_s": 1})"), ConfigError);
    auto j = nlohmann::json::parse(hardware_to_json(hw));
    j["cell_bytes"] = 0;
    CHECK_THROWS_AS(hardware_from_json(j.dump()), ConfigError);
    j["cell_bytes"] = 8;
    j["op_latencies"]["extra"] = 4;
    CHECK_THROWS_AS(hardware_from_json(j.dump()), ConfigError);
    j["op_throughputs"]["extra"] = 2;
    CHECK(hardware_from_json(j.dump()).op_latencies.at("extra") == 4);
    j["sm_count"] = "many";
    CHECK_THROWS_AS(hardware_from_json(j.dump()), ConfigError);
}
