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
#include <set>

#include <nlohmann/json.hpp>

#include "tblock/error.hpp"
#include "tblock/reference.hpp"
#include "tblock/stencil.hpp"

using namespace tblock;

namespace {

// Coordinate-based update, independent of the flat-offset reference.
Grid naive_step(const Grid& g, const StencilShape& st) {
    Grid out = g;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Coord c = g.coord(i);
        if (g.on_frame(c, st.radius)) {
            out.cells()[i] = g.boundary() == Boundary::fixed_value ? g.cells()[i] : 0.0;
            continue;
        }
        double acc = 0.0;
        for (const Tap& t : st.taps) {
            Coord n = c;
            for (int d = 0; d < g.dims(); ++d)
                n[d] += t.offset[d];
            acc += t.coefficient * g[n];
        }
        out.cells()[i] = acc;
    }
    return out;
}

} // namespace

TEST_CASE("splitmix64 reproduces the published sequence for seed 0") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(rng.next() == 0x06c45d188009454fULL);
    CHECK(rng.next() == 0xf88bb8a8724c81ecULL);
}

TEST_CASE("grid layout is row-major with the last dimension contiguous") {
    Grid g({3, 4, 5});
    CHECK(g.size() == 60);
    CHECK(g.stride(2) == 1);
    CHECK(g.stride(1) == 5);
    CHECK(g.stride(0) == 20);
    CHECK(g.index({2, 3, 4}) == 59);
    CHECK(g.coord(27) == Coord{1, 1, 2});
    CHECK(g.on_frame({0, 2, 2}, 1));
    CHECK_FALSE(g.on_frame({1, 2, 2}, 1));
    CHECK(g.on_frame({1, 2, 4}, 1));
}

TEST_CASE("grid errors and helpers") {
    CHECK_THROWS_AS(Grid({}), PreconditionError);
    CHECK_THROWS_AS(Grid({2, 0}), PreconditionError);
    CHECK_THROWS_AS(Grid({1, 1, 1, 1}), PreconditionError);
    CHECK(boundary_from_string("skip-update") == Boundary::skip_update);
    CHECK_THROWS_AS(boundary_from_string("periodic"), ConfigError);

    Grid a({4, 4}), b({4, 4});
    fill_random(a, 5);
    fill_random(b, 5);
    CHECK(a == b);
    CHECK(first_difference(a, b) == -1);
    b.cells()[7] += 1.0;
    CHECK(first_difference(a, b) == 7);
    for (double v : a.cells()) {
        CHECK(v >= -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("catalog matches the benchmark table") {
    struct Row {
        const char* name;
        int dims, radius, taps;
        double flops;
        int sm_no_rst;
        double sm_rst;
    };
    const Row rows[] = {
        {"j2d5pt", 2, 1, 5, 10, 6, 4},      {"j2d9pt", 2, 2, 9, 18, 10, 6},
        {"j2d9pt-gol", 2, 1, 9, 18, 10, 4}, {"j2d25pt", 2, 2, 25, 25, 26, 6},
        {"j3d7pt", 3, 1, 7, 14, 8, 4.5},    {"j3d13pt", 3, 2, 13, 26, 14, 7},
        {"j3d17pt", 3, 1, 17, 34, 18, 5.5}, {"j3d27pt", 3, 1, 27, 54, 28, 5.5},
        {"poisson", 3, 1, 19, 38, 20, 5.5},
    };
    for (const Row& r : rows) {
        CAPTURE(r.name);
        const StencilShape s = make_benchmark(r.name);
        CHECK(s.dims == r.dims);
        CHECK(s.radius == r.radius);
        CHECK(s.taps.size() == static_cast<std::size_t>(r.taps));
        CHECK(s.flops_per_cell == r.flops);
        CHECK(s.sm_accesses_no_rst == r.sm_no_rst);
        CHECK(s.sm_accesses_with_rst == r.sm_rst);
        CHECK(s.gm_accesses_per_cell == 2.0);
        double sum = 0;
        for (const Tap& t : s.taps)
            sum += t.coefficient;
        CHECK(sum == doctest::Approx(1.0));
    }
    CHECK(make_benchmark("j2d5pt").default_domain == std::vector<int>{8352, 8352});
    CHECK(make_benchmark("poisson").default_domain == std::vector<int>{2560, 288, 384});
    CHECK(make_benchmark("j3d13pt").reference_depth == 5);
    CHECK(catalog_names().size() == 10);
}

TEST_CASE("tap order of the radius-1 stars") {
    const StencilShape s = make_benchmark("j2d5pt");
    const Coord want[] = {{-1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}};
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(s.taps[i].offset == want[i]);
}

TEST_CASE("shape invariants") {
    CHECK_THROWS_AS(make_benchmark("j4d"), CatalogError);
    try {
        make_benchmark("nope");
    } catch (const CatalogError& e) {
        CHECK(std::string(e.what()).find("j2d5pt") != std::string::npos);
    }
    CHECK_THROWS_AS(make_stencil("x", 2, {}), CatalogError);
    CHECK_THROWS_AS(make_stencil("x", 2, {{{1, 0, 0}, 1.0}}), CatalogError);
    CHECK_THROWS_AS(make_stencil("x", 2, {{{0, 0, 0}, 1.0}, {{0, 0, 0}, 1.0}}), CatalogError);
    CHECK_THROWS_AS(make_stencil("x", 1, {{{0, 0, 0}, 1.0}, {{0, 1, 0}, 1.0}}), CatalogError);
    const StencilShape s = make_stencil("x", 1, {{{-2, 0, 0}, 1.0}, {{0, 0, 0}, 1.0}});
    CHECK(s.radius == 2);
    CHECK(s.sm_accesses_no_rst == 3);
    const double c[] = {0.5, 0.5};
    CHECK(with_coefficients(s, c).taps[0].coefficient == 0.5);
    CHECK_THROWS_AS(with_coefficients(s, std::span<const double>(c, 1)), PreconditionError);
}

TEST_CASE("register streaming cost reproduces the star columns") {
    CHECK(rst_cost(make_benchmark("j2d5pt")).per_cell() == 4.0);
    CHECK(rst_cost(make_benchmark("j2d9pt")).per_cell() == 6.0);
    CHECK(rst_cost(make_benchmark("j3d7pt")).per_cell() == 4.5);
    CHECK(rst_cost(make_benchmark("j3d13pt")).per_cell() == 7.0);
    CHECK(is_star(make_benchmark("j3d13pt")));
    CHECK_FALSE(is_star(make_benchmark("poisson")));
}

TEST_CASE("catalog export") {
    const auto doc = nlohmann::json::parse(export_catalog_json());
    REQUIRE(doc.size() == 10);
    CHECK(doc[1]["name"] == "j2d5pt");
    CHECK(doc[1]["a_sm_rst"] == 4.0);
}

TEST_CASE("reference step on a hand-computed 1D line") {
    StencilShape s = make_benchmark("j1d3pt");
    const double c[] = {0.25, 0.5, 0.25};
    s = with_coefficients(s, c);
    Grid g({5});
    const double v[] = {0, 4, 8, 4, 0};
    std::copy(std::begin(v), std::end(v), g.cells().begin());
    const Grid out = reference_step(g, s);
    CHECK(out.cells()[0] == 0.0);
    CHECK(out.cells()[1] == 4.0);
    CHECK(out.cells()[2] == 6.0);
    CHECK(out.cells()[3] == 4.0);
    Grid skip({5}, Boundary::skip_update);
    std::copy(std::begin(v), std::end(v), skip.cells().begin());
    skip.cells()[0] = 3.0;
    CHECK(reference_step(skip, s).cells()[0] == 0.0);
}

TEST_CASE("reference matches the coordinate oracle for every catalog stencil") {
    for (auto name : catalog_names()) {
        const StencilShape s = make_benchmark(name);
        CAPTURE(name);
        for (Boundary b : {Boundary::fixed_value, Boundary::skip_update}) {
            Grid g = s.dims == 1 ? Grid({33}, b) : s.dims == 2 ? Grid({13, 17}, b) : Grid({9, 10, 11}, b);
            fill_random(g, 99);
            Grid want = g;
            for (int i = 0; i < 3; ++i)
                want = naive_step(want, s);
            CHECK(first_difference(reference_run(g, s, 3), want) == -1);
        }
    }
}

TEST_CASE("reference preconditions") {
    const StencilShape s = make_benchmark("j2d9pt");
    CHECK_THROWS_AS(reference_step(Grid({4, 10}), s), PreconditionError);
    CHECK_THROWS_AS(reference_step(Grid({10}), s), PreconditionError);
    CHECK_THROWS_AS(reference_run(Grid({10, 10}), s, -1), PreconditionError);
    Grid g({6, 6});
    fill_random(g, 1);
    CHECK(reference_run(g, s, 0) == g);
}
