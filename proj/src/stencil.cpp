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

#include "tblock/stencil.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "tblock/error.hpp"

namespace tblock {

namespace {

// Axis-major star: the full line along dimension 0, then the off-centre
// points of every other axis. For radius 1 this is the tap order of the
// textbook 2D 5-point and 3D 7-point kernels.
std::vector<Coord> star_offsets(int dims, int radius) {
    std::vector<Coord> out;
    for (int k = -radius; k <= radius; ++k)
        out.push_back({k, 0, 0});
    for (int d = 1; d < dims; ++d)
        for (int k = -radius; k <= radius; ++k) {
            if (k == 0)
                continue;
            Coord c{0, 0, 0};
            c[d] = k;
            out.push_back(c);
        }
    return out;
}

std::vector<Coord> box_offsets(int dims, int radius) {
    std::vector<Coord> out;
    const int r0 = radius, r1 = dims > 1 ? radius : 0, r2 = dims > 2 ? radius : 0;
    for (int i = -r0; i <= r0; ++i)
        for (int j = -r1; j <= r1; ++j)
            for (int k = -r2; k <= r2; ++k)
                out.push_back({i, j, k});
    return out;
}

// 19 points: the 3x3x3 box without its eight corners.
std::vector<Coord> poisson_offsets() {
    std::vector<Coord> out;
    for (const Coord& c : box_offsets(3, 1))
        if (std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]) <= 2)
            out.push_back(c);
    return out;
}

// 17 points: the full 3x3 plane at the centre of the streaming axis plus
// the four edge neighbours in each adjacent plane.
std::vector<Coord> j3d17pt_offsets() {
    std::vector<Coord> out;
    for (const Coord& c : box_offsets(3, 1)) {
        if (c[0] == 0 || std::abs(c[1]) + std::abs(c[2]) == 1)
            out.push_back(c);
    }
    return out;
}

struct CatalogRow {
    std::string_view name;
    int dims;
    std::vector<Coord> (*offsets)();
    double flops;
    int sm_no_rst;
    double sm_rst;
    std::vector<int> domain;
    int depth;
};

const std::vector<CatalogRow>& catalog() {
    static const std::vector<CatalogRow> rows = {
        {"j1d3pt", 1, [] { return star_offsets(1, 1); }, 6, 4, 2.0, {1 << 20}, 0},
        {"j2d5pt", 2, [] { return star_offsets(2, 1); }, 10, 6, 4.0, {8352, 8352}, 12},
        {"j2d9pt", 2, [] { return star_offsets(2, 2); }, 18, 10, 6.0, {8064, 8064}, 8},
        {"j2d9pt-gol", 2, [] { return box_offsets(2, 1); }, 18, 10, 4.0, {8784, 8784}, 6},
        {"j2d25pt", 2, [] { return box_offsets(2, 2); }, 25, 26, 6.0, {8640, 8640}, 4},
        {"j3d7pt", 3, [] { return star_offsets(3, 1); }, 14, 8, 4.5, {2560, 288, 384}, 8},
        {"j3d13pt", 3, [] { return star_offsets(3, 2); }, 26, 14, 7.0, {2560, 288, 384}, 5},
        {"j3d17pt", 3, j3d17pt_offsets, 34, 18, 5.5, {2560, 288, 384}, 6},
        {"j3d27pt", 3, [] { return box_offsets(3, 1); }, 54, 28, 5.5, {2560, 288, 384}, 5},
        {"poisson", 3, poisson_offsets, 38, 20, 5.5, {2560, 288, 384}, 6},
    };
    return rows;
}

const std::vector<std::string_view>& names() {
    static const std::vector<std::string_view> n = [] {
        std::vector<std::string_view> v;
        for (const auto& row : catalog())
            v.push_back(row.name);
        return v;
    }();
    return n;
}

} // namespace

StencilShape make_stencil(std::string name, int dims, std::vector<Tap> taps) {
    StencilShape s;
    s.name = std::move(name);
    s.dims = dims;
    s.taps = std::move(taps);
    for (const Tap& t : s.taps)
        for (int d = 0; d < kMaxDims; ++d)
            s.radius = std::max(s.radius, std::abs(t.offset[d]));
    s.sm_accesses_no_rst = static_cast<int>(s.taps.size()) + 1;
    s.sm_accesses_with_rst = std::min<double>(s.sm_accesses_no_rst, rst_cost(s).per_cell());
    check_shape(s);
    return s;
}

void check_shape(const StencilShape& s) {
    const auto fail = [&](const std::string& what) {
        throw CatalogError("stencil '" + s.name + "': " + what);
    };
    if (s.dims < 1 || s.dims > kMaxDims)
        fail("dimensionality must be 1, 2 or 3");
    if (s.taps.empty())
        fail("tap list is empty");
    std::set<Coord> seen;
    bool has_center = false;
    int radius = 0;
    for (const Tap& t : s.taps) {
        for (int d = s.dims; d < kMaxDims; ++d)
            if (t.offset[d] != 0)
                fail("tap offset uses a dimension beyond the stencil's dimensionality");
        for (int d = 0; d < kMaxDims; ++d)
            radius = std::max(radius, std::abs(t.offset[d]));
        if (!seen.insert(t.offset).second)
            fail("duplicate tap offset");
        has_center = has_center || t.offset == Coord{0, 0, 0};
    }
    if (!has_center)
        fail("taps must contain the zero offset");
    if (radius != s.radius)
        fail("radius does not match the tap pattern");
    if (s.sm_accesses_no_rst != static_cast<int>(s.taps.size()) + 1)
        fail("a_sm without RST must equal |taps| + 1");
    if (s.sm_accesses_with_rst > s.sm_accesses_no_rst)
        fail("a_sm with RST exceeds a_sm without RST");
}

StencilShape with_coefficients(StencilShape shape, std::span<const double> coefficients) {
    if (coefficients.size() != shape.taps.size())
        throw PreconditionError("stencil '" + shape.name + "' has " +
                                std::to_string(shape.taps.size()) + " taps, got " +
                                std::to_string(coefficients.size()) + " coefficients");
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        shape.taps[i].coefficient = coefficients[i];
    return shape;
}

std::span<const std::string_view> catalog_names() { return names(); }

StencilShape make_benchmark(std::string_view name) {
    for (const auto& row : catalog()) {
        if (row.name != name)
            continue;
        const auto offsets = row.offsets();
        const double w = 1.0 / static_cast<double>(offsets.size());
        std::vector<Tap> taps;
        for (const Coord& c : offsets)
            taps.push_back({c, w});
        StencilShape s = make_stencil(std::string(row.name), row.dims, std::move(taps));
        s.flops_per_cell = row.flops;
        s.sm_accesses_no_rst = row.sm_no_rst;
        s.sm_accesses_with_rst = row.sm_rst;
        s.default_domain = row.domain;
        s.reference_depth = row.depth;
        check_shape(s);
        return s;
    }
    std::string valid;
    for (auto n : names())
        valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw CatalogError("unknown benchmark '" + std::string(name) + "'; valid names: " + valid);
}

std::string export_catalog_json() {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (auto name : names()) {
        const StencilShape s = make_benchmark(name);
        nlohmann::ordered_json rec;
        rec["name"] = s.name;
        rec["dims"] = s.dims;
        rec["radius"] = s.radius;
        rec["taps"] = s.taps.size();
        rec["flops_per_cell"] = s.flops_per_cell;
        rec["a_sm_no_rst"] = s.sm_accesses_no_rst;
        rec["a_sm_rst"] = s.sm_accesses_with_rst;
        rec["default_domain"] = s.default_domain;
        rec["reference_depth"] = s.reference_depth;
        doc.push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

RstCost rst_cost(const StencilShape& s) {
    RstCost c;
    for (const Tap& t : s.taps) {
        const Coord& o = t.offset;
        if (s.dims >= 2 && o[s.dims - 1] != 0) {
            ++c.shared_taps;
        } else {
            ++c.register_taps;
            if (s.dims == 3 && o[1] != 0)
                c.strip_radius = std::max(c.strip_radius, std::abs(o[1]));
        }
    }
    return c;
}

bool is_star(const StencilShape& s) {
    return std::all_of(s.taps.begin(), s.taps.end(), [](const Tap& t) {
        int nonzero = 0;
        for (int v : t.offset)
            nonzero += v != 0;
        return nonzero <= 1;
    });
}

} // namespace tblock
