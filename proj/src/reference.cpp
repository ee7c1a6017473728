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

#include "tblock/reference.hpp"

#include <string>

#include "tblock/error.hpp"

namespace tblock {

namespace {

void check_compatible(const Grid& grid, const StencilShape& stencil) {
    if (grid.dims() != stencil.dims)
        throw PreconditionError("grid has " + std::to_string(grid.dims()) + " dimensions, stencil '" +
                                stencil.name + "' has " + std::to_string(stencil.dims));
    for (int d = 0; d < grid.dims(); ++d)
        if (grid.extent(d) <= 2 * stencil.radius)
            throw PreconditionError("extent " + std::to_string(grid.extent(d)) + " in dimension " +
                                    std::to_string(d) + " is too small for radius " +
                                    std::to_string(stencil.radius));
}

} // namespace

Grid reference_step(const Grid& grid, const StencilShape& stencil) {
    check_compatible(grid, stencil);
    Grid out = grid;
    const int r = stencil.radius;

    std::vector<std::ptrdiff_t> flat;
    std::vector<double> coef;
    for (const Tap& t : stencil.taps) {
        std::ptrdiff_t o = 0;
        for (int d = 0; d < grid.dims(); ++d)
            o += t.offset[d] * grid.stride(d);
        flat.push_back(o);
        coef.push_back(t.coefficient);
    }

    const auto in = grid.cells();
    auto dst = out.cells();
    const int n0 = grid.extent(0);
    const int n1 = grid.dims() > 1 ? grid.extent(1) : 1;
    const int n2 = grid.dims() > 2 ? grid.extent(2) : 1;
    const int r1 = grid.dims() > 1 ? r : 0;
    const int r2 = grid.dims() > 2 ? r : 0;
    const bool keep_frame = grid.boundary() == Boundary::fixed_value;

    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j)
            for (int k = 0; k < n2; ++k) {
                const std::size_t at = grid.index({i, j, k});
                const bool interior = i >= r && i < n0 - r && j >= r1 && j < n1 - r1 &&
                                      k >= r2 && k < n2 - r2;
                if (!interior) {
                    dst[at] = keep_frame ? in[at] : 0.0;
                    continue;
                }
                double acc = 0.0;
                for (std::size_t q = 0; q < flat.size(); ++q)
                    acc += coef[q] * in[static_cast<std::ptrdiff_t>(at) + flat[q]];
                dst[at] = acc;
            }
    return out;
}

Grid reference_run(const Grid& grid, const StencilShape& stencil, int steps) {
    if (steps < 0)
        throw PreconditionError("step count must be non-negative");
    check_compatible(grid, stencil);
    Grid g = grid;
    for (int s = 0; s < steps; ++s)
        g = reference_step(g, stencil);
    return g;
}

} // namespace tblock
