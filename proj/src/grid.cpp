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

#include "tblock/grid.hpp"

#include <algorithm>
#include <cstring>

#include "tblock/error.hpp"

namespace tblock {

std::string_view to_string(Boundary b) {
    return b == Boundary::fixed_value ? "fixed-value" : "skip-update";
}

Boundary boundary_from_string(std::string_view s) {
    if (s == "fixed-value")
        return Boundary::fixed_value;
    if (s == "skip-update")
        return Boundary::skip_update;
    throw ConfigError("unknown boundary policy '" + std::string(s) + "'");
}

Grid::Grid(std::span<const int> extents, Boundary boundary) : boundary_(boundary) {
    if (extents.empty() || extents.size() > kMaxDims)
        throw PreconditionError("grid must have 1 to 3 dimensions");
    dims_ = static_cast<int>(extents.size());
    std::size_t n = 1;
    for (int d = 0; d < dims_; ++d) {
        if (extents[d] <= 0)
            throw PreconditionError("grid extents must be positive");
        extents_[d] = extents[d];
        n *= static_cast<std::size_t>(extents[d]);
    }
    std::ptrdiff_t s = 1;
    for (int d = dims_ - 1; d >= 0; --d) {
        strides_[d] = s;
        s *= extents_[d];
    }
    cells_.assign(n, 0.0);
}

Grid::Grid(std::initializer_list<int> extents, Boundary boundary)
    : Grid(std::span<const int>(extents.begin(), extents.size()), boundary) {}

Coord Grid::coord(std::size_t index) const {
    Coord c{0, 0, 0};
    auto rest = static_cast<std::ptrdiff_t>(index);
    for (int d = 0; d < dims_; ++d) {
        c[d] = static_cast<int>(rest / strides_[d]);
        rest %= strides_[d];
    }
    return c;
}

bool operator==(const Grid& a, const Grid& b) {
    return a.dims_ == b.dims_ && a.extents_ == b.extents_ &&
           a.cells_.size() == b.cells_.size() &&
           std::memcmp(a.cells_.data(), b.cells_.data(), a.cells_.size() * sizeof(double)) == 0;
}

void fill_random(Grid& grid, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (double& v : grid.cells())
        v = 2.0 * rng.uniform() - 1.0;
}

std::ptrdiff_t first_difference(const Grid& a, const Grid& b) {
    if (a.size() != b.size())
        return 0;
    auto ac = a.cells();
    auto bc = b.cells();
    for (std::size_t i = 0; i < ac.size(); ++i)
        if (std::memcmp(&ac[i], &bc[i], sizeof(double)) != 0)
            return static_cast<std::ptrdiff_t>(i);
    return -1;
}

} // namespace tblock
