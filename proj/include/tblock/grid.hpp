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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tblock {

/// Up to three spatial dimensions. Dimension 0 is the slowest varying one
/// and is the streaming dimension of the tiling engine; the last dimension
/// is contiguous in memory.
inline constexpr int kMaxDims = 3;

using Coord = std::array<int, kMaxDims>;

enum class Boundary {
    fixed_value, ///< boundary cells keep their original value
    skip_update, ///< boundary cells of an updated grid are never written (read back as 0)
};

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Dense row-major array of double-precision cells.
class Grid {
  public:
    Grid() = default;
    explicit Grid(std::span<const int> extents, Boundary boundary = Boundary::fixed_value);
    Grid(std::initializer_list<int> extents, Boundary boundary = Boundary::fixed_value);

    int dims() const { return dims_; }
    int extent(int d) const { return extents_[d]; }
    std::span<const int> extents() const { return {extents_.data(), static_cast<std::size_t>(dims_)}; }
    std::ptrdiff_t stride(int d) const { return strides_[d]; }
    std::size_t size() const { return cells_.size(); }
    Boundary boundary() const { return boundary_; }

    std::span<double> cells() { return cells_; }
    std::span<const double> cells() const { return cells_; }

    std::size_t index(const Coord& c) const {
        std::ptrdiff_t i = 0;
        for (int d = 0; d < dims_; ++d)
            i += c[d] * strides_[d];
        return static_cast<std::size_t>(i);
    }
    Coord coord(std::size_t index) const;

    double& operator[](const Coord& c) { return cells_[index(c)]; }
    double operator[](const Coord& c) const { return cells_[index(c)]; }

    /// True when `c` lies within `radius` cells of any face.
    bool on_frame(const Coord& c, int radius) const {
        for (int d = 0; d < dims_; ++d)
            if (c[d] < radius || c[d] >= extents_[d] - radius)
                return true;
        return false;
    }

    friend bool operator==(const Grid& a, const Grid& b);

  private:
    int dims_ = 0;
    Coord extents_{1, 1, 1};
    std::array<std::ptrdiff_t, kMaxDims> strides_{0, 0, 0};
    Boundary boundary_ = Boundary::fixed_value;
    std::vector<double> cells_;
};

/// splitmix64: small, fully specified generator so seeded inputs can be
/// reproduced bit-for-bit by other implementations.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi].
    int range(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::uint64_t state_;
};

/// Fills every cell with a value uniform in [-1, 1).
void fill_random(Grid& grid, std::uint64_t seed);

/// Index of the first differing cell, or -1 when the grids are bitwise equal.
std::ptrdiff_t first_difference(const Grid& a, const Grid& b);

} // namespace tblock
