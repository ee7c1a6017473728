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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tblock/grid.hpp"

namespace tblock {

struct Tap {
    Coord offset{0, 0, 0};
    double coefficient = 0.0;
};

/// Tap pattern plus the per-cell cost columns used by the cost model.
struct StencilShape {
    std::string name;
    int dims = 0;
    int radius = 0;
    std::vector<Tap> taps;
    double flops_per_cell = 0.0;       ///< a_cmp
    double gm_accesses_per_cell = 2.0; ///< a_gm, one load plus one store
    int sm_accesses_no_rst = 0;
    double sm_accesses_with_rst = 0.0;
    std::vector<int> default_domain;
    /// Temporal depth the reference GPU implementation used, 0 when unknown.
    int reference_depth = 0;
};

/// Builds a shape from raw taps, deriving radius and checking invariants.
/// Cost columns other than the on-chip ones are left for the caller.
StencilShape make_stencil(std::string name, int dims, std::vector<Tap> taps);

/// Replaces tap coefficients in catalog order.
StencilShape with_coefficients(StencilShape shape, std::span<const double> coefficients);

/// Throws CatalogError when an invariant of the shape does not hold.
void check_shape(const StencilShape& shape);

std::span<const std::string_view> catalog_names();
StencilShape make_benchmark(std::string_view name);

/// Catalog as a JSON document, one record per stencil.
std::string export_catalog_json();

/// On-chip access classes under the redundant-register-streaming layout.
/// Dimension 0 streams through a per-thread register window, the middle
/// dimension of a 3D stencil is register-blocked in strips of `kRstIlp`
/// cells per thread, and the contiguous dimension is served from shared
/// memory.
inline constexpr int kRstIlp = 4;

struct RstCost {
    int shared_taps = 0;   ///< taps read from shared memory per cell
    int register_taps = 0; ///< taps served from registers per cell
    int strip_radius = 0;  ///< halo rows a strip loads once from shared memory
    double per_cell() const {
        return shared_taps + 2.0 + 2.0 * strip_radius / kRstIlp;
    }
};

RstCost rst_cost(const StencilShape& shape);

/// True when every tap lies on a coordinate axis.
bool is_star(const StencilShape& shape);

} // namespace tblock
