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

#include "tblock/grid.hpp"
#include "tblock/stencil.hpp"

namespace tblock {

/// One Jacobi update of the whole grid. Interior cells (at least `radius`
/// away from every face) receive the tap sum in catalog order; boundary
/// cells follow the grid's boundary policy. The input is not modified.
Grid reference_step(const Grid& grid, const StencilShape& stencil);

/// `steps` consecutive applications of reference_step.
Grid reference_run(const Grid& grid, const StencilShape& stencil, int steps);

} // namespace tblock
