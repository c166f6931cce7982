#pragma once

// Seeded random fields and microstructures for property checks.

#include "ffthom/grid_field.hpp"
#include "ffthom/material_model.hpp"

#include <random>

namespace ffthom {

using Rng = std::mt19937_64;

/// Entries uniform in [-1, 1].
RealField random_field(const GridSpec& grid, Rng& rng);

/// Exactly symmetric tensor with eigenvalues in [lo, hi].
Tensor random_spd_tensor(int dim, double lo, double hi, Rng& rng);

/// Independent random SPD tensor per node, eigenvalues in [1, contrast].
ConductivityField random_microstructure(const GridSpec& grid, double contrast, Rng& rng);

}  // namespace ffthom
