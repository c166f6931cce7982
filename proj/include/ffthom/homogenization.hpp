#pragma once

#include "ffthom/material_model.hpp"
#include "ffthom/solvers.hpp"
#include "ffthom/spectral_ops.hpp"

#include <vector>

namespace ffthom {

struct Bounds {
  Tensor reuss;  // <L^-1>^-1
  Tensor voigt;  // <L>
};

struct ColumnSolve {
  int iterations = 0;
  double final_residual = 0.0;
  double wall_time = 0.0;
  bool converged = false;
};

struct EffectiveTensor {
  Tensor effective;
  Bounds bounds;
  std::vector<ColumnSolve> columns;
};

/// <L e>, the mean current carried by the field e.
Vector average_current(const ConductivityField& conductivity, const RealField& e);

/// Column b of the result is <L e> for the solve with unit load e0 = unit_b.
/// Throws NotConverged if any column solve misses its tolerance.
EffectiveTensor effective_tensor(const ConductivityField& conductivity,
                                 const GreenOperator& green, const SolverConfig& config);

Bounds voigt_reuss_bounds(const ConductivityField& conductivity);

/// min over probes x of x.(upper - value).x and x.(value - lower).x, each
/// divided by |x|^2. Non-negative when lower <= value <= upper on the probes.
double bound_slack(const Tensor& value, const Bounds& bounds,
                   const std::vector<Vector>& probes);

}  // namespace ffthom
