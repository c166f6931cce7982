#pragma once

// Iterative solvers for (I + B) e = e0:
//  - ffth: the fixed-point recurrence e_(m+1) = e0 - B e_(m), i.e. partial
//    sums of the Neumann series of (I + B)^-1 applied to e0;
//  - cg:   Conjugate Gradients applied verbatim to the non-symmetric
//    operator, started in e0 + E;
//  - bicg: textbook BiConjugate Gradients, shadow residual = residual.
//
// All three stop on the same relative residual ||e0 - (I+B) e|| / ||e0||.

#include "ffthom/grid_field.hpp"
#include "ffthom/material_model.hpp"
#include "ffthom/spectral_ops.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ffthom {

enum class Method { ffth, cg, bicg };

std::string to_string(Method method);
/// Throws InvalidArgument for unknown names.
Method parse_method(const std::string& name);

struct SolverConfig {
  Method method = Method::cg;
  double tol = 1e-6;
  int max_iter = 10000;
  /// Keep every iterate (and, for the Krylov methods, every residual vector).
  bool record_iterates = false;
  /// e~ in the start vector e0 + e~ of the Krylov methods; must lie in E.
  std::optional<RealField> initial_perturbation;
};

struct SolveResult {
  RealField solution;
  int iterations = 0;
  /// ||r_(m)|| / ||e0|| for m = 0..iterations.
  std::vector<double> residual_history;
  std::vector<RealField> iterate_history;
  std::vector<RealField> residual_vectors;
  double wall_time = 0.0;
  bool converged = false;
};

SolveResult solve_ffth(const ConductivityField& conductivity, const GreenOperator& green,
                       const Vector& load, const SolverConfig& config);

/// Throws InitialVectorNotInE and BreakdownDetected.
SolveResult solve_cg(const ConductivityField& conductivity, const GreenOperator& green,
                     const Vector& load, const SolverConfig& config);

SolveResult solve_bicg(const ConductivityField& conductivity, const GreenOperator& green,
                       const Vector& load, const SolverConfig& config);

/// Dispatches on config.method.
SolveResult solve(const ConductivityField& conductivity, const GreenOperator& green,
                  const Vector& load, const SolverConfig& config);

/// r = e0 - (I + B) e
RealField residual(const ConductivityField& conductivity, const GreenOperator& green,
                   const Vector& load, const RealField& e);

/// 1/2 <L e_bar, e_bar> + <L e0, e_bar> with e_bar = e - e0: the functional
/// CG minimizes over E.
double energy_functional(const ConductivityField& conductivity, const Vector& load,
                         const RealField& e);

}  // namespace ffthom
