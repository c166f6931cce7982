#pragma once

// Run configuration: a single JSON document, see README.md for the schema.
// Validation errors are FormatError with the offending field path, e.g.
// "config.reference: give exactly one of 'omega' or 'lambda'".

#include "ffthom/grid_field.hpp"
#include "ffthom/material_model.hpp"
#include "ffthom/solvers.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ffthom {

struct GridConfig {
  int dim = 3;
  std::vector<int> n{16, 16, 16};
  std::vector<double> half_widths{0.5, 0.5, 0.5};
};

enum class MicrostructureKind { sphere, voxel };

struct MicrostructureConfig {
  MicrostructureKind kind = MicrostructureKind::sphere;
  std::optional<double> contrast = 10.0;
  std::optional<Tensor> matrix;     // default: anisotropic 1 / 0.2 tensor
  std::optional<Tensor> inclusion;  // default: contrast * I
  std::optional<double> radius;     // default: 25% volume fraction
  std::string voxel_path;
  PhaseTable phases;
};

struct ReferenceConfig {
  std::optional<double> omega = 0.5;
  std::optional<double> lambda;
};

struct SolverSettings {
  Method method = Method::cg;
  double tol = 1e-6;
  int max_iter = 10000;
  bool record_iterates = false;
};

struct OutputConfig {
  std::string directory = "out";
  bool dump_field = false;
  bool effective_tensor = false;
};

struct SweepConfig {
  std::vector<double> omegas{0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<double> contrasts{10.0};
};

struct ScalingConfig {
  std::vector<int> n{8, 16, 32};
  int repeats = 1;
};

struct RunConfig {
  GridConfig grid;
  MicrostructureConfig microstructure;
  ReferenceConfig reference;
  Vector load = Vector::Unit(3, 0);
  SolverSettings solver;
  OutputConfig output;
  SweepConfig sweep;
  ScalingConfig scaling;
  std::uint64_t seed = 0;
  bool allow_large = false;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Largest per-axis node count accepted in 3D without allow_large.
inline constexpr int kDeskScaleLimit = 96;

/// Parses and validates; throws FormatError carrying the field path.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a file; a relative microstructure.path is taken relative to it.
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

/// Re-runs the cross-field checks (after CLI overrides, for instance).
void validate_config(const RunConfig& config);

SolverConfig solver_config(const RunConfig& config);

}  // namespace ffthom
