#pragma once

// Experiment drivers behind the CLI subcommands and their file outputs.

#include "ffthom/config.hpp"
#include "ffthom/homogenization.hpp"
#include "ffthom/solvers.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ffthom {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitVerificationFailure = 4;

std::string code_version();

/// Everything a solve needs, built from a configuration.
struct Problem {
  ConductivityField conductivity;
  GreenOperator green;
  ReferenceMedium reference;
  Vector load;
};

/// Throws FormatError for configuration problems that only show up while
/// building (unreadable voxel file, grid mismatch).
Problem build_problem(const RunConfig& config);

/// Rows of named CSV columns plus provenance metadata.
class ExperimentRecord {
 public:
  explicit ExperimentRecord(std::vector<std::string> columns);

  /// Throws InvalidArgument if the row length differs from the column count.
  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::vector<std::string> column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;

  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }

  void write_csv(std::ostream& out) const;
  /// Writes <stem>.csv and <stem>.meta.json into the directory.
  void save(const std::filesystem::path& directory, const std::string& stem) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

/// Stable 64-bit FNV-1a hash of the serialized configuration, as hex.
std::string config_hash(const RunConfig& config);

struct SolveOutcome {
  SolveResult result;
  std::optional<EffectiveTensor> effective;
  ReferenceMedium reference;
  int exit_code = kExitOk;
};

/// Solves the configured problem and writes result.json (and field.txt when
/// output.dump_field is set) into output.directory.
SolveOutcome run_solve(const RunConfig& config);

/// One row per (rho, omega): CG and FFTH iteration counts and their ratio.
/// Solver failures are recorded in the status column, never thrown.
ExperimentRecord run_sweep_omega(const RunConfig& config);

/// One row per n: unknowns, iterations, wall times (best of
/// scaling.repeats) and per-iteration times of CG and FFTH.
ExperimentRecord run_scaling(const RunConfig& config);

nlohmann::json result_json(const SolveOutcome& outcome, const RunConfig& config);

/// Header "d", "N_1 .. N_d", then d |N| values, component-outermost.
void write_field(std::ostream& out, const RealField& field);
RealField read_field(std::istream& in, const std::vector<double>& half_widths = {});

}  // namespace ffthom
