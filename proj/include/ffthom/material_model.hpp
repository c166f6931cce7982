#pragma once

// Microstructure description: per-node conductivity tensors stored as a
// phase table plus a phase index per node, the analytic sphere template,
// voxel-file ingestion and the isotropic reference medium.

#include "ffthom/grid_field.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace ffthom {

/// Conductivity L(x): one symmetric positive-definite d x d tensor per node.
class ConductivityField {
 public:
  /// Phase-indexed field. phase_of_node[i] indexes phase_tensors;
  /// labels[p] is the user-facing id of phase p (defaults to p).
  ConductivityField(GridSpec grid, std::vector<std::uint32_t> phase_of_node,
                    std::vector<Tensor> phase_tensors,
                    std::vector<std::uint32_t> labels = {});

  /// One independent tensor per node; the result carries no phase labels.
  static ConductivityField from_nodal_tensors(GridSpec grid, std::vector<Tensor> tensors);

  /// Homogeneous field with the same tensor everywhere.
  static ConductivityField homogeneous(GridSpec grid, const Tensor& tensor);

  const GridSpec& grid() const { return grid_; }
  const Tensor& tensor(std::size_t node) const { return tensors_[phase_of_node_[node]]; }
  std::size_t num_phases() const { return tensors_.size(); }
  const std::vector<Tensor>& phase_tensors() const { return tensors_; }
  std::span<const std::uint32_t> phase_of_node() const { return phase_of_node_; }

  bool has_phase_labels() const { return labelled_; }
  /// User-facing phase id of a node; throws InvalidArgument without labels.
  std::uint32_t label(std::size_t node) const;

  /// Contrast rho, present when built from the two-phase template.
  std::optional<double> contrast() const { return contrast_; }
  /// Label counted by volume_fraction(L).
  std::optional<std::uint32_t> inclusion_label() const { return inclusion_label_; }

  /// Marks the inclusion phase and, for the two-phase template, the contrast.
  ConductivityField& with_template(std::optional<double> contrast, std::uint32_t inclusion_label);

 private:
  GridSpec grid_;
  std::vector<std::uint32_t> phase_of_node_;
  std::vector<Tensor> tensors_;
  std::vector<std::uint32_t> labels_;
  bool labelled_ = true;
  std::optional<double> contrast_;
  std::optional<std::uint32_t> inclusion_label_;
};

/// Isotropic reference medium L0 = lambda I.
struct ReferenceMedium {
  double lambda = 1.0;
  std::optional<double> omega;
};

/// Maps voxel phase ids to conductivity tensors.
using PhaseTable = std::map<std::uint32_t, Tensor>;

/// Throws InvalidArgument unless t is exactly symmetric and its leading
/// principal minors exceed 1e-12 * (max diagonal)^k.
void require_spd(const Tensor& t, const char* what);
bool is_spd(const Tensor& t);

/// The anisotropic matrix phase: unit diagonal, 0.2 off-diagonal.
Tensor default_matrix_tensor(int dim);

/// Radius of the centered ball (disk in 2D) filling 25% of the cell measure.
/// For the cube (-1/2, 1/2)^3 this is (3/(16 pi))^(1/3).
double quarter_fraction_radius(const GridSpec& grid);

/// Two-phase field: nodes with |x| < radius get the inclusion tensor (label
/// 1), all other nodes the matrix tensor (label 0). Ties go to the matrix.
ConductivityField build_sphere_microstructure(const GridSpec& grid, double radius,
                                              const Tensor& inclusion, const Tensor& matrix);

/// The benchmark template: inclusion rho I, anisotropic matrix, 25% ball.
ConductivityField build_template_microstructure(const GridSpec& grid, double contrast);

/// Reads the voxel format: line 1 d, line 2 N_1..N_d, then |N| integer phase
/// ids with the last axis fastest. half_widths defaults to 1/2 per axis.
ConductivityField load_voxel_phases(std::istream& in, const PhaseTable& table,
                                    std::vector<double> half_widths = {});

/// Writes the phase labels of a labelled field in the voxel format.
void write_voxel_phases(std::ostream& out, const ConductivityField& field);

/// lambda = 1 - omega + rho omega.
ReferenceMedium reference_lambda(double contrast, double omega);
ReferenceMedium reference_from_lambda(double lambda);

/// Nodewise (L(x) - shift I) e(x).
RealField apply_conductivity(const ConductivityField& conductivity, const RealField& e,
                             double shift = 0.0);

/// Fraction of nodes carrying the inclusion label.
double volume_fraction(const ConductivityField& conductivity);
double volume_fraction(const ConductivityField& conductivity, std::uint32_t label);

}  // namespace ffthom
