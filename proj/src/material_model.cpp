#include "ffthom/material_model.hpp"

#include "ffthom/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace ffthom {

ConductivityField::ConductivityField(GridSpec grid, std::vector<std::uint32_t> phase_of_node,
                                     std::vector<Tensor> phase_tensors,
                                     std::vector<std::uint32_t> labels)
    : grid_(grid),
      phase_of_node_(std::move(phase_of_node)),
      tensors_(std::move(phase_tensors)),
      labels_(std::move(labels)) {
  if (phase_of_node_.size() != grid_.num_nodes()) {
    throw InvalidArgument("conductivity field needs one phase index per node");
  }
  if (tensors_.empty()) throw InvalidArgument("conductivity field needs at least one phase");
  for (const Tensor& t : tensors_) {
    if (t.rows() != grid_.dim() || t.cols() != grid_.dim()) {
      throw InvalidArgument("phase tensor must be d x d");
    }
    require_spd(t, "phase tensor");
  }
  for (std::uint32_t p : phase_of_node_) {
    if (p >= tensors_.size()) throw InvalidArgument("phase index without tensor");
  }
  if (labels_.empty()) {
    labels_.resize(tensors_.size());
    for (std::size_t p = 0; p < labels_.size(); ++p) labels_[p] = static_cast<std::uint32_t>(p);
  } else if (labels_.size() != tensors_.size()) {
    throw InvalidArgument("one label per phase required");
  }
}

ConductivityField ConductivityField::from_nodal_tensors(GridSpec grid,
                                                        std::vector<Tensor> tensors) {
  std::vector<std::uint32_t> idx(tensors.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  ConductivityField field(grid, std::move(idx), std::move(tensors));
  field.labelled_ = false;
  return field;
}

ConductivityField ConductivityField::homogeneous(GridSpec grid, const Tensor& tensor) {
  return ConductivityField(grid, std::vector<std::uint32_t>(grid.num_nodes(), 0), {tensor});
}

std::uint32_t ConductivityField::label(std::size_t node) const {
  if (!labelled_) throw InvalidArgument("conductivity field carries no phase labels");
  return labels_[phase_of_node_[node]];
}

ConductivityField& ConductivityField::with_template(std::optional<double> contrast,
                                                    std::uint32_t inclusion_label) {
  contrast_ = contrast;
  inclusion_label_ = inclusion_label;
  return *this;
}

// ---------------------------------------------------------------------------

bool is_spd(const Tensor& t) {
  const auto n = t.rows();
  if (n != t.cols() || n < 1 || n > kMaxDim) return false;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (t(i, j) != t(j, i)) return false;
    }
  }
  if (!t.allFinite()) return false;
  const double scale = t.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return false;
  double scale_k = 1.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    scale_k *= scale;
    if (!(t.topLeftCorner(k, k).determinant() > 1e-12 * scale_k)) return false;
  }
  return true;
}

void require_spd(const Tensor& t, const char* what) {
  if (!is_spd(t)) {
    throw InvalidArgument(std::string(what) + " is not symmetric positive definite");
  }
}

Tensor default_matrix_tensor(int dim) {
  Tensor t = Tensor::Constant(dim, dim, 0.2);
  t.diagonal().setOnes();
  return t;
}

double quarter_fraction_radius(const GridSpec& grid) {
  const double target = 0.25 * grid.cell_volume();
  if (grid.dim() == 2) return std::sqrt(target / std::numbers::pi);
  return std::cbrt(3.0 * target / (4.0 * std::numbers::pi));
}

ConductivityField build_sphere_microstructure(const GridSpec& grid, double radius,
                                              const Tensor& inclusion, const Tensor& matrix) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("inclusion radius must be finite and non-negative");
  }
  require_spd(inclusion, "inclusion tensor");
  require_spd(matrix, "matrix tensor");
  const double r2 = radius * radius;
  std::vector<std::uint32_t> phase(grid.num_nodes(), 0);
  for (std::size_t i = 0; i < phase.size(); ++i) {
    if (grid.node_coordinate(i).squaredNorm() < r2) phase[i] = 1;
  }
  ConductivityField field(grid, std::move(phase), {matrix, inclusion});
  field.with_template(std::nullopt, 1);
  return field;
}

ConductivityField build_template_microstructure(const GridSpec& grid, double contrast) {
  if (!(contrast > 0.0)) throw InvalidArgument("contrast must be positive");
  const Tensor inclusion = contrast * Tensor::Identity(grid.dim(), grid.dim());
  ConductivityField field = build_sphere_microstructure(
      grid, quarter_fraction_radius(grid), inclusion, default_matrix_tensor(grid.dim()));
  field.with_template(contrast, 1);
  return field;
}

ConductivityField load_voxel_phases(std::istream& in, const PhaseTable& table,
                                    std::vector<double> half_widths) {
  int dim = 0;
  if (!(in >> dim)) throw FormatError("voxel file: missing dimension header");
  if (dim != 2 && dim != 3) throw FormatError("voxel file: dimension must be 2 or 3");
  std::vector<int> n(dim);
  for (int a = 0; a < dim; ++a) {
    if (!(in >> n[a]) || n[a] < 1) throw FormatError("voxel file: malformed node counts");
  }
  if (half_widths.empty()) half_widths.assign(dim, 0.5);
  const GridSpec grid = make_grid(dim, n, half_widths);

  // Table ids become dense phase indices in ascending id order.
  std::map<std::uint32_t, std::uint32_t> dense;
  std::vector<Tensor> tensors;
  std::vector<std::uint32_t> labels;
  for (const auto& [id, t] : table) {
    dense[id] = static_cast<std::uint32_t>(tensors.size());
    tensors.push_back(t);
    labels.push_back(id);
  }

  std::vector<std::uint32_t> phase(grid.num_nodes());
  long long id = 0;
  for (std::size_t i = 0; i < phase.size(); ++i) {
    if (!(in >> id)) {
      throw FormatError("voxel file: expected " + std::to_string(phase.size()) +
                        " phase ids, found " + std::to_string(i));
    }
    if (id < 0) throw FormatError("voxel file: negative phase id");
    const auto it = dense.find(static_cast<std::uint32_t>(id));
    if (it == dense.end()) {
      throw FormatError("voxel file: phase id " + std::to_string(id) + " has no table entry");
    }
    phase[i] = it->second;
  }
  std::string extra;
  if (in >> extra) throw FormatError("voxel file: more phase ids than nodes");
  return ConductivityField(grid, std::move(phase), std::move(tensors), std::move(labels));
}

void write_voxel_phases(std::ostream& out, const ConductivityField& field) {
  const GridSpec& grid = field.grid();
  out << grid.dim() << '\n';
  for (int a = 0; a < grid.dim(); ++a) out << grid.size(a) << (a + 1 < grid.dim() ? ' ' : '\n');
  const int row = grid.size(grid.dim() - 1);
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    out << field.label(i) << ((i + 1) % row == 0 ? '\n' : ' ');
  }
}

ReferenceMedium reference_lambda(double contrast, double omega) {
  if (!(contrast > 0.0)) throw InvalidArgument("contrast must be positive");
  if (!(omega >= 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in [0, 1]");
  return ReferenceMedium{1.0 - omega + contrast * omega, omega};
}

ReferenceMedium reference_from_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("reference conductivity must be positive");
  }
  return ReferenceMedium{lambda, std::nullopt};
}

RealField apply_conductivity(const ConductivityField& conductivity, const RealField& e,
                             double shift) {
  require_same_grid(conductivity.grid(), e.grid(), "apply_conductivity");
  const GridSpec& grid = e.grid();
  const int d = grid.dim();
  const std::size_t nn = grid.num_nodes();
  RealField out(grid);
  const auto in = e.values();
  auto res = out.values();
  for (std::size_t i = 0; i < nn; ++i) {
    const Tensor& t = conductivity.tensor(i);
    for (int r = 0; r < d; ++r) {
      double s = -shift * in[r * nn + i];
      for (int c = 0; c < d; ++c) s += t(r, c) * in[c * nn + i];
      res[r * nn + i] = s;
    }
  }
  return out;
}

double volume_fraction(const ConductivityField& conductivity) {
  if (!conductivity.inclusion_label()) {
    throw InvalidArgument("conductivity field has no designated inclusion phase");
  }
  return volume_fraction(conductivity, *conductivity.inclusion_label());
}

double volume_fraction(const ConductivityField& conductivity, std::uint32_t label) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < conductivity.grid().num_nodes(); ++i) {
    if (conductivity.label(i) == label) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(conductivity.grid().num_nodes());
}

}  // namespace ffthom
