#include "ffthom/grid_field.hpp"

#include "ffthom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ffthom {

GridSpec make_grid(int dim, const std::vector<int>& n,
                   const std::vector<double>& half_widths) {
  if (dim != 2 && dim != 3) {
    throw InvalidArgument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (n.size() != static_cast<std::size_t>(dim) ||
      half_widths.size() != static_cast<std::size_t>(dim)) {
    throw InvalidArgument("grid needs exactly d node counts and d half-widths");
  }
  GridSpec grid;
  grid.dim_ = dim;
  grid.num_nodes_ = 1;
  for (int a = 0; a < dim; ++a) {
    if (n[a] < 1) {
      throw InvalidArgument("node count along axis " + std::to_string(a) + " must be >= 1");
    }
    if (!(half_widths[a] > 0.0) || !std::isfinite(half_widths[a])) {
      throw InvalidArgument("half-width along axis " + std::to_string(a) + " must be > 0");
    }
    grid.n_[a] = n[a];
    grid.half_width_[a] = half_widths[a];
    grid.spacing_[a] = 2.0 * half_widths[a] / n[a];
    grid.num_nodes_ *= static_cast<std::size_t>(n[a]);
  }
  return grid;
}

GridSpec make_cube_grid(int dim, int n) {
  return make_grid(dim, std::vector<int>(dim, n), std::vector<double>(dim, 0.5));
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= 2.0 * half_width_[a];
  return v;
}

MultiIndex GridSpec::multi_index(std::size_t node) const {
  MultiIndex m{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    m[a] = static_cast<int>(node % n_[a]);
    node /= n_[a];
  }
  return m;
}

std::size_t GridSpec::node_index(const MultiIndex& m) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) idx = idx * n_[a] + static_cast<std::size_t>(m[a]);
  return idx;
}

Vector GridSpec::node_coordinate(std::size_t node) const {
  const MultiIndex m = multi_index(node);
  Vector x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = -half_width_[a] + spacing_[a] * m[a];
  return x;
}

FrequencyLattice::FrequencyLattice(const GridSpec& grid) : grid_(grid) {
  for (int a = 0; a < grid.dim(); ++a) {
    const int n = grid.size(a);
    axis_k_[a].resize(n);
    axis_xi_[a].resize(n);
    for (int m = 0; m < n; ++m) {
      // 2m <= n  <=>  m <= n/2 without integer truncation
      const int k = (2 * m <= n) ? m : m - n;
      axis_k_[a][m] = k;
      axis_xi_[a][m] = k / grid.half_width(a);
    }
  }
}

bool FrequencyLattice::axis_is_nyquist(int axis, int bin) const {
  const int n = grid_.size(axis);
  return n % 2 == 0 && 2 * axis_k_[axis][bin] == n;
}

MultiIndex FrequencyLattice::frequency(std::size_t bin) const {
  const MultiIndex m = grid_.multi_index(bin);
  MultiIndex k{0, 0, 0};
  for (int a = 0; a < grid_.dim(); ++a) k[a] = axis_k_[a][m[a]];
  return k;
}

Vector FrequencyLattice::scaled_frequency(std::size_t bin) const {
  const MultiIndex m = grid_.multi_index(bin);
  Vector xi(grid_.dim());
  for (int a = 0; a < grid_.dim(); ++a) xi[a] = axis_xi_[a][m[a]];
  return xi;
}

std::size_t FrequencyLattice::bin_of(const MultiIndex& k) const {
  MultiIndex m{0, 0, 0};
  for (int a = 0; a < grid_.dim(); ++a) {
    const int n = grid_.size(a);
    if (!(-n < 2 * k[a] && 2 * k[a] <= n)) {
      throw InvalidArgument("frequency component " + std::to_string(k[a]) +
                            " outside the reduced set on axis " + std::to_string(a));
    }
    m[a] = k[a] >= 0 ? k[a] : k[a] + n;
  }
  return grid_.node_index(m);
}

bool FrequencyLattice::is_nyquist(std::size_t bin) const {
  const MultiIndex m = grid_.multi_index(bin);
  for (int a = 0; a < grid_.dim(); ++a) {
    if (axis_is_nyquist(a, m[a])) return true;
  }
  return false;
}

FrequencyLattice frequency_lattice(const GridSpec& grid) { return FrequencyLattice(grid); }

// ---------------------------------------------------------------------------

RealField::RealField(GridSpec grid) : grid_(grid), data_(grid.num_dofs(), 0.0) {}

RealField::RealField(GridSpec grid, std::vector<double> data)
    : grid_(grid), data_(std::move(data)) {
  if (data_.size() != grid_.num_dofs()) {
    throw InvalidArgument("field data has " + std::to_string(data_.size()) +
                          " entries, grid needs " + std::to_string(grid_.num_dofs()));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("field data contains non-finite entries");
  }
}

RealField RealField::constant(const GridSpec& grid, const Vector& value) {
  if (value.size() != grid.dim()) {
    throw InvalidArgument("constant value must have d components");
  }
  RealField f(grid);
  for (int c = 0; c < grid.dim(); ++c) {
    auto comp = f.component(c);
    std::fill(comp.begin(), comp.end(), value[c]);
  }
  return f;
}

std::span<double> RealField::component(int c) {
  return std::span<double>(data_).subspan(c * grid_.num_nodes(), grid_.num_nodes());
}

std::span<const double> RealField::component(int c) const {
  return std::span<const double>(data_).subspan(c * grid_.num_nodes(), grid_.num_nodes());
}

Vector RealField::at(std::size_t node) const {
  Vector v(grid_.dim());
  for (int c = 0; c < grid_.dim(); ++c) v[c] = (*this)(c, node);
  return v;
}

void RealField::set(std::size_t node, const Vector& value) {
  for (int c = 0; c < grid_.dim(); ++c) (*this)(c, node) = value[c];
}

RealField& RealField::operator+=(const RealField& other) {
  require_same_grid(grid_, other.grid_, "RealField +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

RealField& RealField::operator-=(const RealField& other) {
  require_same_grid(grid_, other.grid_, "RealField -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

RealField& RealField::operator*=(double factor) {
  for (double& v : data_) v *= factor;
  return *this;
}

RealField& RealField::add_scaled(double factor, const RealField& other) {
  require_same_grid(grid_, other.grid_, "RealField::add_scaled");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
  return *this;
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double factor, RealField a) { return a *= factor; }

SpectralField::SpectralField(GridSpec grid) : grid_(grid), data_(grid.num_dofs()) {}

std::span<Complex> SpectralField::component(int c) {
  return std::span<Complex>(data_).subspan(c * grid_.num_nodes(), grid_.num_nodes());
}

std::span<const Complex> SpectralField::component(int c) const {
  return std::span<const Complex>(data_).subspan(c * grid_.num_nodes(), grid_.num_nodes());
}

// ---------------------------------------------------------------------------

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) throw GridMismatch(std::string(where) + ": operands live on different grids");
}

double inner_product(const RealField& u, const RealField& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product");
  const auto a = u.values();
  const auto b = v.values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const RealField& u) { return std::sqrt(inner_product(u, u)); }

Vector mean_value(const RealField& u) {
  const int d = u.grid().dim();
  Vector mean(d);
  for (int c = 0; c < d; ++c) {
    double s = 0.0;
    for (double v : u.component(c)) s += v;
    mean[c] = s / static_cast<double>(u.grid().num_nodes());
  }
  return mean;
}

}  // namespace ffthom
