#pragma once

// Unit-cell discretization, the reduced frequency set and the block-vector
// field containers shared by every other module.
//
// Layout of a field with d components on a grid of |N| nodes: component
// index outermost, then the spatial multi-index with the last axis fastest,
// i.e. value (c, m) lives at c*|N| + ((m_1*N_2 + m_2)*N_3 + m_3).

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace ffthom {

/// Small d-vector (d <= 3) without heap allocation.
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
/// Small d x d matrix (d <= 3) without heap allocation.
using Tensor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

using Complex = std::complex<double>;
using MultiIndex = std::array<int, 3>;

inline constexpr int kMaxDim = 3;

/// Allocator returning 64-byte aligned storage, suitable for SIMD FFT kernels.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Regular periodic grid on the unit cell prod_a (-Y_a, Y_a).
///
/// Node m sits at x_a = -Y_a + h_a * m_a, m_a = 0..N_a-1, so the -Y_a face is
/// included and the +Y_a face (its periodic image) is not.
class GridSpec {
 public:
  int dim() const { return dim_; }
  int size(int axis) const { return n_[axis]; }
  double half_width(int axis) const { return half_width_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }

  /// |N|, the number of nodes.
  std::size_t num_nodes() const { return num_nodes_; }
  /// d * |N|, the length of a block vector.
  std::size_t num_dofs() const { return num_nodes_ * static_cast<std::size_t>(dim_); }
  /// Measure of the unit cell, prod_a 2 Y_a.
  double cell_volume() const;

  MultiIndex multi_index(std::size_t node) const;
  std::size_t node_index(const MultiIndex& m) const;
  Vector node_coordinate(std::size_t node) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_width_ == b.half_width_;
  }

 private:
  friend GridSpec make_grid(int dim, const std::vector<int>& n,
                            const std::vector<double>& half_widths);

  int dim_ = 0;
  std::array<int, 3> n_{1, 1, 1};
  std::array<double, 3> half_width_{0.5, 0.5, 0.5};
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  std::size_t num_nodes_ = 0;
};

/// Builds a grid with h_a = 2 Y_a / N_a. Throws InvalidArgument for d outside
/// {2, 3}, wrong vector lengths, or non-positive N or Y.
GridSpec make_grid(int dim, const std::vector<int>& n,
                   const std::vector<double>& half_widths);

/// Convenience: n nodes per axis on the cell (-1/2, 1/2)^d.
GridSpec make_cube_grid(int dim, int n);

/// The reduced frequency set { k : -N_a/2 < k_a <= N_a/2 } and its indexing
/// by transform bins. Bin m_a holds k_a = m_a if m_a <= N_a/2, else m_a - N_a.
class FrequencyLattice {
 public:
  explicit FrequencyLattice(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  /// k_a of the per-axis bin index.
  int axis_frequency(int axis, int bin) const { return axis_k_[axis][bin]; }
  /// xi_a = k_a / Y_a of the per-axis bin index.
  double axis_scaled_frequency(int axis, int bin) const { return axis_xi_[axis][bin]; }
  /// True when N_a is even and the bin holds k_a = N_a/2.
  bool axis_is_nyquist(int axis, int bin) const;

  MultiIndex frequency(std::size_t bin) const;
  Vector scaled_frequency(std::size_t bin) const;
  /// Bin of an integer frequency; throws InvalidArgument if k is outside the set.
  std::size_t bin_of(const MultiIndex& k) const;
  /// True if some axis of the bin is a Nyquist frequency.
  bool is_nyquist(std::size_t bin) const;

 private:
  GridSpec grid_;
  std::array<std::vector<int>, 3> axis_k_;
  std::array<std::vector<double>, 3> axis_xi_;
};

FrequencyLattice frequency_lattice(const GridSpec& grid);

/// Real block vector e in R^{d x N}: one d-vector per node.
class RealField {
 public:
  /// Zero field.
  explicit RealField(GridSpec grid);
  /// Takes ownership of data; throws InvalidArgument on wrong length or
  /// non-finite entries.
  RealField(GridSpec grid, std::vector<double> data);

  /// The field equal to value at every node.
  static RealField constant(const GridSpec& grid, const Vector& value);

  const GridSpec& grid() const { return grid_; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> component(int c);
  std::span<const double> component(int c) const;

  double& operator()(int c, std::size_t node) { return data_[c * grid_.num_nodes() + node]; }
  double operator()(int c, std::size_t node) const { return data_[c * grid_.num_nodes() + node]; }

  Vector at(std::size_t node) const;
  void set(std::size_t node, const Vector& value);

  RealField& operator+=(const RealField& other);
  RealField& operator-=(const RealField& other);
  RealField& operator*=(double factor);
  /// this += factor * other
  RealField& add_scaled(double factor, const RealField& other);

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double factor, RealField a);

/// Complex Fourier coefficients, one d-vector per frequency bin, in the same
/// layout as RealField.
class SpectralField {
 public:
  explicit SpectralField(GridSpec grid);

  const GridSpec& grid() const { return grid_; }
  std::span<Complex> values() { return data_; }
  std::span<const Complex> values() const { return data_; }
  std::span<Complex> component(int c);
  std::span<const Complex> component(int c) const;

  Complex& operator()(int c, std::size_t bin) { return data_[c * grid_.num_nodes() + bin]; }
  Complex operator()(int c, std::size_t bin) const { return data_[c * grid_.num_nodes() + bin]; }

 private:
  GridSpec grid_;
  AlignedVector<Complex> data_;
};

/// Throws GridMismatch unless both grids are equal.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

/// Euclidean inner product sum_a sum_m u_a(m) v_a(m).
double inner_product(const RealField& u, const RealField& v);
double norm(const RealField& u);
/// Per-component arithmetic mean over the nodes.
Vector mean_value(const RealField& u);

}  // namespace ffthom
