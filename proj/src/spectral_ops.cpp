#include "ffthom/spectral_ops.hpp"

#include "ffthom/errors.hpp"
#include "fourier.hpp"

#include <cmath>
#include <string>

namespace ffthom {

GreenOperator::GreenOperator(const GridSpec& grid, double lambda, GreenOptions options)
    : lattice_(grid), lambda_(lambda), options_(options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("reference conductivity lambda must be positive");
  }
  if (options_.inject_sign_fault) {
    MultiIndex k{0, 0, 0};
    k[0] = 1;
    if (2 * k[0] < grid.size(0)) {
      faulty_bins_.push_back(lattice_.bin_of(k));
      k[0] = -1;
      faulty_bins_.push_back(lattice_.bin_of(k));
    }
  }
}

bool GreenOperator::is_zero_block(std::size_t bin) const {
  if (bin == 0) return true;
  return lattice_.is_nyquist(bin);
}

Tensor GreenOperator::block(std::size_t bin) const {
  const int d = grid().dim();
  Tensor g = Tensor::Zero(d, d);
  if (is_zero_block(bin)) return g;
  const Vector xi = lattice_.scaled_frequency(bin);
  g = (xi * xi.transpose()) / (lambda_ * xi.squaredNorm());
  for (std::size_t b : faulty_bins_) {
    if (b == bin) g = -g;
  }
  return g;
}

GreenOperator GreenOperator::with_lambda(double lambda) const {
  return GreenOperator(grid(), lambda, options_);
}

void GreenOperator::apply_inplace(SpectralField& field) const {
  require_same_grid(grid(), field.grid(), "GreenOperator::apply_inplace");
  const GridSpec& g = grid();
  const int d = g.dim();
  const std::size_t nn = g.num_nodes();

  // Trailing axes of a 2D grid are padded with a single zero frequency so one
  // loop nest serves both dimensions; the flat bin index is unchanged.
  std::array<int, 3> n{1, 1, 1};
  for (int a = 0; a < d; ++a) n[a] = g.size(a);
  auto xi = [&](int a, int m) { return a < d ? lattice_.axis_scaled_frequency(a, m) : 0.0; };
  auto nyq = [&](int a, int m) { return a < d && lattice_.axis_is_nyquist(a, m); };

  auto values = field.values();
  const double inv_lambda = 1.0 / lambda_;
  std::size_t bin = 0;
  for (int m0 = 0; m0 < n[0]; ++m0) {
    const double x0 = xi(0, m0);
    const bool q0 = nyq(0, m0);
    for (int m1 = 0; m1 < n[1]; ++m1) {
      const double x1 = xi(1, m1);
      const bool q1 = q0 || nyq(1, m1);
      for (int m2 = 0; m2 < n[2]; ++m2, ++bin) {
        const double x2 = xi(2, m2);
        const double xx = x0 * x0 + x1 * x1 + x2 * x2;
        if (bin == 0 || q1 || nyq(2, m2) || xx == 0.0) {
          for (int c = 0; c < d; ++c) values[c * nn + bin] = 0.0;
          continue;
        }
        const double dir[3] = {x0, x1, x2};
        Complex s = 0.0;
        for (int c = 0; c < d; ++c) s += dir[c] * values[c * nn + bin];
        s *= inv_lambda / xx;
        for (int c = 0; c < d; ++c) values[c * nn + bin] = dir[c] * s;
      }
    }
  }
  for (std::size_t b : faulty_bins_) {
    for (int c = 0; c < d; ++c) values[c * nn + b] = -values[c * nn + b];
  }
}

// ---------------------------------------------------------------------------

namespace {

SpectralField forward_unscaled(const RealField& e) {
  SpectralField out(e.grid());
  auto dst = out.values();
  const auto src = e.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
  detail::fft_forward_inplace(e.grid(), dst);
  return out;
}

/// Real part of the unscaled inverse transform; consumes its argument.
RealField backward_real(SpectralField&& spectrum) {
  const GridSpec grid = spectrum.grid();
  auto data = spectrum.values();
  detail::fft_backward_inplace(grid, data);
  double re2 = 0.0;
  double im2 = 0.0;
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = data[i].real();
    re2 += data[i].real() * data[i].real();
    im2 += data[i].imag() * data[i].imag();
  }
  if (std::sqrt(im2) > 1e-10 * std::sqrt(re2 + im2)) {
    throw NonNegligibleImaginaryPart("inverse transform: imaginary part " +
                                     std::to_string(std::sqrt(im2)) + " vs field norm " +
                                     std::to_string(std::sqrt(re2 + im2)));
  }
  return RealField(grid, std::move(out));
}

}  // namespace

SpectralField forward_transform(const RealField& e) {
  SpectralField out = forward_unscaled(e);
  const double scale = 1.0 / static_cast<double>(e.grid().num_nodes());
  for (Complex& v : out.values()) v *= scale;
  return out;
}

RealField inverse_transform(const SpectralField& e_hat) {
  SpectralField copy = e_hat;
  return backward_real(std::move(copy));
}

SpectralField green_apply(const SpectralField& j_hat, const GreenOperator& green) {
  SpectralField out = j_hat;
  green.apply_inplace(out);
  return out;
}

namespace {

// F^-1 Gamma_hat F x with the 1/|N| scaling folded into one pass.
RealField convolve_green(const RealField& x, const GreenOperator& green) {
  require_same_grid(x.grid(), green.grid(), "Green convolution");
  SpectralField spectrum = forward_unscaled(x);
  green.apply_inplace(spectrum);
  const double scale = 1.0 / static_cast<double>(x.grid().num_nodes());
  for (Complex& v : spectrum.values()) v *= scale;
  return backward_real(std::move(spectrum));
}

}  // namespace

RealField project_E(const RealField& x, const GreenOperator& green) {
  RealField out = convolve_green(x, green);
  out *= green.lambda();
  return out;
}

RealField apply_B(const RealField& e, const ConductivityField& conductivity,
                  const GreenOperator& green) {
  require_same_grid(conductivity.grid(), green.grid(), "apply_B");
  return convolve_green(apply_conductivity(conductivity, e, green.lambda()), green);
}

RealField apply_system(const RealField& e, const ConductivityField& conductivity,
                       const GreenOperator& green) {
  RealField out = apply_B(e, conductivity, green);
  out += e;
  return out;
}

RealField apply_system_transpose(const RealField& e, const ConductivityField& conductivity,
                                 const GreenOperator& green) {
  require_same_grid(conductivity.grid(), green.grid(), "apply_system_transpose");
  RealField out = apply_conductivity(conductivity, convolve_green(e, green), green.lambda());
  out += e;
  return out;
}

DenseSystem assemble_dense(const ConductivityField& conductivity, const GreenOperator& green,
                           const std::optional<Vector>& load) {
  const GridSpec& grid = conductivity.grid();
  const std::size_t n = grid.num_dofs();
  if (n > kDenseSizeLimit) {
    throw SizeLimitExceeded("dense assembly of " + std::to_string(n) +
                            " unknowns exceeds the limit of " +
                            std::to_string(kDenseSizeLimit));
  }
  DenseSystem sys;
  sys.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  RealField unit(grid);
  for (std::size_t j = 0; j < n; ++j) {
    unit.values()[j] = 1.0;
    sys.matrix.col(static_cast<Eigen::Index>(j)) =
        flatten(apply_system(unit, conductivity, green));
    unit.values()[j] = 0.0;
  }
  if (load) sys.rhs = flatten(RealField::constant(grid, *load));
  return sys;
}

Eigen::VectorXd flatten(const RealField& e) {
  const auto v = e.values();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

RealField unflatten(const GridSpec& grid, const Eigen::VectorXd& values) {
  return RealField(grid, std::vector<double>(values.data(), values.data() + values.size()));
}

}  // namespace ffthom
