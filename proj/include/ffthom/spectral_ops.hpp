#pragma once

// Discrete Fourier transform contract, the periodic Green operator of the
// isotropic reference medium, the projection onto compatible fields and the
// matrix-free Lippmann-Schwinger operator B = F^-1 Gamma F (L - lambda I).
//
// Transform convention: forward scaling 1/|N|, unscaled inverse,
//   e_hat(k) = |N|^-1 sum_m e(x_m) exp(-2 pi i sum_a k_a m_a / N_a).
// Spectral coefficients are stored by transform bin; FrequencyLattice maps
// bins to frequencies of the reduced set.

#include "ffthom/grid_field.hpp"
#include "ffthom/material_model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace ffthom {

struct GreenOptions {
  /// Negates the block of the lowest axis-1 frequency pair. Only used to
  /// check that the verification harness catches a broken operator.
  bool inject_sign_fault = false;
};

/// Gamma_hat(k) = (xi x xi) / (lambda xi.xi) with xi_a = k_a / Y_a, zero at
/// k = 0. Blocks of bins holding a Nyquist frequency k_a = N_a/2 are zero as
/// well: their paired bin is the bin itself with a different xi, so keeping
/// them would break conjugate symmetry and the projection property.
class GreenOperator {
 public:
  GreenOperator(const GridSpec& grid, double lambda, GreenOptions options = {});

  const GridSpec& grid() const { return lattice_.grid(); }
  const FrequencyLattice& lattice() const { return lattice_; }
  double lambda() const { return lambda_; }

  /// The d x d block of a transform bin.
  Tensor block(std::size_t bin) const;
  bool is_zero_block(std::size_t bin) const;

  /// Same grid and options, different reference conductivity.
  GreenOperator with_lambda(double lambda) const;

  /// field(k) <- Gamma_hat(k) field(k) for every bin.
  void apply_inplace(SpectralField& field) const;

 private:
  FrequencyLattice lattice_;
  double lambda_;
  GreenOptions options_;
  std::vector<std::size_t> faulty_bins_;
};

SpectralField forward_transform(const RealField& e);

/// Unscaled inverse transform. Throws NonNegligibleImaginaryPart when the
/// imaginary part exceeds 1e-10 times the norm of the result.
RealField inverse_transform(const SpectralField& e_hat);

SpectralField green_apply(const SpectralField& j_hat, const GreenOperator& green);

/// P_E x = lambda F^-1 Gamma_hat F x, the orthogonal projection onto the
/// compatible zero-mean fields E.
RealField project_E(const RealField& x, const GreenOperator& green);

RealField apply_B(const RealField& e, const ConductivityField& conductivity,
                  const GreenOperator& green);

/// (I + B) e
RealField apply_system(const RealField& e, const ConductivityField& conductivity,
                       const GreenOperator& green);

/// (I + B)^T e = e + (L - lambda I) F^-1 Gamma_hat F e. Used by BiCG.
RealField apply_system_transpose(const RealField& e, const ConductivityField& conductivity,
                                 const GreenOperator& green);

/// (I + B) assembled in the nodal basis through the matrix-free path.
struct DenseSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;  // empty unless a load was supplied
};

inline constexpr std::size_t kDenseSizeLimit = 2048;

/// Column j is apply_system of unit vector j. Throws SizeLimitExceeded when
/// d |N| > kDenseSizeLimit.
DenseSystem assemble_dense(const ConductivityField& conductivity, const GreenOperator& green,
                           const std::optional<Vector>& load = std::nullopt);

Eigen::VectorXd flatten(const RealField& e);
RealField unflatten(const GridSpec& grid, const Eigen::VectorXd& values);

}  // namespace ffthom
