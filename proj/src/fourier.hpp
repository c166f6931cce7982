#pragma once

// Thin FFTW wrapper: in-place, unnormalized d-dimensional complex transforms
// applied to all d components of a block vector at once.

#include "ffthom/grid_field.hpp"

#include <span>

namespace ffthom::detail {

/// X(j) = sum_m x(m) exp(-2 pi i j.m / N), per component.
void fft_forward_inplace(const GridSpec& grid, std::span<Complex> data);
/// x(m) = sum_j X(j) exp(+2 pi i j.m / N), per component.
void fft_backward_inplace(const GridSpec& grid, std::span<Complex> data);

}  // namespace ffthom::detail
