#pragma once

#include <span>

#include "flowforge/types.hpp"

namespace flowforge::fft {

enum class Direction { forward, inverse };

// Centered, unitary DFT: index n/2 (0-based) is the zero frequency / image
// centre on every axis, X[k] = N^{-1/2} sum_n x[n] exp(-+2 pi i (k-c)(n-c)/N)
// with c = n/2. Backed by FFTW; plans are cached and execution is safe from
// concurrent threads.

void fft1c(std::span<cplx> data, Direction dir);
void fft3c(std::span<cplx> data, const Grid3& grid, Direction dir);

/// 2D transform over (y, z) of every x-slab of a volume stored x-major.
void fft2c_yz(std::span<cplx> data, const Grid3& grid, Direction dir);

}  // namespace flowforge::fft
