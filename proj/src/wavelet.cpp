#include "flowforge/wavelet.hpp"

#include "flowforge/errors.hpp"

namespace flowforge::recon {

HaarWavelet::HaarWavelet(const kernels::Dims4& dims, bool parallel) : parallel_(parallel) {
  for (int d : dims) {
    if (d < 1) throw ConfigError("HaarWavelet: dimensions must be >= 1");
  }
  plan_.dims = dims;
  for (int a = 0; a < 4; ++a) plan_.axes[a] = dims[a] >= 2;
}

void HaarWavelet::forward(std::span<const cplx> x, std::span<cplx> bands) const {
  if (x.size() != domain_size() || bands.size() != range_size()) {
    throw ConfigError("HaarWavelet::forward: size mismatch");
  }
  if (parallel_) {
    kernels::omp::haar_forward(plan_, x, bands);
  } else {
    kernels::serial::haar_forward(plan_, x, bands);
  }
}

void HaarWavelet::adjoint(std::span<const cplx> bands, std::span<cplx> x) const {
  if (x.size() != domain_size() || bands.size() != range_size()) {
    throw ConfigError("HaarWavelet::adjoint: size mismatch");
  }
  if (parallel_) {
    kernels::omp::haar_adjoint(plan_, bands, x);
  } else {
    kernels::serial::haar_adjoint(plan_, bands, x);
  }
}

std::vector<std::string> HaarWavelet::skipped_axes() const {
  static const char* names[4] = {"t", "x", "y", "z"};
  std::vector<std::string> out;
  for (int a = 0; a < 4; ++a) {
    if (!plan_.axes[a]) out.emplace_back(names[a]);
  }
  return out;
}

int HaarWavelet::detail_band(int axis) const {
  if (!plan_.axes[axis]) return -1;
  int bit = 0;
  for (int a = 0; a < axis; ++a) bit += plan_.axes[a] ? 1 : 0;
  return 1 << bit;
}

}  // namespace flowforge::recon
