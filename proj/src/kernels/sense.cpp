#include <algorithm>
#include <vector>

#include "flowforge/fft.hpp"
#include "flowforge/kernels.hpp"

namespace flowforge::kernels {

void SenseLayout::finalize() {
  offsets.assign(cells.size() + 1, 0);
  const std::size_t per_cell = static_cast<std::size_t>(n_coils) * grid.nx;
  for (std::size_t b = 0; b < cells.size(); ++b) {
    offsets[b + 1] = offsets[b] + cells[b].size() * per_cell;
  }
}

namespace {

// Forward model for one (bin, coil): W * M * F * (S_c x_b).
void forward_bin_coil(const SenseLayout& L, std::span<const cplx> maps, std::span<const cplx> image,
                      std::span<cplx> measurement, int b, int c, std::vector<cplx>& buf) {
  const Grid3& g = L.grid;
  const std::size_t nv = g.size();
  buf.resize(nv);
  const cplx* s = maps.data() + c * nv;
  const cplx* x = image.data() + b * nv;
  for (std::size_t v = 0; v < nv; ++v) buf[v] = s[v] * x[v];
  fft::fft3c(buf, g, fft::Direction::forward);
  const auto& cells = L.cells[b];
  for (std::size_t j = 0; j < cells.size(); ++j) {
    cplx* dst = measurement.data() + L.offsets[b] + (j * L.n_coils + c) * g.nx;
    const auto& cell = cells[j];
    for (int kx = 0; kx < g.nx; ++kx) dst[kx] = cell.weight * buf[g.index(kx, cell.ky, cell.kz)];
  }
}

// Adjoint for one bin: sum_c conj(S_c) F^H M^T W y_{b,c}.
void adjoint_bin(const SenseLayout& L, std::span<const cplx> maps, std::span<const cplx> measurement,
                 std::span<cplx> image, int b, std::vector<cplx>& buf) {
  const Grid3& g = L.grid;
  const std::size_t nv = g.size();
  buf.resize(nv);
  cplx* x = image.data() + b * nv;
  std::fill(x, x + nv, cplx{});
  const auto& cells = L.cells[b];
  for (int c = 0; c < L.n_coils; ++c) {
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const cplx* src = measurement.data() + L.offsets[b] + (j * L.n_coils + c) * g.nx;
      const auto& cell = cells[j];
      for (int kx = 0; kx < g.nx; ++kx) buf[g.index(kx, cell.ky, cell.kz)] += cell.weight * src[kx];
    }
    fft::fft3c(buf, g, fft::Direction::inverse);
    const cplx* s = maps.data() + c * nv;
    for (std::size_t v = 0; v < nv; ++v) x[v] += std::conj(s[v]) * buf[v];
  }
}

}  // namespace

namespace serial {

void sense_forward(const SenseLayout& layout, std::span<const cplx> maps, std::span<const cplx> image,
                   std::span<cplx> measurement) {
  std::vector<cplx> buf;
  for (int b = 0; b < layout.n_bins(); ++b) {
    for (int c = 0; c < layout.n_coils; ++c) {
      forward_bin_coil(layout, maps, image, measurement, b, c, buf);
    }
  }
}

void sense_adjoint(const SenseLayout& layout, std::span<const cplx> maps,
                   std::span<const cplx> measurement, std::span<cplx> image) {
  std::vector<cplx> buf;
  for (int b = 0; b < layout.n_bins(); ++b) adjoint_bin(layout, maps, measurement, image, b, buf);
}

}  // namespace serial

namespace omp {

void sense_forward(const SenseLayout& layout, std::span<const cplx> maps, std::span<const cplx> image,
                   std::span<cplx> measurement) {
  const int pairs = layout.n_bins() * layout.n_coils;
#pragma omp parallel
  {
    std::vector<cplx> buf;
#pragma omp for schedule(static)
    for (int p = 0; p < pairs; ++p) {
      forward_bin_coil(layout, maps, image, measurement, p / layout.n_coils, p % layout.n_coils, buf);
    }
  }
}

void sense_adjoint(const SenseLayout& layout, std::span<const cplx> maps,
                   std::span<const cplx> measurement, std::span<cplx> image) {
  const int bins = layout.n_bins();
#pragma omp parallel
  {
    std::vector<cplx> buf;
#pragma omp for schedule(static)
    for (int b = 0; b < bins; ++b) adjoint_bin(layout, maps, measurement, image, b, buf);
  }
}

}  // namespace omp
}  // namespace flowforge::kernels
