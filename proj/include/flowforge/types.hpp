#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace flowforge {

using cplx = std::complex<double>;
using cplxf = std::complex<float>;

/// Image grid (readout x, phase-encode y, slice-encode z). Volumes are stored
/// x-major: index = (x * ny + y) * nz + z.
struct Grid3 {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * ny + y) * nz + z;
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  int dim(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  std::array<int, 3> dims() const { return {nx, ny, nz}; }

  friend bool operator==(const Grid3&, const Grid3&) = default;
};

/// Dense complex volume on a Grid3.
struct Volume {
  Grid3 grid;
  std::vector<cplx> data;

  Volume() = default;
  explicit Volume(Grid3 g) : grid(g), data(g.size()) {}

  cplx& at(int x, int y, int z) { return data[grid.index(x, y, z)]; }
  const cplx& at(int x, int y, int z) const { return data[grid.index(x, y, z)]; }
};

}  // namespace flowforge
