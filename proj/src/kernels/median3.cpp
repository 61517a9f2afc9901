#include <algorithm>
#include <array>

#include "flowforge/kernels.hpp"

namespace flowforge::kernels {
namespace {

// Gathers the 3x3x3 neighbourhood of (x, y, z) clipped to the grid.
int gather(const Grid3& g, std::span<const double> in, int x, int y, int z,
           std::array<double, 27>& buf) {
  int n = 0;
  for (int i = std::max(0, x - 1); i <= std::min(g.nx - 1, x + 1); ++i) {
    for (int j = std::max(0, y - 1); j <= std::min(g.ny - 1, y + 1); ++j) {
      for (int k = std::max(0, z - 1); k <= std::min(g.nz - 1, z + 1); ++k) {
        buf[n++] = in[g.index(i, j, k)];
      }
    }
  }
  return n;
}

double median_select(std::array<double, 27>& buf, int n) {
  auto* b = buf.data();
  const int mid = n / 2;
  std::nth_element(b, b + mid, b + n);
  const double upper = b[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(b, b + mid);
  return 0.5 * (lower + upper);
}

}  // namespace

namespace serial {

void median3(const Grid3& grid, std::span<const double> input, std::span<double> output) {
  std::array<double, 27> buf{};
  for (int x = 0; x < grid.nx; ++x) {
    for (int y = 0; y < grid.ny; ++y) {
      for (int z = 0; z < grid.nz; ++z) {
        const int n = gather(grid, input, x, y, z, buf);
        std::sort(buf.begin(), buf.begin() + n);
        output[grid.index(x, y, z)] = n % 2 ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
      }
    }
  }
}

}  // namespace serial

namespace omp {

void median3(const Grid3& grid, std::span<const double> input, std::span<double> output) {
#pragma omp parallel for schedule(static)
  for (int x = 0; x < grid.nx; ++x) {
    std::array<double, 27> buf{};
    for (int y = 0; y < grid.ny; ++y) {
      for (int z = 0; z < grid.nz; ++z) {
        const int n = gather(grid, input, x, y, z, buf);
        output[grid.index(x, y, z)] = median_select(buf, n);
      }
    }
  }
}

}  // namespace omp
}  // namespace flowforge::kernels
