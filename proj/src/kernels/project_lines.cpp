#include <cmath>
#include <numbers>

#include "flowforge/fft.hpp"
#include "flowforge/kernels.hpp"

namespace flowforge::kernels {
namespace {

// Centred unitary DFT twiddles for one phase-encode index.
std::vector<cplx> twiddles(int n, int k) {
  std::vector<cplx> w(n);
  const double c = n / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    const double arg = -2.0 * std::numbers::pi * (k - c) * (j - c) / n;
    w[j] = std::polar(scale, arg);
  }
  return w;
}

void project_one(const Volume& image, const std::vector<Volume>& maps, const LineRequest& req,
                 std::span<cplxf> out, std::vector<cplx>& line) {
  const Grid3& g = image.grid;
  const auto wy = twiddles(g.ny, req.ky);
  const auto wz = twiddles(g.nz, req.kz);
  line.resize(g.nx);
  for (std::size_t c = 0; c < maps.size(); ++c) {
    const auto& s = maps[c].data;
    for (int x = 0; x < g.nx; ++x) {
      cplx acc = 0.0;
      for (int y = 0; y < g.ny; ++y) {
        cplx row = 0.0;
        const std::size_t base = g.index(x, y, 0);
        for (int z = 0; z < g.nz; ++z) row += s[base + z] * image.data[base + z] * wz[z];
        acc += row * wy[y];
      }
      line[x] = acc;
    }
    fft::fft1c(line, fft::Direction::forward);
    for (int x = 0; x < g.nx; ++x) out[c * g.nx + x] = cplxf(line[x]);
  }
}

}  // namespace

namespace serial {

void project_lines(const RenderFn& render, const std::vector<Volume>& maps,
                   std::span<const LineRequest> lines, std::span<cplxf> out) {
  if (maps.empty()) return;
  const Grid3 g = maps.front().grid;
  const std::size_t per_line = maps.size() * g.nx;
  Volume image(g);
  std::vector<cplx> line;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    render(r, image);
    project_one(image, maps, lines[r], out.subspan(r * per_line, per_line), line);
  }
}

}  // namespace serial

namespace omp {

void project_lines(const RenderFn& render, const std::vector<Volume>& maps,
                   std::span<const LineRequest> lines, std::span<cplxf> out) {
  if (maps.empty()) return;
  const Grid3 g = maps.front().grid;
  const std::size_t per_line = maps.size() * g.nx;
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel
  {
    Volume image(g);
    std::vector<cplx> line;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      render(static_cast<std::size_t>(r), image);
      project_one(image, maps, lines[r], out.subspan(r * per_line, per_line), line);
    }
  }
}

}  // namespace omp
}  // namespace flowforge::kernels
