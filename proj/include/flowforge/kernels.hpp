#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "flowforge/types.hpp"

// Data-parallel inner loops. Every kernel exists twice with the same
// signature: `serial` is the reference implementation the tests compare
// against, `omp` is the OpenMP version the pipeline calls. Each output element
// is owned by exactly one thread, so results do not depend on the thread count.
namespace flowforge::kernels {

/// One requested k-space line; ky/kz are 0-based grid indices.
struct LineRequest {
  int ky = 0;
  int kz = 0;
};

/// Fills `image` with the object seen by readout `readout`.
using RenderFn = std::function<void(std::size_t readout, Volume& image)>;

/// A sampled (ky, kz) cell of one bin with its soft-gating weight.
struct SampledCell {
  int ky = 0;
  int kz = 0;
  double weight = 1.0;
};

/// Measurement layout of a multi-bin SENSE problem: per bin, the sampled
/// cells; the measurement vector is [bin][cell][coil][kx] with bins packed
/// back to back.
struct SenseLayout {
  Grid3 grid;
  int n_coils = 1;
  std::vector<std::vector<SampledCell>> cells;  // [bin]
  std::vector<std::size_t> offsets;             // [bin + 1]

  int n_bins() const { return static_cast<int>(cells.size()); }
  std::size_t measurement_size() const { return offsets.empty() ? 0 : offsets.back(); }
  std::size_t image_size() const { return grid.size() * cells.size(); }
  void finalize();  // recompute offsets from cells
};

/// Dimensions of a 4D array [t][x][y][z].
using Dims4 = std::array<int, 4>;

/// Undecimated one-level Haar analysis along the axes flagged in `axes`.
/// Output holds 2^k bands back to back (k = active axes), band index bit j
/// set means "detail" along the j-th active axis.
struct HaarPlan {
  Dims4 dims{};
  std::array<bool, 4> axes{};
  int n_active() const;
  int n_bands() const { return 1 << n_active(); }
  std::size_t band_size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] * dims[3];
  }
};

#define FLOWFORGE_KERNEL_DECLS                                                                   \
  void project_lines(const RenderFn& render, const std::vector<Volume>& maps,                    \
                     std::span<const LineRequest> lines, std::span<cplxf> out);                  \
  void sense_forward(const SenseLayout& layout, std::span<const cplx> maps,                      \
                     std::span<const cplx> image, std::span<cplx> measurement);                  \
  void sense_adjoint(const SenseLayout& layout, std::span<const cplx> maps,                      \
                     std::span<const cplx> measurement, std::span<cplx> image);                  \
  void haar_forward(const HaarPlan& plan, std::span<const cplx> input, std::span<cplx> bands);   \
  void haar_adjoint(const HaarPlan& plan, std::span<const cplx> bands, std::span<cplx> output);  \
  void soft_threshold(std::span<cplx> coeffs, double threshold);                                 \
  void median3(const Grid3& grid, std::span<const double> input, std::span<double> output);      \
  void fir_rows(const Eigen::MatrixXd& input, std::span<const double> kernel,                    \
                Eigen::MatrixXd& output);

namespace serial {
FLOWFORGE_KERNEL_DECLS
}  // namespace serial

namespace omp {
FLOWFORGE_KERNEL_DECLS
}  // namespace omp

#undef FLOWFORGE_KERNEL_DECLS

/// Sum of |v|^2 accumulated in fixed-size blocks so the result does not
/// depend on the thread count.
double sum_squares(std::span<const cplx> v);
double sum_abs(std::span<const cplx> v);

}  // namespace flowforge::kernels
