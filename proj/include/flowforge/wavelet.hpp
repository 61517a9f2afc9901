#pragma once

#include <array>
#include <string>
#include <vector>

#include "flowforge/kernels.hpp"
#include "flowforge/operators.hpp"

namespace flowforge::recon {

/// One-level undecimated Haar analysis over [bin][x][y][z] with periodic
/// boundaries. Filters are (1/2, 1/2) and (1/2, -1/2), so the frame is tight
/// with constant 1 (Phi^H Phi = I) and the adjoint is the inverse. Axes shorter
/// than 2 are skipped.
class HaarWavelet final : public LinearOperator {
 public:
  explicit HaarWavelet(const kernels::Dims4& dims, bool parallel = true);

  std::size_t domain_size() const override { return plan_.band_size(); }
  std::size_t range_size() const override { return plan_.band_size() * plan_.n_bands(); }
  void forward(std::span<const cplx> x, std::span<cplx> bands) const override;
  void adjoint(std::span<const cplx> bands, std::span<cplx> x) const override;

  const kernels::HaarPlan& plan() const { return plan_; }
  int n_bands() const { return plan_.n_bands(); }
  /// Names of the skipped axes (t, x, y, z).
  std::vector<std::string> skipped_axes() const;
  /// Band index holding the detail along a given array axis (0 = bin), or -1.
  int detail_band(int axis) const;

 private:
  kernels::HaarPlan plan_;
  bool parallel_;
};

}  // namespace flowforge::recon
