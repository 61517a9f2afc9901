#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowforge/kernels.hpp"
#include "flowforge/types.hpp"

namespace flowforge::recon {

/// Linear map between complex vector spaces with an exact adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t domain_size() const = 0;
  virtual std::size_t range_size() const = 0;
  virtual void forward(std::span<const cplx> x, std::span<cplx> y) const = 0;
  virtual void adjoint(std::span<const cplx> y, std::span<cplx> x) const = 0;
};

/// Coil sensitivities, layout [coil][x][y][z].
struct SensitivityMaps {
  Grid3 grid;
  int n_coils = 0;
  int window = 0;  // local covariance window edge used for estimation (0 = synthetic)
  std::vector<cplx> data;

  std::span<const cplx> coil(int c) const { return {data.data() + c * grid.size(), grid.size()}; }
};

/// Multi-bin weighted SENSE model: y_b = W_b * M_b * F * (S x_b) for every bin.
class SenseOperator final : public LinearOperator {
 public:
  SenseOperator(const SensitivityMaps& maps, kernels::SenseLayout layout, bool parallel = true);

  std::size_t domain_size() const override { return layout_.image_size(); }
  std::size_t range_size() const override { return layout_.measurement_size(); }
  void forward(std::span<const cplx> x, std::span<cplx> y) const override;
  void adjoint(std::span<const cplx> y, std::span<cplx> x) const override;
  const kernels::SenseLayout& layout() const { return layout_; }

 private:
  const SensitivityMaps& maps_;
  kernels::SenseLayout layout_;
  bool parallel_;
};

/// Single-bin operator from a [ky][kz] weight mask; cells with weight 0 are
/// left out of the range.
SenseOperator encode_operator(const SensitivityMaps& maps, std::span<const double> weight_mask);

/// Relative adjoint mismatch |<Ax, y> - <x, A^H y>| / (|Ax| |y|) on random
/// complex Gaussian vectors.
double adjoint_test(const LinearOperator& op, std::uint64_t seed);

/// Largest eigenvalue of A^H A by power iteration.
double power_iteration(const LinearOperator& op, int iterations, std::uint64_t seed = 7);

double inner_real(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace flowforge::recon
