#include "flowforge/operators.hpp"

#include <cmath>
#include <random>

#include "flowforge/errors.hpp"

namespace flowforge::recon {
namespace {

std::vector<cplx> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

SenseOperator::SenseOperator(const SensitivityMaps& maps, kernels::SenseLayout layout, bool parallel)
    : maps_(maps), layout_(std::move(layout)), parallel_(parallel) {
  if (!(layout_.grid == maps.grid) || layout_.n_coils != maps.n_coils) {
    throw ConfigError("SenseOperator: layout grid/coils do not match the sensitivity maps");
  }
  for (const auto& bin : layout_.cells) {
    for (const auto& c : bin) {
      if (c.ky < 0 || c.ky >= maps.grid.ny || c.kz < 0 || c.kz >= maps.grid.nz) {
        throw ConfigError("SenseOperator: sampled cell outside the grid");
      }
    }
  }
  layout_.finalize();
}

void SenseOperator::forward(std::span<const cplx> x, std::span<cplx> y) const {
  if (x.size() != domain_size() || y.size() != range_size()) {
    throw ConfigError("SenseOperator::forward: vector size mismatch");
  }
  if (parallel_) {
    kernels::omp::sense_forward(layout_, maps_.data, x, y);
  } else {
    kernels::serial::sense_forward(layout_, maps_.data, x, y);
  }
}

void SenseOperator::adjoint(std::span<const cplx> y, std::span<cplx> x) const {
  if (x.size() != domain_size() || y.size() != range_size()) {
    throw ConfigError("SenseOperator::adjoint: vector size mismatch");
  }
  if (parallel_) {
    kernels::omp::sense_adjoint(layout_, maps_.data, y, x);
  } else {
    kernels::serial::sense_adjoint(layout_, maps_.data, y, x);
  }
}

SenseOperator encode_operator(const SensitivityMaps& maps, std::span<const double> weight_mask) {
  const Grid3& g = maps.grid;
  if (weight_mask.size() != static_cast<std::size_t>(g.ny) * g.nz) {
    throw ConfigError("encode_operator: weight mask shape does not match the maps grid");
  }
  kernels::SenseLayout layout;
  layout.grid = g;
  layout.n_coils = maps.n_coils;
  layout.cells.resize(1);
  for (int ky = 0; ky < g.ny; ++ky) {
    for (int kz = 0; kz < g.nz; ++kz) {
      const double w = weight_mask[ky * g.nz + kz];
      if (w < 0.0 || w > 1.0) throw ConfigError("encode_operator: weights must lie in [0, 1]");
      if (w > 0.0) layout.cells[0].push_back({ky, kz, w});
    }
  }
  return SenseOperator(maps, std::move(layout));
}

double inner_real(std::span<const cplx> a, std::span<const cplx> b) { return inner(a, b).real(); }

double adjoint_test(const LinearOperator& op, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto x = random_vector(op.domain_size(), rng);
  const auto y = random_vector(op.range_size(), rng);
  std::vector<cplx> ax(op.range_size()), aty(op.domain_size());
  op.forward(x, ax);
  op.adjoint(y, aty);
  const cplx lhs = inner(ax, y);
  const cplx rhs = inner(x, aty);
  double nax = 0.0, ny = 0.0;
  for (const auto& v : ax) nax += std::norm(v);
  for (const auto& v : y) ny += std::norm(v);
  const double denom = std::sqrt(nax * ny);
  return denom > 0.0 ? std::abs(lhs - rhs) / denom : std::abs(lhs - rhs);
}

double power_iteration(const LinearOperator& op, int iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto x = random_vector(op.domain_size(), rng);
  std::vector<cplx> ax(op.range_size()), z(op.domain_size());
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double nx = 0.0;
    for (const auto& v : x) nx += std::norm(v);
    nx = std::sqrt(nx);
    if (!(nx > 0.0)) return 0.0;
    for (auto& v : x) v /= nx;
    op.forward(x, ax);
    op.adjoint(ax, z);
    lambda = inner_real(x, z);
    x.swap(z);
  }
  return lambda;
}

}  // namespace flowforge::recon
