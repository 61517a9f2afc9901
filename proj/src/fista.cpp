#include <cmath>

#include "flowforge/errors.hpp"
#include "flowforge/recon.hpp"

namespace flowforge::recon {
namespace {

struct Objective {
  double data = 0.0;
  double l1 = 0.0;
  double total() const { return data + l1; }
};

Objective evaluate(const HaarWavelet& psi, std::span<const cplx> x, std::span<const cplx> ax,
                   std::span<const cplx> y, double lambda) {
  double r = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) r += std::norm(ax[i] - y[i]);
  return {0.5 * r, lambda * l1_detail(psi, x)};
}

// x <- Psi^H soft(Psi v, tau) with the approximation band left untouched.
void prox(const HaarWavelet& psi, std::span<const cplx> v, double tau, std::vector<cplx>& bands,
          std::span<cplx> out) {
  bands.resize(psi.range_size());
  psi.forward(v, bands);
  const std::size_t n = psi.domain_size();
  kernels::omp::soft_threshold(std::span<cplx>(bands).subspan(n), tau);
  psi.adjoint(bands, out);
}

void residual(std::span<const cplx> ax, std::span<const cplx> y, std::vector<cplx>& r) {
  r.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = ax[i] - y[i];
}

}  // namespace

double l1_detail(const HaarWavelet& psi, std::span<const cplx> x) {
  std::vector<cplx> bands(psi.range_size());
  psi.forward(x, bands);
  return kernels::sum_abs(std::span<const cplx>(bands).subspan(psi.domain_size()));
}

SolveResult fista_l1(const LinearOperator& a, const HaarWavelet& psi, std::span<const cplx> y,
                     const FistaConfig& cfg, std::span<const cplx> x0) {
  if (!(cfg.lambda >= 0.0)) throw ConfigError("fista: lambda must be >= 0");
  if (cfg.max_iters < 1) throw ConfigError("fista: max_iters must be >= 1");
  if (psi.domain_size() != a.domain_size()) throw ConfigError("fista: wavelet and operator domains differ");
  if (y.size() != a.range_size()) throw ConfigError("fista: data length does not match operator range");
  const std::size_t n = a.domain_size(), m = a.range_size();

  SolveResult res;
  res.lipschitz = power_iteration(a, cfg.power_iters);
  const double step = cfg.step_factor / (res.lipschitz > 0.0 ? res.lipschitz : 1.0);

  std::vector<cplx> x_prev(n, cplx{});
  if (!x0.empty()) {
    if (x0.size() != n) throw ConfigError("fista: initial guess has the wrong size");
    std::copy(x0.begin(), x0.end(), x_prev.begin());
  }
  std::vector<cplx> ax_prev(m), xm(x_prev), axm(m), z(n), az(m), grad(n), v(n), r, bands;
  a.forward(x_prev, ax_prev);
  axm = ax_prev;
  Objective f_prev = evaluate(psi, x_prev, ax_prev, y, cfg.lambda);
  const double f0 = f_prev.total();
  if (!std::isfinite(f0)) throw NumericalError("fista: initial objective is not finite");
  if (f0 == 0.0) {
    res.x = std::move(x_prev);
    res.converged = true;
    return res;
  }

  auto prox_grad = [&](std::span<const cplx> from, std::span<const cplx> a_from) {
    residual(a_from, y, r);
    a.adjoint(r, grad);
    for (std::size_t i = 0; i < n; ++i) v[i] = from[i] - step * grad[i];
    prox(psi, v, cfg.lambda * step, bands, z);
    a.forward(z, az);
    return evaluate(psi, z, az, y, cfg.lambda);
  };

  double t = 1.0;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    IterationLog entry;
    entry.iter = k;
    Objective fz = prox_grad(xm, axm);
    if (!std::isfinite(fz.total()) || fz.total() > cfg.divergence_factor * f0) {
      throw NumericalError("fista: objective diverged at iteration " + std::to_string(k) + " (" +
                           std::to_string(fz.total()) + " vs initial " + std::to_string(f0) + ")");
    }
    bool moved = true;
    if (fz.total() <= f_prev.total()) {
      entry.step = "momentum";
    } else {
      t = 1.0;
      fz = prox_grad(x_prev, ax_prev);
      if (std::isfinite(fz.total()) && fz.total() <= f_prev.total()) {
        entry.step = "restart";
      } else {
        entry.step = "hold";
        moved = false;
      }
    }

    const double f_old = f_prev.total();
    if (moved) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      for (std::size_t i = 0; i < n; ++i) xm[i] = z[i] + beta * (z[i] - x_prev[i]);
      for (std::size_t i = 0; i < m; ++i) axm[i] = az[i] + beta * (az[i] - ax_prev[i]);
      t = t_next;
      x_prev.swap(z);
      ax_prev.swap(az);
      f_prev = fz;
    } else {
      xm = x_prev;
      axm = ax_prev;
    }
    entry.objective = f_prev.total();
    entry.data_term = f_prev.data;
    entry.l1_term = f_prev.l1;
    res.log.push_back(entry);

    const double rel = std::abs(f_old - f_prev.total()) / std::max(f_old, 1e-300);
    if (!moved || rel < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x_prev);
  return res;
}

SolveResult L1SenseSolver::solve(const LinearOperator& a, const kernels::Dims4& dims,
                                 std::span<const cplx> y) const {
  const HaarWavelet psi(dims);
  return fista_l1(a, psi, y, cfg_);
}

kernels::SenseLayout layout_for(const binning::BinnedKSpace& bk, int e) {
  kernels::SenseLayout layout;
  layout.grid = bk.grid;
  layout.n_coils = bk.n_coils;
  layout.cells.resize(bk.n_bins);
  for (int b = 0; b < bk.n_bins; ++b) {
    for (int ky = 0; ky < bk.grid.ny; ++ky) {
      for (int kz = 0; kz < bk.grid.nz; ++kz) {
        const double w = bk.weight_mask[bk.cell(b, e, ky, kz)];
        if (w > 0.0) layout.cells[b].push_back({ky, kz, w});
      }
    }
  }
  layout.finalize();
  return layout;
}

std::vector<cplx> weighted_data(const binning::BinnedKSpace& bk, int e,
                                const kernels::SenseLayout& layout, double scale) {
  std::vector<cplx> y(layout.measurement_size());
  const int nx = bk.grid.nx, nc = bk.n_coils;
  for (int b = 0; b < layout.n_bins(); ++b) {
    const auto& cells = layout.cells[b];
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::size_t c = bk.cell(b, e, cells[j].ky, cells[j].kz);
      const cplxf* src = bk.data.data() + c * bk.cell_stride();
      const double w = cells[j].weight * scale;
      for (int coil = 0; coil < nc; ++coil) {
        cplx* dst = y.data() + layout.offsets[b] + (j * nc + coil) * nx;
        for (int x = 0; x < nx; ++x) dst[x] = w * cplx(src[x * nc + coil]);
      }
    }
  }
  return y;
}

ReconResult reconstruct(const binning::BinnedKSpace& bk, const ReconConfig& cfg, const Solver* solver) {
  return reconstruct(bk, cfg, estimate_sensitivities(bk, cfg.sensitivity), solver);
}

ReconResult reconstruct(const binning::BinnedKSpace& bk, const ReconConfig& cfg,
                        const SensitivityMaps& maps, const Solver* solver) {
  if (!(maps.grid == bk.grid) || maps.n_coils != bk.n_coils) {
    throw ConfigError("reconstruct: sensitivity maps do not match the binned data");
  }
  if (!(cfg.fista.lambda > 0.0)) throw ConfigError("reconstruct: lambda must be > 0");
  const L1SenseSolver fallback(cfg.fista);
  if (solver == nullptr) solver = &fallback;

  ReconResult out;
  out.maps = maps;
  out.solver = solver->name();
  if (cfg.normalize) {
    const double level = normalization_level(bk);
    if (!(level > 0.0)) throw DataError("reconstruct: binned k-space has no signal");
    out.data_scale = 1.0 / level;
  }
  const kernels::Dims4 dims{bk.n_bins, bk.grid.nx, bk.grid.ny, bk.grid.nz};
  out.skipped_axes = HaarWavelet(dims).skipped_axes();

  auto& img = out.images;
  img.grid = bk.grid;
  img.encodings = bk.encodings;
  img.n_bins = bk.n_bins;
  img.voxel_size_mm = bk.voxel_size_mm;
  img.bin_width_s = bk.bin_width_s;
  img.venc = bk.venc;
  img.data.assign(static_cast<std::size_t>(bk.encodings) * bk.n_bins * bk.grid.size(), cplx{});

  // Voxels where every coil map vanishes lie in the null space of the
  // encoding; the data say nothing about them, so they are reported as zero.
  const std::size_t nv = bk.grid.size();
  std::vector<std::uint8_t> support(nv, 0);
  for (int c = 0; c < maps.n_coils; ++c) {
    for (std::size_t v = 0; v < nv; ++v) {
      if (maps.data[c * nv + v] != cplx{}) support[v] = 1;
    }
  }

  for (int e = 0; e < bk.encodings; ++e) {
    const SenseOperator op(out.maps, layout_for(bk, e));
    const auto y = weighted_data(bk, e, op.layout(), out.data_scale);
    auto solved = solver->solve(op, dims, y);
    const std::size_t frame = static_cast<std::size_t>(bk.n_bins) * bk.grid.size();
    for (std::size_t i = 0; i < frame; ++i) {
      img.data[e * frame + i] = support[i % nv] ? solved.x[i] / out.data_scale : cplx{};
    }
    out.per_encoding.push_back(std::move(solved));
  }
  return out;
}

}  // namespace flowforge::recon
