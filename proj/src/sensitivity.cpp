#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "flowforge/errors.hpp"
#include "flowforge/fft.hpp"
#include "flowforge/recon.hpp"

namespace flowforge::recon {

std::vector<cplx> time_averaged_kspace(const binning::BinnedKSpace& bk) {
  const Grid3& g = bk.grid;
  const int nc = bk.n_coils;
  std::vector<cplx> acc(static_cast<std::size_t>(nc) * g.size(), cplx{});
  std::vector<double> wsum(static_cast<std::size_t>(g.ny) * g.nz, 0.0);
  for (int b = 0; b < bk.n_bins; ++b) {
    for (int e = 0; e < bk.encodings; ++e) {
      for (int ky = 0; ky < g.ny; ++ky) {
        for (int kz = 0; kz < g.nz; ++kz) {
          const std::size_t c = bk.cell(b, e, ky, kz);
          const double w = bk.weight_mask[c];
          if (!(w > 0.0)) continue;
          wsum[ky * g.nz + kz] += w;
          const cplxf* d = bk.data.data() + c * bk.cell_stride();
          for (int x = 0; x < g.nx; ++x) {
            for (int coil = 0; coil < nc; ++coil) {
              acc[coil * g.size() + g.index(x, ky, kz)] += w * cplx(d[x * nc + coil]);
            }
          }
        }
      }
    }
  }
  for (int coil = 0; coil < nc; ++coil) {
    for (int x = 0; x < g.nx; ++x) {
      for (int ky = 0; ky < g.ny; ++ky) {
        for (int kz = 0; kz < g.nz; ++kz) {
          const double w = wsum[ky * g.nz + kz];
          if (w > 0.0) acc[coil * g.size() + g.index(x, ky, kz)] /= w;
        }
      }
    }
  }
  return acc;
}

double central_fill(const binning::BinnedKSpace& bk) {
  const Grid3& g = bk.grid;
  const int hy = std::max(1, g.ny / 4), hz = std::max(1, g.nz / 4);
  std::size_t total = 0, filled = 0;
  for (int ky = g.ny / 2 - hy; ky < g.ny / 2 + hy; ++ky) {
    for (int kz = g.nz / 2 - hz; kz < g.nz / 2 + hz; ++kz) {
      ++total;
      bool any = false;
      for (int b = 0; b < bk.n_bins && !any; ++b) {
        for (int e = 0; e < bk.encodings && !any; ++e) any = bk.weight_mask[bk.cell(b, e, ky, kz)] > 0.0;
      }
      filled += any ? 1 : 0;
    }
  }
  return total ? static_cast<double>(filled) / static_cast<double>(total) : 0.0;
}

SensitivityMaps estimate_sensitivities(const binning::BinnedKSpace& bk, const SensitivityConfig& cfg) {
  const double fill = central_fill(bk);
  if (fill < 0.5) {
    throw DataError("estimate_sensitivities: only " + std::to_string(100.0 * fill) +
                    "% of the central k-space quarter is sampled (need 50%)");
  }
  return estimate_sensitivities(time_averaged_kspace(bk), bk.grid, bk.n_coils, cfg);
}

SensitivityMaps estimate_sensitivities(std::span<const cplx> kspace, const Grid3& g, int nc,
                                       const SensitivityConfig& cfg) {
  if (kspace.size() != static_cast<std::size_t>(nc) * g.size()) {
    throw ConfigError("estimate_sensitivities: k-space size does not match grid and coil count");
  }
  if (cfg.window < 1) throw ConfigError("estimate_sensitivities: window must be >= 1");
  const std::size_t nv = g.size();

  // Apodised low-resolution coil images.
  std::vector<cplx> img(kspace.begin(), kspace.end());
  std::vector<double> apod(nv);
  for (int x = 0; x < g.nx; ++x) {
    for (int y = 0; y < g.ny; ++y) {
      for (int z = 0; z < g.nz; ++z) {
        const double u = (x - g.nx / 2) / (cfg.apodization * g.nx);
        const double v = (y - g.ny / 2) / (cfg.apodization * g.ny);
        const double w = (z - g.nz / 2) / (cfg.apodization * g.nz);
        apod[g.index(x, y, z)] = std::exp(-0.5 * (u * u + v * v + w * w));
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nc; ++c) {
    std::span<cplx> ci(img.data() + c * nv, nv);
    for (std::size_t i = 0; i < nv; ++i) ci[i] *= apod[i];
    fft::fft3c(ci, g, fft::Direction::inverse);
  }

  std::vector<double> rss(nv, 0.0);
  std::vector<double> energy(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < nv; ++i) {
      const double p = std::norm(img[c * nv + i]);
      rss[i] += p;
      energy[c] += p;
    }
  }
  for (auto& r : rss) r = std::sqrt(r);
  const double max_rss = *std::max_element(rss.begin(), rss.end());
  if (!(max_rss > 0.0)) throw DataError("estimate_sensitivities: k-space is empty");
  const int ref = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());

  SensitivityMaps maps;
  maps.grid = g;
  maps.n_coils = nc;
  maps.window = cfg.window;
  maps.data.assign(static_cast<std::size_t>(nc) * nv, cplx{});
  const int hx = cfg.window / 2, hy = cfg.window / 2, hz = std::min(cfg.window, 3) / 2;

#pragma omp parallel for schedule(dynamic, 1)
  for (int x = 0; x < g.nx; ++x) {
    Eigen::MatrixXcd cov(nc, nc);
    Eigen::VectorXcd s(nc);
    for (int y = 0; y < g.ny; ++y) {
      for (int z = 0; z < g.nz; ++z) {
        const std::size_t v = g.index(x, y, z);
        if (rss[v] < cfg.mask_fraction * max_rss) continue;
        cov.setZero();
        for (int i = std::max(0, x - hx); i <= std::min(g.nx - 1, x + hx); ++i) {
          for (int j = std::max(0, y - hy); j <= std::min(g.ny - 1, y + hy); ++j) {
            for (int k = std::max(0, z - hz); k <= std::min(g.nz - 1, z + hz); ++k) {
              const std::size_t w = g.index(i, j, k);
              for (int c = 0; c < nc; ++c) s(c) = img[c * nv + w];
              cov.noalias() += s * s.adjoint();
            }
          }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
        Eigen::VectorXcd u = eig.eigenvectors().col(nc - 1);
        const cplx r = u(ref);
        const cplx rot = std::abs(r) > 0.0 ? std::conj(r) / std::abs(r) : cplx(1.0, 0.0);
        for (int c = 0; c < nc; ++c) maps.data[c * nv + v] = u(c) * rot;
      }
    }
  }
  return maps;
}

double normalization_level(const binning::BinnedKSpace& bk) {
  const Grid3& g = bk.grid;
  auto k = time_averaged_kspace(bk);
  const std::size_t nv = g.size();
  std::vector<double> rss(nv, 0.0);
  for (int c = 0; c < bk.n_coils; ++c) {
    std::span<cplx> ci(k.data() + c * nv, nv);
    fft::fft3c(ci, g, fft::Direction::inverse);
    for (std::size_t i = 0; i < nv; ++i) rss[i] += std::norm(ci[i]);
  }
  for (auto& r : rss) r = std::sqrt(r);
  const std::size_t idx = static_cast<std::size_t>(0.98 * static_cast<double>(nv - 1));
  std::nth_element(rss.begin(), rss.begin() + idx, rss.end());
  return rss[idx];
}

}  // namespace flowforge::recon
