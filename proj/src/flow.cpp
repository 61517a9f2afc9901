#include "flowforge/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "flowforge/errors.hpp"
#include "flowforge/kernels.hpp"
#include "flowforge/svg.hpp"

namespace flowforge::flow {

VelocityStudy decode_velocity(const recon::ImageSeries& images, double venc) {
  if (images.encodings != 4) {
    throw ConfigError("decode_velocity: unsupported encoding scheme (" +
                      std::to_string(images.encodings) + " encodings, four-point scheme needs 4)");
  }
  if (!(venc > 0.0)) throw ConfigError("decode_velocity: venc must be > 0");
  VelocityStudy s;
  s.grid = images.grid;
  s.n_bins = images.n_bins;
  s.venc = venc;
  s.voxel_size_mm = images.voxel_size_mm;
  s.bin_width_s = images.bin_width_s;
  const std::size_t nv = images.grid.size();
  s.velocity.resize(3 * static_cast<std::size_t>(s.n_bins) * nv);
  s.magnitude.resize(static_cast<std::size_t>(s.n_bins) * nv);
  const double k = venc / std::numbers::pi;
  for (int b = 0; b < s.n_bins; ++b) {
    const auto ref = images.frame(0, b);
    for (std::size_t v = 0; v < nv; ++v) s.magnitude[b * nv + v] = std::abs(ref[v]);
    for (int d = 0; d < 3; ++d) {
      const auto enc = images.frame(d + 1, b);
      auto out = s.component(d, b);
      for (std::size_t v = 0; v < nv; ++v) out[v] = k * std::arg(enc[v] * std::conj(ref[v]));
    }
  }
  return s;
}

std::size_t unwrap_temporal(VelocityStudy& s) {
  if (s.n_bins < 3) throw ConfigError("unwrap_temporal: need at least 3 bins");
  const std::size_t nv = s.grid.size();
  std::size_t modified = 0;
  for (int d = 0; d < 3; ++d) {
    for (std::size_t v = 0; v < nv; ++v) {
      bool changed = false;
      double prev = s.component(d, 0)[v];
      for (int b = 1; b < s.n_bins; ++b) {
        double& cur = s.component(d, b)[v];
        while (cur - prev > s.venc) {
          cur -= 2.0 * s.venc;
          changed = true;
        }
        while (cur - prev < -s.venc) {
          cur += 2.0 * s.venc;
          changed = true;
        }
        prev = cur;
      }
      modified += changed ? 1 : 0;
    }
  }
  s.unwrap_applied = true;
  s.unwrapped_voxels = modified;
  return modified;
}

std::vector<std::uint8_t> static_mask(const VelocityStudy& s, const BackgroundConfig& cfg) {
  const std::size_t nv = s.grid.size();
  std::vector<double> mean_mag(nv, 0.0);
  for (int b = 0; b < s.n_bins; ++b) {
    const auto m = s.magnitude_frame(b);
    for (std::size_t v = 0; v < nv; ++v) mean_mag[v] += m[v] / s.n_bins;
  }
  std::vector<double> sorted = mean_mag;
  const auto idx = static_cast<std::size_t>(cfg.magnitude_percentile / 100.0 * static_cast<double>(nv - 1));
  std::nth_element(sorted.begin(), sorted.begin() + idx, sorted.end());
  const double threshold = sorted[idx];

  std::vector<std::uint8_t> mask(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    if (!(mean_mag[v] > threshold)) continue;
    bool still = true;
    for (int d = 0; d < 3 && still; ++d) {
      double mean = 0.0, ss = 0.0;
      for (int b = 0; b < s.n_bins; ++b) mean += s.component(d, b)[v];
      mean /= s.n_bins;
      for (int b = 0; b < s.n_bins; ++b) {
        const double e = s.component(d, b)[v] - mean;
        ss += e * e;
      }
      const double sd = s.n_bins > 1 ? std::sqrt(ss / (s.n_bins - 1)) : 0.0;
      still = sd < cfg.max_temporal_sd;
    }
    mask[v] = still ? 1 : 0;
  }
  return mask;
}

std::array<double, 10> poly2_basis(const Grid3& g, int x, int y, int z) {
  auto norm = [](int i, int n) { return n > 1 ? (2.0 * i - (n - 1)) / (n - 1) : 0.0; };
  const double u = norm(x, g.nx), v = norm(y, g.ny), w = norm(z, g.nz);
  return {1.0, u, v, w, u * u, v * v, w * w, u * v, u * w, v * w};
}

BackgroundResult background_correct(VelocityStudy& s, const BackgroundConfig& cfg,
                                    std::span<const std::uint8_t> exclude) {
  BackgroundResult res;
  res.mask = static_mask(s, cfg);
  const std::size_t nv = s.grid.size();
  if (!exclude.empty()) {
    if (exclude.size() != nv) throw ConfigError("background_correct: exclude mask has the wrong size");
    for (std::size_t v = 0; v < nv; ++v) {
      if (exclude[v]) res.mask[v] = 0;
    }
  }
  res.mask_voxels = static_cast<std::size_t>(std::count(res.mask.begin(), res.mask.end(), 1));
  if (res.mask_voxels < cfg.min_voxels) {
    res.warning = "background correction skipped: static mask has " + std::to_string(res.mask_voxels) +
                  " voxels (minimum " + std::to_string(cfg.min_voxels) + ")";
    return res;
  }
  const Grid3& g = s.grid;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(res.mask_voxels), 10);
  std::vector<std::size_t> voxels;
  voxels.reserve(res.mask_voxels);
  Eigen::Index row = 0;
  for (int x = 0; x < g.nx; ++x) {
    for (int y = 0; y < g.ny; ++y) {
      for (int z = 0; z < g.nz; ++z) {
        const std::size_t v = g.index(x, y, z);
        if (!res.mask[v]) continue;
        const auto p = poly2_basis(g, x, y, z);
        for (int j = 0; j < 10; ++j) a(row, j) = p[j];
        voxels.push_back(v);
        ++row;
      }
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  for (int d = 0; d < 3; ++d) {
    Eigen::VectorXd rhs(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double mean = 0.0;
      for (int b = 0; b < s.n_bins; ++b) mean += s.component(d, b)[voxels[i]];
      rhs(i) = mean / s.n_bins;
    }
    const Eigen::VectorXd c = qr.solve(rhs);
    res.coefficients[d].assign(c.data(), c.data() + 10);
    for (int x = 0; x < g.nx; ++x) {
      for (int y = 0; y < g.ny; ++y) {
        for (int z = 0; z < g.nz; ++z) {
          const auto p = poly2_basis(g, x, y, z);
          double field = 0.0;
          for (int j = 0; j < 10; ++j) field += c(j) * p[j];
          for (int b = 0; b < s.n_bins; ++b) s.component(d, b)[g.index(x, y, z)] -= field;
        }
      }
    }
  }
  res.applied = true;
  s.background_poly_order = 2;
  return res;
}

std::vector<std::array<int, 2>> circle_roi(const Grid3& g, int axis, std::array<double, 2> c,
                                           double radius) {
  const int du = axis == 0 ? g.ny : g.nx;
  const int dv = axis == 2 ? g.ny : g.nz;
  std::vector<std::array<int, 2>> roi;
  for (int u = 0; u < du; ++u) {
    for (int v = 0; v < dv; ++v) {
      if (std::hypot(u - c[0], v - c[1]) <= radius) roi.push_back({u, v});
    }
  }
  return roi;
}

namespace {

std::array<int, 3> voxel_of(const AnalysisPlane& p, std::array<int, 2> uv) {
  if (p.axis == 0) return {p.index, uv[0], uv[1]};
  if (p.axis == 1) return {uv[0], p.index, uv[1]};
  return {uv[0], uv[1], p.index};
}

}  // namespace

FlowEntry quantify(const VelocityStudy& s, const AnalysisPlane& plane) {
  if (plane.roi.empty()) throw ConfigError("quantify: ROI is empty");
  if (plane.axis < 0 || plane.axis > 2 || plane.index < 0 || plane.index >= s.grid.dim(plane.axis)) {
    throw ConfigError("quantify: plane outside the grid");
  }
  for (const auto& uv : plane.roi) {
    const auto p = voxel_of(plane, uv);
    if (!s.grid.contains(p[0], p[1], p[2])) throw ConfigError("quantify: ROI voxel outside the grid");
  }
  const double area_mm2 = s.voxel_size_mm * s.voxel_size_mm;
  const double sign = plane.direction >= 0 ? 1.0 : -1.0;

  FlowEntry e;
  e.label = plane.label;
  std::vector<double> filtered(s.grid.size());
  double best = -1.0;
  for (int b = 0; b < s.n_bins; ++b) {
    const auto v = s.component(plane.axis, b);
    double q = 0.0;
    for (const auto& uv : plane.roi) {
      const auto p = voxel_of(plane, uv);
      q += sign * v[s.grid.index(p[0], p[1], p[2])] * area_mm2 * 0.01;  // cm/s * mm^2 -> mL/s
    }
    e.flow_curve_ml_s.push_back(q);
    e.times_s.push_back((b + 0.5) * s.bin_width_s);

    kernels::omp::median3(s.grid, v, filtered);
    for (const auto& uv : plane.roi) {
      const auto p = voxel_of(plane, uv);
      const double f = sign * filtered[s.grid.index(p[0], p[1], p[2])];
      if (std::abs(f) > best) {
        best = std::abs(f);
        e.peak_velocity_sign = f < 0.0 ? -1 : 1;
        e.peak_bin = b;
      }
    }
  }
  e.peak_velocity_cm_s = best;
  double net = 0.0;
  for (double q : e.flow_curve_ml_s) net += q * s.bin_width_s;
  e.net_flow_ml = net;
  e.peak_flow_ml_s = *std::max_element(e.flow_curve_ml_s.begin(), e.flow_curve_ml_s.end());
  return e;
}

std::string flow_curve_svg(const std::vector<FlowEntry>& entries) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::vector<svg::Series> series;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    svg::Series s;
    s.label = entries[i].label;
    s.x = entries[i].times_s;
    s.y = entries[i].flow_curve_ml_s;
    s.color = colors[i % 5];
    series.push_back(std::move(s));
  }
  svg::Axes axes;
  axes.title = "through-plane flow";
  axes.x_label = "time from trigger (s)";
  axes.y_label = "flow (mL/s)";
  return svg::line_plot(axes, series);
}

}  // namespace flowforge::flow
