#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowforge/recon.hpp"

namespace flowforge::flow {

/// Velocities (cm/s) [component][bin][voxel] and the reference magnitude
/// [bin][voxel].
struct VelocityStudy {
  Grid3 grid;
  int n_bins = 0;
  double venc = 0.0;
  double voxel_size_mm = 1.0;
  double bin_width_s = 0.0;
  std::vector<double> velocity;
  std::vector<double> magnitude;
  bool unwrap_applied = false;
  std::size_t unwrapped_voxels = 0;
  int background_poly_order = -1;  // -1 when no background correction was applied

  std::span<double> component(int d, int b) {
    return {velocity.data() + (static_cast<std::size_t>(d) * n_bins + b) * grid.size(), grid.size()};
  }
  std::span<const double> component(int d, int b) const {
    return {velocity.data() + (static_cast<std::size_t>(d) * n_bins + b) * grid.size(), grid.size()};
  }
  std::span<const double> magnitude_frame(int b) const {
    return {magnitude.data() + static_cast<std::size_t>(b) * grid.size(), grid.size()};
  }
};

/// v_d = venc / pi * arg(x_{d+1} conj(x_1)); requires four encodings.
VelocityStudy decode_velocity(const recon::ImageSeries& images, double venc);

/// Walks bins in time and removes jumps larger than venc by +-2 venc.
/// Returns the number of voxel components modified.
std::size_t unwrap_temporal(VelocityStudy& study);

struct BackgroundConfig {
  double magnitude_percentile = 20.0;
  double max_temporal_sd = 2.0;  // cm/s
  std::size_t min_voxels = 100;
};

struct BackgroundResult {
  bool applied = false;
  std::size_t mask_voxels = 0;
  std::array<std::vector<double>, 3> coefficients;  // 10 terms per component
  std::vector<std::uint8_t> mask;
  std::string warning;
};

/// Static-tissue mask: time-averaged magnitude above the percentile and
/// temporal velocity SD below the threshold on every component.
std::vector<std::uint8_t> static_mask(const VelocityStudy& study, const BackgroundConfig& cfg);

/// Value of the 10-term second-order polynomial basis at a voxel, in
/// coordinates normalised to [-1, 1] across the grid.
std::array<double, 10> poly2_basis(const Grid3& grid, int x, int y, int z);

/// Fits an order-2 polynomial to each component's temporal mean over the
/// mask and subtracts it everywhere. `exclude` voxels are removed from the mask.
BackgroundResult background_correct(VelocityStudy& study, const BackgroundConfig& cfg = {},
                                    std::span<const std::uint8_t> exclude = {});

/// Axis-aligned plane with an in-plane ROI. ROI coordinates are (u, v) in
/// the order of the remaining axes, e.g. (x, y) for an axis-2 plane.
struct AnalysisPlane {
  std::string label;
  int axis = 2;
  int index = 0;
  std::vector<std::array<int, 2>> roi;
  int direction = 1;  // +1 counts flow along +axis as positive
};

std::vector<std::array<int, 2>> circle_roi(const Grid3& grid, int axis, std::array<double, 2> center,
                                           double radius);

struct FlowEntry {
  std::string label;
  double net_flow_ml = 0.0;
  double peak_flow_ml_s = 0.0;
  double peak_velocity_cm_s = 0.0;  // max |v| after 3x3x3 median filtering
  int peak_velocity_sign = 1;
  int peak_bin = 0;
  std::vector<double> flow_curve_ml_s;
  std::vector<double> times_s;  // bin centres
};

FlowEntry quantify(const VelocityStudy& study, const AnalysisPlane& plane);

std::string flow_curve_svg(const std::vector<FlowEntry>& entries);

}  // namespace flowforge::flow
