#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowforge/gating.hpp"
#include "flowforge/phantom.hpp"

namespace flowforge::binning {

/// What happened to a readout.
enum class Fate : std::uint8_t {
  binned,
  late_diastole,  // past the last bin edge of its beat
  arrhythmia,     // inside a rejected beat
  duplicate,      // lost the max-W contest for its (bin, encoding, ky, kz) cell
  no_trigger,     // before the first trigger
  self_gating,    // SG line, never binned
};

inline constexpr int kFateCount = 6;
std::string fate_name(Fate f);

struct BinAssignment {
  int n_bins = 0;
  double bin_width_s = 0.0;
  double mean_rr_s = 0.0;
  std::vector<int> bin;    // per readout, 0-based, -1 when discarded
  std::vector<Fate> fate;  // per readout
};

/// Bins of width mean(RR of accepted beats) / n_bins propagate forward from
/// every accepted trigger; the last trigger propagates a full cycle.
BinAssignment assign_bins(const sampling::SamplingSchedule& schedule, std::span<const double> times,
                          const gating::ArrhythmiaResult& beats, int n_bins);

/// Weighted per-bin k-space. Arrays are indexed by cell(bin, enc, ky, kz) with
/// 0-based indices; data holds n_x * n_coils samples per cell ([x][coil]).
struct BinnedKSpace {
  Grid3 grid;
  int n_bins = 0;
  int encodings = 0;
  int n_coils = 0;
  double bin_width_s = 0.0;
  double tr = 0.0;
  double venc = 0.0;
  double voxel_size_mm = 1.0;
  std::vector<cplxf> data;
  std::vector<double> weight_mask;
  std::vector<std::int64_t> provenance;  // source readout, -1 for empty cells
  std::vector<Fate> fate;                // final per-readout fate
  std::vector<int> readout_bin;          // per readout bin (-1 unless binned)

  std::size_t n_cells() const {
    return static_cast<std::size_t>(n_bins) * encodings * grid.ny * grid.nz;
  }
  std::size_t cell(int b, int e, int ky, int kz) const {
    return ((static_cast<std::size_t>(b) * encodings + e) * grid.ny + ky) * grid.nz + kz;
  }
  std::size_t cell_stride() const { return static_cast<std::size_t>(grid.nx) * n_coils; }
  std::array<std::size_t, kFateCount> fate_counts() const;
  /// 1 for readouts that ended in a bin (input to the acceleration figure).
  std::vector<std::uint8_t> retained() const;
  /// Fraction of the ky-kz grid holding a sample for (bin, encoding).
  double fill_fraction(int b, int e) const;
};

BinnedKSpace assemble(const phantom::RawAcquisition& acq, const BinAssignment& assignment,
                      std::span<const double> weights);

}  // namespace flowforge::binning
