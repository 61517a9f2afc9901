#include "flowforge/binning.hpp"

#include <algorithm>
#include <cmath>

#include "flowforge/errors.hpp"

namespace flowforge::binning {

std::string fate_name(Fate f) {
  switch (f) {
    case Fate::binned: return "binned";
    case Fate::late_diastole: return "late_diastole";
    case Fate::arrhythmia: return "arrhythmia";
    case Fate::duplicate: return "duplicate";
    case Fate::no_trigger: return "no_trigger";
    case Fate::self_gating: return "self_gating";
  }
  return "unknown";
}

BinAssignment assign_bins(const sampling::SamplingSchedule& schedule, std::span<const double> times,
                          const gating::ArrhythmiaResult& beats, int n_bins) {
  if (n_bins < 1) throw ConfigError("assign_bins: n_bins must be >= 1");
  if (times.size() != schedule.size()) throw DataError("assign_bins: times do not match the schedule");
  if (beats.beats.empty()) throw DataError("assign_bins: no beats");

  double rr_sum = 0.0;
  std::size_t accepted = 0;
  for (const auto& b : beats.beats) {
    if (b.status == gating::BeatStatus::accepted) {
      rr_sum += b.rr();
      ++accepted;
    }
  }
  if (accepted == 0) throw DataError("assign_bins: no accepted beats");

  BinAssignment out;
  out.n_bins = n_bins;
  out.mean_rr_s = rr_sum / static_cast<double>(accepted);
  out.bin_width_s = out.mean_rr_s / n_bins;
  out.bin.assign(schedule.size(), -1);
  out.fate.assign(schedule.size(), Fate::no_trigger);

  const auto& bs = beats.beats;
  const double first = bs.front().start;
  const double last = bs.back().end;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule.entries[i].is_sg) {
      out.fate[i] = Fate::self_gating;
      continue;
    }
    const double t = times[i];
    if (t < first) continue;
    double start = last;
    bool rejected = false;
    if (t < last) {
      const auto it = std::upper_bound(bs.begin(), bs.end(), t,
                                       [](double v, const gating::Beat& b) { return v < b.start; });
      const auto& beat = *(it - 1);
      start = beat.start;
      rejected = beat.status != gating::BeatStatus::accepted;
    }
    if (rejected) {
      out.fate[i] = Fate::arrhythmia;
      continue;
    }
    const auto b = static_cast<long long>(std::floor((t - start) / out.bin_width_s));
    if (b >= n_bins) {
      out.fate[i] = Fate::late_diastole;
      continue;
    }
    out.bin[i] = static_cast<int>(b);
    out.fate[i] = Fate::binned;
  }
  return out;
}

std::array<std::size_t, kFateCount> BinnedKSpace::fate_counts() const {
  std::array<std::size_t, kFateCount> c{};
  for (Fate f : fate) ++c[static_cast<int>(f)];
  return c;
}

std::vector<std::uint8_t> BinnedKSpace::retained() const {
  std::vector<std::uint8_t> r(fate.size());
  for (std::size_t i = 0; i < fate.size(); ++i) r[i] = fate[i] == Fate::binned ? 1 : 0;
  return r;
}

double BinnedKSpace::fill_fraction(int b, int e) const {
  std::size_t filled = 0;
  for (int ky = 0; ky < grid.ny; ++ky) {
    for (int kz = 0; kz < grid.nz; ++kz) filled += provenance[cell(b, e, ky, kz)] >= 0 ? 1 : 0;
  }
  return static_cast<double>(filled) / (static_cast<double>(grid.ny) * grid.nz);
}

BinnedKSpace assemble(const phantom::RawAcquisition& acq, const BinAssignment& a,
                      std::span<const double> weights) {
  const std::size_t n = acq.schedule.size();
  if (a.bin.size() != n || a.fate.size() != n || weights.size() != n) {
    throw DataError("assemble: bin assignment and weights must cover every readout");
  }
  BinnedKSpace out;
  out.grid = acq.header.grid;
  out.n_bins = a.n_bins;
  out.encodings = acq.header.encodings;
  out.n_coils = acq.header.n_coils;
  out.bin_width_s = a.bin_width_s;
  out.tr = acq.header.tr;
  out.venc = acq.header.venc;
  out.voxel_size_mm = acq.header.voxel_size_mm;
  out.fate = a.fate;
  out.readout_bin = a.bin;
  out.weight_mask.assign(out.n_cells(), 0.0);
  out.provenance.assign(out.n_cells(), -1);
  out.data.assign(out.n_cells() * out.cell_stride(), cplxf{});

  std::vector<std::vector<std::size_t>> per_bin(a.n_bins);
  for (std::size_t i = 0; i < n; ++i) {
    if (a.fate[i] == Fate::binned) per_bin[a.bin[i]].push_back(i);
  }

  // Bins own disjoint cells, so they can be filled concurrently; within a bin
  // readouts are visited in time order, so strict '>' keeps the earliest on ties.
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < a.n_bins; ++b) {
    for (std::size_t i : per_bin[b]) {
      const auto& e = acq.schedule.entries[i];
      const std::size_t c = out.cell(b, e.encoding - 1, e.ky - 1, e.kz - 1);
      const std::int64_t prev = out.provenance[c];
      if (prev >= 0 && !(weights[i] > weights[prev])) {
        out.fate[i] = Fate::duplicate;
        continue;
      }
      if (prev >= 0) out.fate[prev] = Fate::duplicate;
      out.provenance[c] = static_cast<std::int64_t>(i);
      out.weight_mask[c] = weights[i];
    }
  }

  const auto ncells = static_cast<std::ptrdiff_t>(out.n_cells());
  const int nx = out.grid.nx, nc = out.n_coils;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < ncells; ++c) {
    const std::int64_t src = out.provenance[c];
    if (src < 0 || out.weight_mask[c] == 0.0) continue;
    cplxf* dst = out.data.data() + c * out.cell_stride();
    for (int coil = 0; coil < nc; ++coil) {
      const auto line = acq.line(static_cast<std::size_t>(src), coil);
      for (int x = 0; x < nx; ++x) dst[x * nc + coil] = line[x];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.fate[i] != Fate::binned) out.readout_bin[i] = -1;
  }
  return out;
}

}  // namespace flowforge::binning
