#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowforge/sampling.hpp"
#include "flowforge/types.hpp"

namespace flowforge::phantom {

struct ArrhythmicBeat {
  int beat = 0;          // 0-based beat index
  double rr_scale = 1.0; // multiplies that beat's RR interval
};

/// Digital pulsatile-flow phantom: static tissue, a cardiac chamber whose
/// signal follows the cardiac cycle, and a straight tube with Poiseuille flow.
struct PhantomConfig {
  Grid3 grid{32, 32, 8};
  double voxel_size_mm = 2.0;
  int tube_axis = 2;                          // flow direction (0=x,1=y,2=z)
  std::array<double, 2> tube_center{3.0, -4.0};  // in-plane offset from grid centre, voxels
  double tube_radius = 7.0;                   // voxels
  double v_peak = 100.0;                      // cm/s, centreline at waveform maximum
  double venc = 150.0;                        // cm/s
  bool allow_aliasing = false;
  double heart_rate_hz = 1.25;
  double resp_rate_hz = 0.25;
  double resp_shift_mm = 6.0;                 // along x (readout / SI)
  double rr_jitter_s = 0.02;
  std::vector<ArrhythmicBeat> arrhythmia_beats;
  double cardiac_modulation = 0.45;           // chamber signal swing, 0 = static
  double diastolic_flow_fraction = 0.2;
  double systolic_peak_phase = 0.3;
  /// Encoding-dependent offset velocity (cm/s) across the field of view along
  /// y, one value per velocity component; models eddy-current background phase.
  std::array<double, 3> background_ramp_cm_s{0.0, 0.0, 0.0};
  int n_coils = 4;
  double noise_sigma = 0.05;
  double tr = 0.014;
  double duration = 60.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::int64_t n_readouts() const;
};

/// Beat-start times covering the scan; beat k spans [starts[k], starts[k+1]).
struct BeatModel {
  std::vector<double> starts;

  /// Index k with starts[k] <= t < starts[k+1], or -1 outside the model.
  int beat_index(double t) const;
  double cardiac_phase(double t) const;
  double rr(int k) const { return starts[k + 1] - starts[k]; }
  /// Beat starts that fall inside [t0, t1].
  std::vector<double> triggers_in(double t0, double t1) const;
};

BeatModel make_beats(const PhantomConfig& cfg);

/// Respiratory displacement in [0, 1]; 0 is end-expiration.
double respiratory_displacement(const PhantomConfig& cfg, double t);
/// Pulsatile flow waveform in [diastolic fraction, 1].
double flow_waveform(const PhantomConfig& cfg, double cardiac_phase);
/// Chamber signal modulation in [0, 1], maximal at beat start (end-diastole).
double chamber_waveform(double cardiac_phase);

struct PhysiologicalState {
  double cardiac_phase = 0.0;
  double respiration = 0.0;
};

/// Complex image of one velocity encoding (1-based; 1 is the reference).
Volume simulate_object(const PhantomConfig& cfg, const PhysiologicalState& state, int encoding);
Volume simulate_object(const PhantomConfig& cfg, const BeatModel& beats, double t, int encoding);

/// Programmed velocity (cm/s) of component `component` (0..2) at a voxel.
double true_velocity(const PhantomConfig& cfg, const PhysiologicalState& state, int component,
                     int x, int y, int z);

/// Synthetic complex coil sensitivities [coil][x][y][z].
std::vector<Volume> coil_maps(const PhantomConfig& cfg);

/// Object mask (tissue, chamber and tube) at end-expiration.
std::vector<std::uint8_t> object_mask(const PhantomConfig& cfg);

struct AcquisitionHeader {
  Grid3 grid;
  double tr = 0.0;
  double venc = 0.0;
  int encodings = 4;
  int sg_interval = 9;
  int n_coils = 1;
  std::int64_t n_readouts = 0;
  double voxel_size_mm = 1.0;
};

struct GroundTruth {
  PhantomConfig phantom;
  std::vector<double> beat_starts;
  std::vector<float> cardiac_phase;  // per readout
  std::vector<float> respiration;    // per readout
};

/// Multi-coil k-space lines in schedule order, layout [readout][coil][x].
struct RawAcquisition {
  AcquisitionHeader header;
  sampling::SamplingSchedule schedule;
  std::vector<cplxf> samples;
  std::optional<GroundTruth> truth;

  double time(std::size_t readout) const { return static_cast<double>(readout) * header.tr; }
  std::span<const cplxf> line(std::size_t readout, int coil) const {
    const std::size_t nx = static_cast<std::size_t>(header.grid.nx);
    return {samples.data() + (readout * header.n_coils + coil) * nx, nx};
  }
  void validate() const;
};

/// Sample the phantom along the schedule at t = readout * TR.
RawAcquisition acquire(const PhantomConfig& cfg, const sampling::SamplingSchedule& schedule);

/// Poiseuille analytic values for one mean-RR beat.
struct FlowTruth {
  double mean_rr_s = 0.0;
  double net_flow_ml = 0.0;       // analytic integral over one mean beat
  double peak_flow_ml_s = 0.0;    // instantaneous maximum
  double peak_velocity_cm_s = 0.0;
};
FlowTruth analytic_flow_truth(const PhantomConfig& cfg, double mean_rr_s);

/// Waveform averaged over bin b of n bins (bin width = 1/n of the cycle).
double bin_averaged_waveform(const PhantomConfig& cfg, int bin, int n_bins);

}  // namespace flowforge::phantom
