#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowforge/flow.hpp"
#include "flowforge/gating.hpp"
#include "flowforge/phantom.hpp"
#include "flowforge/recon.hpp"
#include "flowforge/sampling.hpp"

namespace flowforge::pipeline {

/// Analysis plane with a circular ROI given relative to the grid centre.
struct PlaneSpec {
  std::string label;
  int axis = 2;
  int index = 0;
  std::array<double, 2> center_offset{0.0, 0.0};  // voxels, in remaining-axis order
  double radius = 1.0;
  int direction = 1;
};

struct RunConfig {
  std::string preset = "desk-small";
  std::uint64_t seed = 1;
  std::string out = "run";
  int threads = 0;  // 0 keeps the OpenMP default
  phantom::PhantomConfig phantom;
  sampling::SamplingConfig sampling;  // n_y, n_z, encodings and n_readouts follow the phantom
  gating::GatingConfig gating;
  int n_bins = 8;
  recon::ReconConfig recon;
  /// Temporal aliasing correction. Off unless the programmed peak velocity
  /// exceeds VENC; on unaliased data it only perturbs low-signal voxels.
  bool unwrap = false;
  bool background_correction = true;
  flow::BackgroundConfig background;
  std::vector<PlaneSpec> planes;

  /// Copies the global seed and grid into the nested sections.
  void expand();
  void validate() const;
};

/// Known presets: desk-small, paper-3t, paper-1.5t.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const RunConfig& c);
/// Starts from the preset named in `j` (default desk-small) and applies the
/// remaining keys on top.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Planes spanning the phantom tube: quarter, half and three-quarter length.
std::vector<PlaneSpec> default_planes(const phantom::PhantomConfig& p);
flow::AnalysisPlane resolve_plane(const PlaneSpec& spec, const Grid3& grid);

// Stages. Each one reads only the artifacts written by earlier stages.

/// Writes the schedule CSV plus density_e<k>.svg and pattern.json beside it.
void stage_pattern(const sampling::SamplingConfig& cfg, const std::string& schedule_csv);
/// Simulates the phantom along `schedule_csv` (generated from `sampling` when empty).
void stage_simulate(const phantom::PhantomConfig& cfg, const sampling::SamplingConfig& sampling,
                    const std::string& schedule_csv, const std::string& dataset_dir);
void stage_gate(const std::string& dataset_dir, const gating::GatingConfig& cfg,
                const std::string& gating_json);
void stage_bin(const std::string& dataset_dir, const std::string& gating_json, int n_bins,
               const std::string& binned_dir);
void stage_recon(const std::string& binned_dir, const recon::ReconConfig& cfg, const std::string& images_dir);
void stage_flow(const std::string& images_dir, double venc, const std::vector<flow::AnalysisPlane>& planes,
                bool unwrap, bool background, const flow::BackgroundConfig& bg_cfg,
                const std::string& report_json);
/// Measured-vs-truth pairs from a flow report and a simulated dataset.
void write_truth_pairs(const std::string& report_json, const std::string& dataset_dir,
                       const std::string& pairs_csv);
void stage_report(const std::string& pairs_csv, const std::string& report_json);

/// Reference values for a simulated dataset: mean RR of the regular beats and
/// the bin-averaged peak of the programmed waveform.
phantom::FlowTruth dataset_truth(const phantom::GroundTruth& truth, int n_bins);

/// Runs every stage under config.out and writes config.json and manifest.json.
/// A failing stage rethrows with its name prefixed; the manifest records it.
nlohmann::json run(RunConfig config);

}  // namespace flowforge::pipeline
