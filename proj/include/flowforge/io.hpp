#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowforge/binning.hpp"
#include "flowforge/flow.hpp"
#include "flowforge/gating.hpp"
#include "flowforge/phantom.hpp"
#include "flowforge/recon.hpp"
#include "flowforge/stats.hpp"

// On-disk formats. Binary arrays are little-endian; complex values are
// float32 (real, imag) pairs.
namespace flowforge::io {

using nlohmann::json;

json to_json(const sampling::SamplingConfig& c);
sampling::SamplingConfig sampling_from_json(const json& j, sampling::SamplingConfig base = {});
json to_json(const phantom::PhantomConfig& c);
phantom::PhantomConfig phantom_from_json(const json& j, phantom::PhantomConfig base = {});
json to_json(const gating::GatingConfig& c);
gating::GatingConfig gating_config_from_json(const json& j, gating::GatingConfig base = {});
json to_json(const recon::FistaConfig& c);
recon::FistaConfig fista_from_json(const json& j, recon::FistaConfig base = {});

json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);

/// Dataset directory: header.json, schedule.csv, data.bin and, when ground
/// truth is present, truth.json + truth.bin.
void write_dataset(const phantom::RawAcquisition& acq, const std::string& dir);
phantom::RawAcquisition read_dataset(const std::string& dir);

void write_gating(const gating::GatingResult& g, const std::string& path);
gating::GatingResult read_gating(const std::string& path);

/// Binned directory: index.json, per-bin bin_XX.data / .weights / .provenance
/// ([enc][ky][kz][x][coil] complex64, float64, int64) and per-readout
/// readout_bin.bin (int32) + readout_fate.bin (uint8).
void write_binned(const binning::BinnedKSpace& b, const std::string& dir);
binning::BinnedKSpace read_binned(const std::string& dir);

/// Image directory: images.bin ([enc][bin][x][y][z] complex64), maps.bin,
/// meta.json and convergence_e<k>.csv per encoding.
void write_images(const recon::ReconResult& r, const recon::FistaConfig& cfg, const std::string& dir);
recon::ImageSeries read_images(const std::string& dir);

void write_flow_report(const std::vector<flow::FlowEntry>& entries, const flow::VelocityStudy& study,
                       const flow::BackgroundResult* background, const std::string& path);

/// {"voxels": [[u, v], ...]} or {"circle": {"center": [u, v], "radius": r}}.
std::vector<std::array<int, 2>> read_roi(const std::string& path, const Grid3& grid, int axis);

void write_complex64(const std::string& path, const std::vector<cplx>& data);
std::vector<cplx> read_complex64(const std::string& path, std::size_t expected);

std::string sha256_file(const std::string& path);

}  // namespace flowforge::io
