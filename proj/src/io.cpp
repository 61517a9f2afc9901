#include "flowforge/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "flowforge/errors.hpp"

namespace fs = std::filesystem;

namespace flowforge::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; add byte swapping for this host");

namespace {

template <typename T>
void write_raw(const std::string& path, const T* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
  if (!out) throw DataError("failed writing " + path);
}

template <typename T>
std::vector<T> read_raw(const std::string& path, std::size_t expected) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw DataError("cannot open " + path);
  if (bytes != expected * sizeof(T)) {
    throw DataError(fs::path(path).filename().string() + ": length mismatch, expected " +
                    std::to_string(expected * sizeof(T)) + " bytes, found " + std::to_string(bytes));
  }
  std::vector<T> v(expected);
  std::ifstream in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("failed reading " + path);
  return v;
}

json grid_json(const Grid3& g) { return json::array({g.nx, g.ny, g.nz}); }

Grid3 grid_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("grid must be [nx, ny, nz]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

// JSON has no infinity; it is stored as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

json to_json(const sampling::SamplingConfig& c) {
  return {{"n_y", c.n_y},     {"n_z", c.n_z}, {"encodings", c.encodings}, {"n_readouts", c.n_readouts},
          {"sg_interval", c.sg_interval}, {"c", c.c}, {"d", c.d}, {"g_r", c.g_r},
          {"theta_0", c.theta_0}, {"r_0", c.r_0}};
}

sampling::SamplingConfig sampling_from_json(const json& j, sampling::SamplingConfig c) {
  take(j, "n_y", c.n_y);
  take(j, "n_z", c.n_z);
  take(j, "encodings", c.encodings);
  take(j, "n_readouts", c.n_readouts);
  take(j, "sg_interval", c.sg_interval);
  take(j, "c", c.c);
  take(j, "d", c.d);
  take(j, "g_r", c.g_r);
  take(j, "theta_0", c.theta_0);
  take(j, "r_0", c.r_0);
  return c;
}

json to_json(const phantom::PhantomConfig& c) {
  json arr = json::array();
  for (const auto& b : c.arrhythmia_beats) arr.push_back({{"beat", b.beat}, {"rr_scale", b.rr_scale}});
  return {{"grid", grid_json(c.grid)},
          {"voxel_size_mm", c.voxel_size_mm},
          {"tube_axis", c.tube_axis},
          {"tube_center", c.tube_center},
          {"tube_radius", c.tube_radius},
          {"v_peak", c.v_peak},
          {"venc", c.venc},
          {"allow_aliasing", c.allow_aliasing},
          {"heart_rate_hz", c.heart_rate_hz},
          {"resp_rate_hz", c.resp_rate_hz},
          {"resp_shift_mm", c.resp_shift_mm},
          {"rr_jitter_s", c.rr_jitter_s},
          {"arrhythmia_beats", arr},
          {"cardiac_modulation", c.cardiac_modulation},
          {"diastolic_flow_fraction", c.diastolic_flow_fraction},
          {"systolic_peak_phase", c.systolic_peak_phase},
          {"background_ramp_cm_s", c.background_ramp_cm_s},
          {"n_coils", c.n_coils},
          {"noise_sigma", c.noise_sigma},
          {"tr", c.tr},
          {"duration", c.duration},
          {"seed", c.seed}};
}

phantom::PhantomConfig phantom_from_json(const json& j, phantom::PhantomConfig c) {
  if (j.contains("grid")) c.grid = grid_from(j.at("grid"));
  take(j, "voxel_size_mm", c.voxel_size_mm);
  take(j, "tube_axis", c.tube_axis);
  take(j, "tube_center", c.tube_center);
  take(j, "tube_radius", c.tube_radius);
  take(j, "v_peak", c.v_peak);
  take(j, "venc", c.venc);
  take(j, "allow_aliasing", c.allow_aliasing);
  take(j, "heart_rate_hz", c.heart_rate_hz);
  take(j, "resp_rate_hz", c.resp_rate_hz);
  take(j, "resp_shift_mm", c.resp_shift_mm);
  take(j, "rr_jitter_s", c.rr_jitter_s);
  if (j.contains("arrhythmia_beats")) {
    c.arrhythmia_beats.clear();
    for (const auto& b : j.at("arrhythmia_beats")) {
      c.arrhythmia_beats.push_back({b.at("beat").get<int>(), b.at("rr_scale").get<double>()});
    }
  }
  take(j, "cardiac_modulation", c.cardiac_modulation);
  take(j, "diastolic_flow_fraction", c.diastolic_flow_fraction);
  take(j, "systolic_peak_phase", c.systolic_peak_phase);
  take(j, "background_ramp_cm_s", c.background_ramp_cm_s);
  take(j, "n_coils", c.n_coils);
  take(j, "noise_sigma", c.noise_sigma);
  take(j, "tr", c.tr);
  take(j, "duration", c.duration);
  take(j, "seed", c.seed);
  return c;
}

json to_json(const gating::GatingConfig& c) {
  return {{"cardiac_band", {c.surrogates.cardiac.low, c.surrogates.cardiac.high}},
          {"resp_band", {c.surrogates.respiratory.low, c.surrogates.respiratory.high}},
          {"kernel_seconds", c.surrogates.kernel_seconds},
          {"upsample", c.triggers.upsample},
          {"max_heart_rate_hz", c.triggers.max_heart_rate_hz},
          {"fixed_polarity", c.triggers.fixed_polarity},
          {"target_efficiency", c.target_efficiency},
          {"p", c.p}};
}

gating::GatingConfig gating_config_from_json(const json& j, gating::GatingConfig c) {
  if (j.contains("cardiac_band")) {
    c.surrogates.cardiac = {j["cardiac_band"][0].get<double>(), j["cardiac_band"][1].get<double>()};
  }
  if (j.contains("resp_band")) {
    c.surrogates.respiratory = {j["resp_band"][0].get<double>(), j["resp_band"][1].get<double>()};
  }
  take(j, "kernel_seconds", c.surrogates.kernel_seconds);
  take(j, "upsample", c.triggers.upsample);
  take(j, "max_heart_rate_hz", c.triggers.max_heart_rate_hz);
  take(j, "fixed_polarity", c.triggers.fixed_polarity);
  take(j, "target_efficiency", c.target_efficiency);
  take(j, "p", c.p);
  return c;
}

json to_json(const recon::FistaConfig& c) {
  return {{"lambda", c.lambda},           {"max_iters", c.max_iters},
          {"tol", c.tol},                 {"power_iters", c.power_iters},
          {"step_factor", c.step_factor}, {"divergence_factor", c.divergence_factor}};
}

recon::FistaConfig fista_from_json(const json& j, recon::FistaConfig c) {
  take(j, "lambda", c.lambda);
  take(j, "max_iters", c.max_iters);
  take(j, "tol", c.tol);
  take(j, "power_iters", c.power_iters);
  take(j, "step_factor", c.step_factor);
  take(j, "divergence_factor", c.divergence_factor);
  return c;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

void write_dataset(const phantom::RawAcquisition& acq, const std::string& dir) {
  fs::create_directories(dir);
  const auto& h = acq.header;
  json header = {{"format", "flowforge-dataset"},
                 {"version", 1},
                 {"endianness", "little"},
                 {"grid", grid_json(h.grid)},
                 {"tr", h.tr},
                 {"venc", h.venc},
                 {"encodings", h.encodings},
                 {"sg_interval", h.sg_interval},
                 {"n_coils", h.n_coils},
                 {"n_readouts", h.n_readouts},
                 {"voxel_size_mm", h.voxel_size_mm},
                 {"sampling", to_json(acq.schedule.config)},
                 {"schedule", "schedule.csv"},
                 {"data", {{"file", "data.bin"}, {"dtype", "complex64"}, {"layout", {"readout", "coil", "x"}}}}};
  write_json(path_in(dir, "header.json"), header);
  sampling::write_schedule_csv(acq.schedule, path_in(dir, "schedule.csv"));
  write_raw(path_in(dir, "data.bin"), acq.samples.data(), acq.samples.size());
  if (acq.truth) {
    const auto& t = *acq.truth;
    write_json(path_in(dir, "truth.json"), {{"phantom", to_json(t.phantom)},
                                            {"beat_starts", t.beat_starts},
                                            {"file", "truth.bin"},
                                            {"layout", {"readout", "[cardiac_phase, respiration]"}}});
    std::vector<float> tb(2 * t.cardiac_phase.size());
    for (std::size_t i = 0; i < t.cardiac_phase.size(); ++i) {
      tb[2 * i] = t.cardiac_phase[i];
      tb[2 * i + 1] = t.respiration[i];
    }
    write_raw(path_in(dir, "truth.bin"), tb.data(), tb.size());
  }
}

phantom::RawAcquisition read_dataset(const std::string& dir) {
  const json header = read_json(path_in(dir, "header.json"));
  phantom::RawAcquisition acq;
  try {
    auto& h = acq.header;
    h.grid = grid_from(header.at("grid"));
    h.tr = header.at("tr").get<double>();
    h.venc = header.at("venc").get<double>();
    h.encodings = header.at("encodings").get<int>();
    h.sg_interval = header.at("sg_interval").get<int>();
    h.n_coils = header.at("n_coils").get<int>();
    h.n_readouts = header.at("n_readouts").get<std::int64_t>();
    h.voxel_size_mm = header.at("voxel_size_mm").get<double>();
    if (header.value("endianness", "little") != "little") throw DataError("unsupported endianness");
    const auto cfg = sampling_from_json(header.at("sampling"));
    acq.schedule = sampling::read_schedule_csv(path_in(dir, "schedule.csv"), cfg);
  } catch (const json::exception& e) {
    throw DataError(path_in(dir, "header.json") + ": " + e.what());
  }
  const auto& h = acq.header;
  if (acq.schedule.size() != static_cast<std::size_t>(h.n_readouts)) {
    throw DataError("schedule.csv: " + std::to_string(acq.schedule.size()) + " rows, header declares " +
                    std::to_string(h.n_readouts) + " readouts");
  }
  const std::size_t n = static_cast<std::size_t>(h.n_readouts) * h.n_coils * h.grid.nx;
  acq.samples = read_raw<cplxf>(path_in(dir, "data.bin"), n);

  if (fs::exists(path_in(dir, "truth.json"))) {
    const json tj = read_json(path_in(dir, "truth.json"));
    phantom::GroundTruth t;
    t.phantom = phantom_from_json(tj.at("phantom"));
    t.beat_starts = tj.at("beat_starts").get<std::vector<double>>();
    const auto tb = read_raw<float>(path_in(dir, "truth.bin"), 2 * static_cast<std::size_t>(h.n_readouts));
    t.cardiac_phase.resize(h.n_readouts);
    t.respiration.resize(h.n_readouts);
    for (std::size_t i = 0; i < static_cast<std::size_t>(h.n_readouts); ++i) {
      t.cardiac_phase[i] = tb[2 * i];
      t.respiration[i] = tb[2 * i + 1];
    }
    acq.truth = std::move(t);
  }
  acq.validate();
  return acq;
}

void write_gating(const gating::GatingResult& g, const std::string& path) {
  json beats = json::array();
  for (const auto& b : g.beats.beats) {
    beats.push_back({{"start", b.start},
                     {"end", b.end},
                     {"status", b.status == gating::BeatStatus::accepted ? "accepted" : "arrhythmia"}});
  }
  const auto& r = g.respiration;
  const json j = {
      {"config", to_json(g.config)},
      {"sample_rate_hz", g.sample_rate_hz},
      {"sg_times", g.sg_times},
      {"v_c", g.v_c},
      {"v_r", g.v_r},
      {"triggers", g.triggers},
      {"beats", beats},
      {"mean_rr_s", g.beats.mean_rr},
      {"sd_rr_s", g.beats.sd_rr},
      {"respiration",
       {{"mu", r.mu},
        {"phi", number(r.phi)},
        {"p", r.p},
        {"target_efficiency", r.target_efficiency},
        {"achieved_efficiency", r.achieved_efficiency},
        {"target_attainable", r.target_attainable},
        {"gmm_converged", r.gmm_converged},
        {"warnings", r.warnings},
        {"v_r_interp", r.v_r_interp},
        {"weights", r.weights}}}};
  write_json(path, j);
}

gating::GatingResult read_gating(const std::string& path) {
  const json j = read_json(path);
  gating::GatingResult g;
  try {
    g.config = gating_config_from_json(j.at("config"));
    g.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    g.sg_times = j.at("sg_times").get<std::vector<double>>();
    g.v_c = j.at("v_c").get<std::vector<double>>();
    g.v_r = j.at("v_r").get<std::vector<double>>();
    g.triggers = j.at("triggers").get<std::vector<double>>();
    for (const auto& b : j.at("beats")) {
      g.beats.beats.push_back({b.at("start").get<double>(), b.at("end").get<double>(),
                               b.at("status").get<std::string>() == "accepted"
                                   ? gating::BeatStatus::accepted
                                   : gating::BeatStatus::arrhythmia});
    }
    g.beats.mean_rr = j.at("mean_rr_s").get<double>();
    g.beats.sd_rr = j.at("sd_rr_s").get<double>();
    const auto& r = j.at("respiration");
    auto& o = g.respiration;
    o.mu = r.at("mu").get<double>();
    o.phi = number_from(r.at("phi"));
    o.p = r.at("p").get<int>();
    o.target_efficiency = r.at("target_efficiency").get<double>();
    o.achieved_efficiency = r.at("achieved_efficiency").get<double>();
    o.target_attainable = r.at("target_attainable").get<bool>();
    o.gmm_converged = r.at("gmm_converged").get<bool>();
    o.warnings = r.at("warnings").get<std::vector<std::string>>();
    o.v_r_interp = r.at("v_r_interp").get<std::vector<double>>();
    o.weights = r.at("weights").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return g;
}

void write_binned(const binning::BinnedKSpace& b, const std::string& dir) {
  fs::create_directories(dir);
  const std::size_t per_bin_cells = static_cast<std::size_t>(b.encodings) * b.grid.ny * b.grid.nz;
  json files = json::array();
  for (int k = 0; k < b.n_bins; ++k) {
    std::ostringstream name;
    name << "bin_" << std::setw(2) << std::setfill('0') << k;
    const std::size_t c0 = b.cell(k, 0, 0, 0);
    write_raw(path_in(dir, name.str() + ".data"), b.data.data() + c0 * b.cell_stride(),
              per_bin_cells * b.cell_stride());
    write_raw(path_in(dir, name.str() + ".weights"), b.weight_mask.data() + c0, per_bin_cells);
    write_raw(path_in(dir, name.str() + ".provenance"), b.provenance.data() + c0, per_bin_cells);
    files.push_back(name.str());
  }
  std::vector<std::int32_t> rb(b.readout_bin.begin(), b.readout_bin.end());
  std::vector<std::uint8_t> rf(b.fate.size());
  for (std::size_t i = 0; i < rf.size(); ++i) rf[i] = static_cast<std::uint8_t>(b.fate[i]);
  write_raw(path_in(dir, "readout_bin.bin"), rb.data(), rb.size());
  write_raw(path_in(dir, "readout_fate.bin"), rf.data(), rf.size());

  json counts;
  const auto fc = b.fate_counts();
  for (int f = 0; f < binning::kFateCount; ++f) counts[binning::fate_name(static_cast<binning::Fate>(f))] = fc[f];
  json fill = json::array();
  for (int k = 0; k < b.n_bins; ++k) {
    json row = json::array();
    for (int e = 0; e < b.encodings; ++e) row.push_back(b.fill_fraction(k, e));
    fill.push_back(row);
  }
  write_json(path_in(dir, "index.json"),
             {{"format", "flowforge-binned"},
              {"version", 1},
              {"endianness", "little"},
              {"grid", grid_json(b.grid)},
              {"n_bins", b.n_bins},
              {"encodings", b.encodings},
              {"n_coils", b.n_coils},
              {"bin_width_s", b.bin_width_s},
              {"tr", b.tr},
              {"venc", b.venc},
              {"voxel_size_mm", b.voxel_size_mm},
              {"n_readouts", b.fate.size()},
              {"bins", files},
              {"layout", {{"data", "[enc][ky][kz][x][coil] complex64"},
                          {"weights", "[enc][ky][kz] float64"},
                          {"provenance", "[enc][ky][kz] int64"}}},
              {"fate_counts", counts},
              {"fill_fraction", fill}});
}

binning::BinnedKSpace read_binned(const std::string& dir) {
  const json j = read_json(path_in(dir, "index.json"));
  binning::BinnedKSpace b;
  std::size_t n_readouts = 0;
  std::vector<std::string> files;
  try {
    b.grid = grid_from(j.at("grid"));
    b.n_bins = j.at("n_bins").get<int>();
    b.encodings = j.at("encodings").get<int>();
    b.n_coils = j.at("n_coils").get<int>();
    b.bin_width_s = j.at("bin_width_s").get<double>();
    b.tr = j.at("tr").get<double>();
    b.venc = j.at("venc").get<double>();
    b.voxel_size_mm = j.at("voxel_size_mm").get<double>();
    n_readouts = j.at("n_readouts").get<std::size_t>();
    files = j.at("bins").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(path_in(dir, "index.json") + ": " + e.what());
  }
  if (files.size() != static_cast<std::size_t>(b.n_bins)) throw DataError("index.json: bin list does not match n_bins");
  const std::size_t per_bin_cells = static_cast<std::size_t>(b.encodings) * b.grid.ny * b.grid.nz;
  b.data.reserve(per_bin_cells * b.n_bins * b.cell_stride());
  for (const auto& f : files) {
    const auto d = read_raw<cplxf>(path_in(dir, f + ".data"), per_bin_cells * b.cell_stride());
    const auto w = read_raw<double>(path_in(dir, f + ".weights"), per_bin_cells);
    const auto p = read_raw<std::int64_t>(path_in(dir, f + ".provenance"), per_bin_cells);
    b.data.insert(b.data.end(), d.begin(), d.end());
    b.weight_mask.insert(b.weight_mask.end(), w.begin(), w.end());
    b.provenance.insert(b.provenance.end(), p.begin(), p.end());
  }
  const auto rb = read_raw<std::int32_t>(path_in(dir, "readout_bin.bin"), n_readouts);
  const auto rf = read_raw<std::uint8_t>(path_in(dir, "readout_fate.bin"), n_readouts);
  b.readout_bin.assign(rb.begin(), rb.end());
  b.fate.resize(n_readouts);
  for (std::size_t i = 0; i < n_readouts; ++i) {
    if (rf[i] >= binning::kFateCount) throw DataError("readout_fate.bin: invalid fate code");
    b.fate[i] = static_cast<binning::Fate>(rf[i]);
  }
  return b;
}

void write_complex64(const std::string& path, const std::vector<cplx>& data) {
  std::vector<cplxf> f(data.begin(), data.end());
  write_raw(path, f.data(), f.size());
}

std::vector<cplx> read_complex64(const std::string& path, std::size_t expected) {
  const auto f = read_raw<cplxf>(path, expected);
  return {f.begin(), f.end()};
}

void write_images(const recon::ReconResult& r, const recon::FistaConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  const auto& img = r.images;
  write_complex64(path_in(dir, "images.bin"), img.data);
  write_complex64(path_in(dir, "maps.bin"), r.maps.data);
  json enc = json::array();
  for (std::size_t e = 0; e < r.per_encoding.size(); ++e) {
    const auto& s = r.per_encoding[e];
    const std::string name = "convergence_e" + std::to_string(e + 1) + ".csv";
    std::ofstream out(path_in(dir, name));
    if (!out) throw DataError("cannot write " + path_in(dir, name));
    out << "iter,objective,data_term,l1_term,step\n" << std::setprecision(17);
    for (const auto& l : s.log) {
      out << l.iter << ',' << l.objective << ',' << l.data_term << ',' << l.l1_term << ',' << l.step << '\n';
    }
    enc.push_back({{"encoding", e + 1},
                   {"iterations", s.log.size()},
                   {"converged", s.converged},
                   {"lipschitz", s.lipschitz},
                   {"final_objective", s.log.empty() ? 0.0 : s.log.back().objective},
                   {"convergence_log", name}});
  }
  write_json(path_in(dir, "meta.json"),
             {{"format", "flowforge-images"},
              {"version", 1},
              {"endianness", "little"},
              {"grid", grid_json(img.grid)},
              {"encodings", img.encodings},
              {"n_bins", img.n_bins},
              {"voxel_size_mm", img.voxel_size_mm},
              {"bin_width_s", img.bin_width_s},
              {"venc", img.venc},
              {"n_coils", r.maps.n_coils},
              {"layout", "[enc][bin][x][y][z] complex64"},
              {"data_scale", r.data_scale},
              {"solver", r.solver},
              {"fista", to_json(cfg)},
              {"wavelet_skipped_axes", r.skipped_axes},
              {"per_encoding", enc}});
}

recon::ImageSeries read_images(const std::string& dir) {
  const json j = read_json(path_in(dir, "meta.json"));
  recon::ImageSeries img;
  try {
    img.grid = grid_from(j.at("grid"));
    img.encodings = j.at("encodings").get<int>();
    img.n_bins = j.at("n_bins").get<int>();
    img.voxel_size_mm = j.at("voxel_size_mm").get<double>();
    img.bin_width_s = j.at("bin_width_s").get<double>();
    img.venc = j.at("venc").get<double>();
  } catch (const json::exception& e) {
    throw DataError(path_in(dir, "meta.json") + ": " + e.what());
  }
  img.data = read_complex64(path_in(dir, "images.bin"),
                            static_cast<std::size_t>(img.encodings) * img.n_bins * img.grid.size());
  return img;
}

void write_flow_report(const std::vector<flow::FlowEntry>& entries, const flow::VelocityStudy& study,
                       const flow::BackgroundResult* bg, const std::string& path) {
  json planes = json::array();
  for (const auto& e : entries) {
    planes.push_back({{"label", e.label},
                      {"net_flow_ml", e.net_flow_ml},
                      {"peak_flow_ml_s", e.peak_flow_ml_s},
                      {"peak_velocity_cm_s", e.peak_velocity_cm_s},
                      {"peak_velocity_sign", e.peak_velocity_sign},
                      {"peak_bin", e.peak_bin},
                      {"flow_curve_ml_s", e.flow_curve_ml_s},
                      {"times_s", e.times_s}});
  }
  json corr = {{"unwrap_applied", study.unwrap_applied},
               {"unwrapped_voxels", study.unwrapped_voxels},
               {"background_poly_order", study.background_poly_order}};
  if (bg) {
    corr["background_mask_voxels"] = bg->mask_voxels;
    corr["background_applied"] = bg->applied;
    if (!bg->warning.empty()) corr["background_warning"] = bg->warning;
  }
  write_json(path, {{"venc", study.venc}, {"bin_width_s", study.bin_width_s}, {"corrections", corr}, {"planes", planes}});
}

std::vector<std::array<int, 2>> read_roi(const std::string& path, const Grid3& grid, int axis) {
  const json j = read_json(path);
  try {
    if (j.contains("voxels")) {
      auto roi = j.at("voxels").get<std::vector<std::array<int, 2>>>();
      const int du = axis == 0 ? grid.ny : grid.nx;
      const int dv = axis == 2 ? grid.ny : grid.nz;
      for (const auto& uv : roi) {
        if (uv[0] < 0 || uv[0] >= du || uv[1] < 0 || uv[1] >= dv) {
          throw DataError(path + ": ROI voxel (" + std::to_string(uv[0]) + ", " + std::to_string(uv[1]) +
                          ") outside the plane");
        }
      }
      return roi;
    }
    if (j.contains("circle")) {
      const auto& c = j.at("circle");
      return flow::circle_roi(grid, axis, c.at("center").get<std::array<double, 2>>(),
                              c.at("radius").get<double>());
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  throw DataError(path + ": expected \"voxels\" or \"circle\"");
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

}  // namespace flowforge::io
