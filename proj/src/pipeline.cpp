#include "flowforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>

#include <omp.h>

#include "flowforge/binning.hpp"
#include "flowforge/errors.hpp"
#include "flowforge/io.hpp"
#include "flowforge/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace flowforge::pipeline {

namespace {

constexpr const char* kVersion = "1.0.0";

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

std::string sibling(const std::string& path, const std::string& name) {
  const fs::path p(path);
  return (p.has_parent_path() ? p.parent_path() / name : fs::path(name)).string();
}

void ensure_parent(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

std::vector<PlaneSpec> default_planes(const phantom::PhantomConfig& p) {
  const int n = p.grid.dim(p.tube_axis);
  const char* axis_name[] = {"x", "y", "z"};
  std::vector<PlaneSpec> planes;
  for (int q : {1, 2, 3}) {
    PlaneSpec s;
    s.axis = p.tube_axis;
    s.index = q * n / 4;
    s.label = std::string(axis_name[s.axis]) + std::to_string(s.index);
    s.center_offset = p.tube_center;
    // Partial-volume voxels at the tube wall carry flow; two extra voxels keep them inside.
    s.radius = p.tube_radius + 2.0;
    planes.push_back(s);
  }
  return planes;
}

flow::AnalysisPlane resolve_plane(const PlaneSpec& s, const Grid3& g) {
  if (s.axis < 0 || s.axis > 2) throw ConfigError("plane axis must be 0, 1 or 2");
  if (s.index < 0 || s.index >= g.dim(s.axis)) throw ConfigError("plane " + s.label + " index outside the grid");
  const int ua = s.axis == 0 ? 1 : 0;
  const int va = s.axis == 2 ? 1 : 2;
  flow::AnalysisPlane p;
  p.label = s.label;
  p.axis = s.axis;
  p.index = s.index;
  p.direction = s.direction;
  p.roi = flow::circle_roi(g, s.axis,
                           {g.dim(ua) / 2 + s.center_offset[0], g.dim(va) / 2 + s.center_offset[1]},
                           s.radius);
  if (p.roi.empty()) throw ConfigError("plane " + s.label + " has an empty ROI");
  return p;
}

std::vector<std::string> preset_names() { return {"desk-small", "paper-3t", "paper-1.5t"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  auto& p = c.phantom;
  if (name == "desk-small") {
    p.grid = {32, 32, 8};
    p.voxel_size_mm = 2.0;
    p.n_coils = 4;
    p.duration = 60.0;
    p.tr = 0.014;
    p.venc = 150.0;
    p.v_peak = 100.0;
    p.noise_sigma = 0.05;
    c.n_bins = 8;
  } else if (name == "paper-3t") {
    // 3T volunteer protocol on a desk grid: TR 4.0 ms, VENC 150 cm/s, 5 min, 20 bins.
    p.grid = {32, 48, 28};
    p.voxel_size_mm = 2.4;
    p.n_coils = 4;
    p.duration = 300.0;
    p.tr = 0.004;
    p.venc = 150.0;
    p.v_peak = 100.0;
    p.noise_sigma = 0.05;
    c.n_bins = 20;
  } else if (name == "paper-1.5t") {
    // 1.5T patient protocol: TR 4.4 ms, VENC 200 cm/s, 3.1 mm voxels.
    p.grid = {32, 48, 28};
    p.voxel_size_mm = 3.1;
    p.n_coils = 4;
    p.duration = 300.0;
    p.tr = 0.0044;
    p.venc = 200.0;
    p.v_peak = 130.0;
    p.noise_sigma = 0.05;
    c.n_bins = 20;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.sampling.sg_interval = 9;
  c.planes = default_planes(p);
  c.expand();
  return c;
}

void RunConfig::expand() {
  phantom.seed = seed;
  sampling.n_y = phantom.grid.ny;
  sampling.n_z = phantom.grid.nz;
  sampling.encodings = 4;
  sampling.n_readouts = phantom.n_readouts();
}

void RunConfig::validate() const {
  phantom.validate();
  sampling.validate();
  if (sampling.n_y != phantom.grid.ny || sampling.n_z != phantom.grid.nz) {
    throw ConfigError("sampling grid does not match the phantom grid");
  }
  if (n_bins < 1) throw ConfigError("n_bins must be positive");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (out.empty()) throw ConfigError("output directory is empty");
  for (const auto& s : planes) resolve_plane(s, phantom.grid);
}

json to_json(const RunConfig& c) {
  json planes = json::array();
  for (const auto& s : c.planes) {
    planes.push_back({{"label", s.label},
                      {"axis", s.axis},
                      {"index", s.index},
                      {"center_offset", s.center_offset},
                      {"radius", s.radius},
                      {"direction", s.direction}});
  }
  return {{"preset", c.preset},
          {"seed", c.seed},
          {"out", c.out},
          {"threads", c.threads},
          {"phantom", io::to_json(c.phantom)},
          {"sampling", io::to_json(c.sampling)},
          {"gating", io::to_json(c.gating)},
          {"n_bins", c.n_bins},
          {"recon",
           {{"fista", io::to_json(c.recon.fista)},
            {"sensitivity",
             {{"window", c.recon.sensitivity.window},
              {"apodization", c.recon.sensitivity.apodization},
              {"mask_fraction", c.recon.sensitivity.mask_fraction}}},
            {"normalize", c.recon.normalize}}},
          {"flow",
           {{"unwrap", c.unwrap},
            {"background_correction", c.background_correction},
            {"magnitude_percentile", c.background.magnitude_percentile},
            {"max_temporal_sd", c.background.max_temporal_sd},
            {"min_voxels", c.background.min_voxels},
            {"planes", planes}}}};
}

RunConfig run_config_from_json(const json& j) {
  try {
    RunConfig c = preset(j.value("preset", std::string("desk-small")));
    take(j, "seed", c.seed);
    take(j, "out", c.out);
    take(j, "threads", c.threads);
    if (j.contains("phantom")) c.phantom = io::phantom_from_json(j["phantom"], c.phantom);
    if (j.contains("sampling")) c.sampling = io::sampling_from_json(j["sampling"], c.sampling);
    if (j.contains("gating")) c.gating = io::gating_config_from_json(j["gating"], c.gating);
    take(j, "n_bins", c.n_bins);
    if (j.contains("recon")) {
      const auto& r = j["recon"];
      if (r.contains("fista")) c.recon.fista = io::fista_from_json(r["fista"], c.recon.fista);
      if (r.contains("sensitivity")) {
        const auto& s = r["sensitivity"];
        take(s, "window", c.recon.sensitivity.window);
        take(s, "apodization", c.recon.sensitivity.apodization);
        take(s, "mask_fraction", c.recon.sensitivity.mask_fraction);
      }
      take(r, "normalize", c.recon.normalize);
    }
    bool planes_given = false;
    c.unwrap = c.phantom.v_peak > c.phantom.venc;
    if (j.contains("flow")) {
      const auto& f = j["flow"];
      take(f, "unwrap", c.unwrap);
      take(f, "background_correction", c.background_correction);
      take(f, "magnitude_percentile", c.background.magnitude_percentile);
      take(f, "max_temporal_sd", c.background.max_temporal_sd);
      take(f, "min_voxels", c.background.min_voxels);
      if (f.contains("planes")) {
        planes_given = true;
        c.planes.clear();
        for (const auto& p : f["planes"]) {
          PlaneSpec s;
          take(p, "label", s.label);
          take(p, "axis", s.axis);
          take(p, "index", s.index);
          take(p, "center_offset", s.center_offset);
          take(p, "radius", s.radius);
          take(p, "direction", s.direction);
          c.planes.push_back(s);
        }
      }
    }
    // Planes follow a changed phantom unless given explicitly. expand() makes
    // the top-level seed win over phantom.seed.
    if (!planes_given && j.contains("phantom")) c.planes = default_planes(c.phantom);
    c.expand();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void stage_pattern(const sampling::SamplingConfig& cfg, const std::string& schedule_csv) {
  const auto schedule = sampling::generate_schedule(cfg);
  ensure_parent(schedule_csv);
  sampling::write_schedule_csv(schedule, schedule_csv);
  for (int e = 1; e <= cfg.encodings; ++e) {
    write_text(sibling(schedule_csv, "density_e" + std::to_string(e) + ".svg"), sampling::density_svg(schedule, e));
  }
  const std::vector<double> ones(schedule.size(), 1.0);
  const auto fom = sampling::figure_of_merit(schedule, ones, static_cast<double>(cfg.n_y) * cfg.n_z, 1,
                                             cfg.encodings);
  io::write_json(sibling(schedule_csv, "pattern.json"),
                 {{"sampling", io::to_json(cfg)},
                  {"readouts", schedule.size()},
                  {"sg_readouts", schedule.sg_count()},
                  {"r_max", cfg.r_max()},
                  {"density_offset", cfg.density_offset()},
                  {"acceleration_single_frame", fom.acceleration}});
}

void stage_simulate(const phantom::PhantomConfig& cfg, const sampling::SamplingConfig& sampling_cfg,
                    const std::string& schedule_csv, const std::string& dataset_dir) {
  cfg.validate();
  const auto schedule = schedule_csv.empty() ? sampling::generate_schedule(sampling_cfg)
                                             : sampling::read_schedule_csv(schedule_csv, sampling_cfg);
  const auto acq = phantom::acquire(cfg, schedule);
  io::write_dataset(acq, dataset_dir);
}

void stage_gate(const std::string& dataset_dir, const gating::GatingConfig& cfg, const std::string& gating_json) {
  const auto acq = io::read_dataset(dataset_dir);
  const auto g = gating::gate(acq, cfg);
  ensure_parent(gating_json);
  io::write_gating(g, gating_json);
  write_text(sibling(gating_json, "gating_traces.svg"), gating::traces_svg(g));
}

void stage_bin(const std::string& dataset_dir, const std::string& gating_json, int n_bins,
               const std::string& binned_dir) {
  const auto acq = io::read_dataset(dataset_dir);
  const auto g = io::read_gating(gating_json);
  if (g.respiration.weights.size() != acq.schedule.size()) {
    throw DataError(gating_json + ": weights do not match the dataset length");
  }
  std::vector<double> times(acq.schedule.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = acq.time(i);
  const auto assignment = binning::assign_bins(acq.schedule, times, g.beats, n_bins);
  const auto binned = binning::assemble(acq, assignment, g.respiration.weights);
  io::write_binned(binned, binned_dir);

  const auto& h = acq.header;
  const auto retained = binned.retained();
  const auto fom = sampling::figure_of_merit(acq.schedule, g.respiration.weights,
                                             static_cast<double>(h.grid.ny) * h.grid.nz, n_bins, h.encodings,
                                             retained);
  io::write_json((fs::path(binned_dir) / "summary.json").string(),
                 {{"efficiency_percent", fom.efficiency_percent},
                  {"acceleration", fom.acceleration},
                  {"mean_rr_s", assignment.mean_rr_s},
                  {"bin_width_s", assignment.bin_width_s}});
}

void stage_recon(const std::string& binned_dir, const recon::ReconConfig& cfg, const std::string& images_dir) {
  const auto binned = io::read_binned(binned_dir);
  const auto result = recon::reconstruct(binned, cfg);
  io::write_images(result, cfg.fista, images_dir);
}

void stage_flow(const std::string& images_dir, double venc, const std::vector<flow::AnalysisPlane>& planes,
                bool unwrap, bool background, const flow::BackgroundConfig& bg_cfg,
                const std::string& report_json) {
  const auto images = io::read_images(images_dir);
  auto study = flow::decode_velocity(images, venc > 0.0 ? venc : images.venc);
  if (unwrap) flow::unwrap_temporal(study);
  flow::BackgroundResult bg;
  if (background) {
    // Keep the analysed vessels out of the static-tissue fit.
    std::vector<std::uint8_t> exclude(study.grid.size(), 0);
    for (const auto& p : planes) {
      for (const auto& uv : p.roi) {
        for (int k = 0; k < study.grid.dim(p.axis); ++k) {
          const int x = p.axis == 0 ? k : uv[0];
          const int y = p.axis == 1 ? k : (p.axis == 0 ? uv[0] : uv[1]);
          const int z = p.axis == 2 ? k : uv[1];
          exclude[study.grid.index(x, y, z)] = 1;
        }
      }
    }
    bg = flow::background_correct(study, bg_cfg, exclude);
  }
  std::vector<flow::FlowEntry> entries;
  for (const auto& p : planes) entries.push_back(flow::quantify(study, p));
  ensure_parent(report_json);
  io::write_flow_report(entries, study, background ? &bg : nullptr, report_json);
  write_text(sibling(report_json, "flow_curves.svg"), flow::flow_curve_svg(entries));
}

phantom::FlowTruth dataset_truth(const phantom::GroundTruth& truth, int n_bins) {
  const auto& p = truth.phantom;
  const auto& s = truth.beat_starts;
  std::vector<double> rr;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const bool irregular = std::any_of(p.arrhythmia_beats.begin(), p.arrhythmia_beats.end(),
                                       [&](const auto& b) { return b.beat == static_cast<int>(k); });
    if (!irregular && s[k] >= 0.0 && s[k + 1] <= p.duration) rr.push_back(s[k + 1] - s[k]);
  }
  if (rr.empty()) throw DataError("ground truth holds no complete regular beat");
  const double mean_rr = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
  auto t = phantom::analytic_flow_truth(p, mean_rr);
  double peak = 0.0;
  for (int b = 0; b < n_bins; ++b) peak = std::max(peak, phantom::bin_averaged_waveform(p, b, n_bins));
  t.peak_velocity_cm_s = p.v_peak * peak;
  return t;
}

void write_truth_pairs(const std::string& report_json, const std::string& dataset_dir,
                       const std::string& pairs_csv) {
  const auto report = io::read_json(report_json);
  const auto truth_json = io::read_json((fs::path(dataset_dir) / "truth.json").string());
  phantom::GroundTruth truth;
  truth.phantom = io::phantom_from_json(truth_json.at("phantom"));
  truth.beat_starts = truth_json.at("beat_starts").get<std::vector<double>>();
  const auto& planes = report.at("planes");
  if (planes.empty()) throw DataError(report_json + ": no planes");
  const int n_bins = static_cast<int>(planes[0].at("flow_curve_ml_s").size());
  const auto t = dataset_truth(truth, n_bins);
  std::ofstream out(pairs_csv);
  if (!out) throw DataError("cannot write " + pairs_csv);
  out << "label,measured,reference\n";
  out.precision(12);
  for (const auto& p : planes) {
    const auto label = p.at("label").get<std::string>();
    out << label << ":net_flow_ml," << p.at("net_flow_ml").get<double>() << ',' << t.net_flow_ml << '\n';
    out << label << ":peak_velocity_cm_s,"
        << p.at("peak_velocity_cm_s").get<double>() * p.at("peak_velocity_sign").get<int>() << ','
        << t.peak_velocity_cm_s << '\n';
  }
}

void stage_report(const std::string& pairs_csv, const std::string& report_json) {
  const auto pm = stats::read_pairs_csv(pairs_csv);
  pm.validate(2);
  const auto ba = stats::bland_altman(pm);
  const auto tt = stats::paired_ttest(pm);
  json r = {{"n", pm.a.size()},
            {"labels", pm.labels},
            {"bland_altman",
             {{"bias_percent", ba.bias_percent},
              {"loa_percent", ba.loa_percent},
              {"percent_errors", ba.percent_errors}}},
            {"paired_ttest",
             {{"t", tt.t}, {"p_two_sided", tt.p_two_sided}, {"dof", tt.dof}, {"degenerate", tt.degenerate}}}};
  double pr = std::nan("");
  try {
    pr = stats::pearson(pm);
    r["pearson_r"] = pr;
  } catch (const NumericalError& e) {
    r["pearson_r"] = nullptr;
    r["pearson_warning"] = e.what();
  }
  ensure_parent(report_json);
  io::write_json(report_json, r);
  write_text(sibling(report_json, "bland_altman.svg"), stats::bland_altman_svg(pm, ba));
  if (std::isfinite(pr)) write_text(sibling(report_json, "correlation.svg"), stats::correlation_svg(pm, pr));
}

namespace {

json checksums(const fs::path& root, const std::vector<std::string>& outputs) {
  json sums = json::object();
  for (const auto& o : outputs) {
    const fs::path p = root / o;
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) sums[fs::relative(f, root).generic_string()] = io::sha256_file(f.string());
    } else if (fs::exists(p)) {
      sums[o] = io::sha256_file(p.string());
    }
  }
  return sums;
}

template <typename E>
[[noreturn]] void rethrow_as(const std::string& stage, const E& e) {
  throw E("stage " + stage + ": " + e.what());
}

}  // namespace

json run(RunConfig c) {
  c.expand();
  c.validate();
  if (c.threads > 0) omp_set_num_threads(c.threads);
  const fs::path root(c.out);
  fs::create_directories(root);
  io::write_json((root / "config.json").string(), to_json(c));

  const auto at = [&](const char* name) { return (root / name).string(); };
  std::vector<flow::AnalysisPlane> planes;
  for (const auto& s : c.planes) planes.push_back(resolve_plane(s, c.phantom.grid));

  struct Stage {
    std::string name;
    std::vector<std::string> outputs;
    std::function<void()> body;
  };
  const std::vector<Stage> stages = {
      {"pattern", {"pattern"}, [&] { stage_pattern(c.sampling, at("pattern/schedule.csv")); }},
      {"simulate", {"dataset"},
       [&] { stage_simulate(c.phantom, c.sampling, at("pattern/schedule.csv"), at("dataset")); }},
      {"gate", {"gating.json", "gating_traces.svg"}, [&] { stage_gate(at("dataset"), c.gating, at("gating.json")); }},
      {"bin", {"binned"}, [&] { stage_bin(at("dataset"), at("gating.json"), c.n_bins, at("binned")); }},
      {"recon", {"images"}, [&] { stage_recon(at("binned"), c.recon, at("images")); }},
      {"flow", {"flow_report.json", "flow_curves.svg"},
       [&] {
         stage_flow(at("images"), 0.0, planes, c.unwrap, c.background_correction, c.background,
                    at("flow_report.json"));
       }},
      {"report", {"pairs.csv", "report.json", "bland_altman.svg", "correlation.svg"},
       [&] {
         write_truth_pairs(at("flow_report.json"), at("dataset"), at("pairs.csv"));
         stage_report(at("pairs.csv"), at("report.json"));
       }},
  };

  json manifest = {{"version", kVersion},
                   {"preset", c.preset},
                   {"seeds", {{"global", c.seed}, {"phantom", c.phantom.seed}}},
                   {"threads", c.threads > 0 ? c.threads : omp_get_max_threads()},
                   {"config", "config.json"},
                   {"stages", json::array()}};
  const auto finish = [&] { io::write_json(at("manifest.json"), manifest); };
  for (const auto& s : stages) {
    const auto t0 = std::chrono::steady_clock::now();
    json entry = {{"name", s.name}};
    try {
      s.body();
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
      manifest["stages"].push_back(entry);
      manifest["failed_stage"] = s.name;
      finish();
      if (auto* x = dynamic_cast<const ConfigError*>(&e)) rethrow_as(s.name, *x);
      if (auto* x = dynamic_cast<const DataError*>(&e)) rethrow_as(s.name, *x);
      if (auto* x = dynamic_cast<const NumericalError*>(&e)) rethrow_as(s.name, *x);
      throw std::runtime_error("stage " + s.name + ": " + e.what());
    }
    entry["status"] = "ok";
    entry["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    entry["checksums"] = checksums(root, s.outputs);
    manifest["stages"].push_back(entry);
  }
  finish();
  return manifest;
}

}  // namespace flowforge::pipeline
