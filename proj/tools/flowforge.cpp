// Command-line front end. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 numerical failure, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"

#include "flowforge/errors.hpp"
#include "flowforge/io.hpp"
#include "flowforge/pipeline.hpp"

using namespace flowforge;

namespace {

gating::Band parse_band(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("band must be LOW:HIGH, got '" + s + "'");
  try {
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("band must be LOW:HIGH, got '" + s + "'");
  }
}

// "z:16" -> (axis 2, index 16)
std::pair<int, int> parse_plane(const std::string& s) {
  const auto colon = s.find(':');
  const std::string axes = "xyz";
  if (colon != 1 || axes.find(s[0]) == std::string::npos) {
    throw ConfigError("plane must be AXIS:INDEX with AXIS in x, y, z; got '" + s + "'");
  }
  try {
    return {static_cast<int>(axes.find(s[0])), std::stoi(s.substr(2))};
  } catch (const std::exception&) {
    throw ConfigError("plane index is not an integer: '" + s + "'");
  }
}

pipeline::RunConfig load_config(const std::string& config_path, const std::string& preset_name) {
  if (!config_path.empty()) {
    nlohmann::json j;
    try {
      j = io::read_json(config_path);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (!preset_name.empty()) j["preset"] = preset_name;
    return pipeline::run_config_from_json(j);
  }
  return pipeline::preset(preset_name.empty() ? "desk-small" : preset_name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowforge: self-gated 4D flow simulation, reconstruction and quantification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--seed", seed, "Global RNG seed");
  app.add_option("--threads", threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);

  // pattern
  auto* pat = app.add_subcommand("pattern", "Generate the sampling schedule");
  sampling::SamplingConfig scfg;
  std::string pat_out = "schedule.csv";
  pat->add_option("--ny", scfg.n_y, "Phase-encode lines");
  pat->add_option("--nz", scfg.n_z, "Partition-encode lines");
  pat->add_option("--enc", scfg.encodings, "Velocity encodings");
  pat->add_option("--readouts", scfg.n_readouts, "Total readouts");
  pat->add_option("--sg-interval", scfg.sg_interval, "Self-gating interval");
  pat->add_option("--c", scfg.c, "Density offset (<= 0 selects the default)");
  pat->add_option("--d", scfg.d, "Density exponent");
  pat->add_option("--seed-theta", scfg.theta_0, "Initial angle (rad)");
  pat->add_option("--seed-r", scfg.r_0, "Initial radius");
  pat->add_option("--out", pat_out, "Schedule CSV path");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a phantom acquisition");
  std::string sim_preset, sim_config, sim_schedule, sim_out = "dataset";
  sim->add_option("--preset", sim_preset, "desk-small | paper-3t | paper-1.5t");
  sim->add_option("--config", sim_config, "Run config JSON");
  sim->add_option("--schedule", sim_schedule, "Schedule CSV (generated when omitted)");
  sim->add_option("--out", sim_out, "Dataset directory");

  // gate
  auto* gat = app.add_subcommand("gate", "Self-gating: triggers and respiratory weights");
  std::string gate_dir, gate_out = "gating.json", cardiac_band = "0.5:3", resp_band = "0:0.5";
  gating::GatingConfig gcfg;
  gat->add_option("dataset", gate_dir, "Dataset directory")->required();
  gat->add_option("--cardiac-band", cardiac_band, "Cardiac pass band LOW:HIGH (Hz)");
  gat->add_option("--resp-band", resp_band, "Respiratory pass band LOW:HIGH (Hz)");
  gat->add_option("--efficiency", gcfg.target_efficiency, "Target respiratory efficiency (%)");
  gat->add_option("--p", gcfg.p, "Weighting exponent");
  gat->add_option("--out", gate_out, "Output JSON");

  // bin
  auto* bin = app.add_subcommand("bin", "Cardiac binning with respiratory weights");
  std::string bin_dir, bin_gating = "gating.json", bin_out = "binned";
  int n_bins = 20;
  bin->add_option("dataset", bin_dir, "Dataset directory")->required();
  bin->add_option("--gating", bin_gating, "gating.json from the gate stage");
  bin->add_option("--bins", n_bins, "Cardiac bins")->check(CLI::PositiveNumber);
  bin->add_option("--out", bin_out, "Binned directory");

  // recon
  auto* rec = app.add_subcommand("recon", "L1-SENSE reconstruction");
  std::string rec_dir, rec_out = "images";
  recon::ReconConfig rcfg;
  rec->add_option("binned", rec_dir, "Binned directory")->required();
  rec->add_option("--lambda", rcfg.fista.lambda, "Wavelet penalty");
  rec->add_option("--iters", rcfg.fista.max_iters, "Maximum iterations");
  rec->add_option("--tol", rcfg.fista.tol, "Relative-change tolerance");
  rec->add_option("--out", rec_out, "Image directory");

  // flow
  auto* flo = app.add_subcommand("flow", "Velocity decoding and flow quantification");
  std::string flow_dir, flow_roi, flow_out = "flow_report.json", flow_config, flow_preset;
  std::vector<std::string> flow_planes;
  double flow_venc = 0.0;
  bool unwrap = false, no_background = false;
  flo->add_option("images", flow_dir, "Image directory")->required();
  flo->add_option("--venc", flow_venc, "VENC (cm/s); defaults to the image metadata");
  flo->add_option("--plane", flow_planes, "Analysis plane AXIS:INDEX (repeatable)");
  flo->add_option("--roi", flow_roi, "ROI JSON for --plane");
  flo->add_option("--config", flow_config, "Run config JSON supplying planes when --plane is absent");
  flo->add_option("--preset", flow_preset, "Preset supplying planes when --plane is absent");
  flo->add_flag("--unwrap", unwrap, "Apply temporal aliasing correction");
  flo->add_flag("--no-background", no_background, "Skip background-phase correction");
  flo->add_option("--out", flow_out, "Report JSON");

  // report
  auto* rep = app.add_subcommand("report", "Agreement statistics for paired measurements");
  std::string pairs, rep_out = "report.json";
  rep->add_option("--pairs", pairs, "CSV with label,a,b rows (b is the reference)")->required();
  rep->add_option("--out", rep_out, "Report JSON");

  // run
  auto* all = app.add_subcommand("run", "Run every stage end to end");
  std::string run_preset, run_config, run_out;
  all->add_option("--preset", run_preset, "desk-small | paper-3t | paper-1.5t");
  all->add_option("--config", run_config, "Run config JSON");
  all->add_option("--out", run_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);

    if (*pat) {
      pipeline::stage_pattern(scfg, pat_out);
      std::cout << "wrote " << pat_out << '\n';
    } else if (*sim) {
      auto cfg = load_config(sim_config, sim_preset);
      if (seed) cfg.seed = *seed;
      cfg.expand();
      cfg.validate();
      pipeline::stage_simulate(cfg.phantom, cfg.sampling, sim_schedule, sim_out);
      io::write_json(sim_out + "/config.json", pipeline::to_json(cfg));
      std::cout << "wrote " << sim_out << '\n';
    } else if (*gat) {
      gcfg.surrogates.cardiac = parse_band(cardiac_band);
      gcfg.surrogates.respiratory = parse_band(resp_band);
      pipeline::stage_gate(gate_dir, gcfg, gate_out);
      std::cout << "wrote " << gate_out << '\n';
    } else if (*bin) {
      pipeline::stage_bin(bin_dir, bin_gating, n_bins, bin_out);
      std::cout << "wrote " << bin_out << '\n';
    } else if (*rec) {
      pipeline::stage_recon(rec_dir, rcfg, rec_out);
      std::cout << "wrote " << rec_out << '\n';
    } else if (*flo) {
      const auto images = io::read_images(flow_dir);
      std::vector<flow::AnalysisPlane> planes;
      if (!flow_planes.empty()) {
        if (flow_roi.empty()) throw ConfigError("--plane needs --roi");
        for (const auto& s : flow_planes) {
          const auto [axis, index] = parse_plane(s);
          if (index < 0 || index >= images.grid.dim(axis)) throw ConfigError("plane " + s + " is outside the grid");
          flow::AnalysisPlane p;
          p.label = s;
          p.axis = axis;
          p.index = index;
          p.roi = io::read_roi(flow_roi, images.grid, axis);
          planes.push_back(std::move(p));
        }
      } else {
        const auto cfg = load_config(flow_config, flow_preset);
        if (cfg.phantom.grid != images.grid) throw ConfigError("config grid does not match the images");
        for (const auto& s : cfg.planes) planes.push_back(pipeline::resolve_plane(s, images.grid));
      }
      pipeline::stage_flow(flow_dir, flow_venc, planes, unwrap, !no_background, {}, flow_out);
      std::cout << "wrote " << flow_out << '\n';
    } else if (*rep) {
      pipeline::stage_report(pairs, rep_out);
      std::cout << "wrote " << rep_out << '\n';
    } else if (*all) {
      auto cfg = load_config(run_config, run_preset);
      if (seed) cfg.seed = *seed;
      if (threads > 0) cfg.threads = threads;
      if (!run_out.empty()) cfg.out = run_out;
      const auto manifest = pipeline::run(cfg);
      std::cout << "run complete: " << cfg.out << "/manifest.json\n";
      for (const auto& s : manifest["stages"]) {
        std::cout << "  " << s["name"].get<std::string>() << ' ' << s["wall_time_s"].get<double>() << " s\n";
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
