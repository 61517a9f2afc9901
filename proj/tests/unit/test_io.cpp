#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "../fixtures.hpp"
#include "flowforge/errors.hpp"
#include "flowforge/io.hpp"
#include "flowforge/pipeline.hpp"
#include "oracles.hpp"

using namespace flowforge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ff_io_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("config JSON round trips") {
  phantom::PhantomConfig p;
  p.grid = {20, 24, 6};
  p.arrhythmia_beats = {{3, 1.4}};
  p.background_ramp_cm_s = {1.0, -2.0, 0.5};
  p.seed = 99;
  const auto q = io::phantom_from_json(io::to_json(p));
  CHECK(q.grid == p.grid);
  CHECK(q.arrhythmia_beats.size() == 1);
  CHECK(q.arrhythmia_beats[0].rr_scale == 1.4);
  CHECK(q.background_ramp_cm_s == p.background_ramp_cm_s);
  CHECK(q.seed == 99);

  sampling::SamplingConfig s;
  s.d = 2.0;
  s.sg_interval = 7;
  const auto t = io::sampling_from_json(io::to_json(s));
  CHECK(t.d == 2.0);
  CHECK(t.sg_interval == 7);

  gating::GatingConfig g;
  g.surrogates.cardiac = {0.6, 2.5};
  g.p = 6;
  const auto h = io::gating_config_from_json(io::to_json(g));
  CHECK(h.surrogates.cardiac.low == 0.6);
  CHECK(h.p == 6);

  recon::FistaConfig f;
  f.lambda = 1e-3;
  CHECK(io::fista_from_json(io::to_json(f)).lambda == 1e-3);
}

TEST_CASE("run config: presets expand and persist") {
  for (const auto& name : pipeline::preset_names()) {
    auto c = pipeline::preset(name);
    c.expand();
    CHECK_NOTHROW(c.validate());
    const auto back = pipeline::run_config_from_json(pipeline::to_json(c));
    CHECK(back.phantom.grid == c.phantom.grid);
    CHECK(back.sampling.n_readouts == c.sampling.n_readouts);
    CHECK(back.n_bins == c.n_bins);
    CHECK(back.planes.size() == c.planes.size());
  }
  CHECK_THROWS_AS(pipeline::preset("nope"), ConfigError);
  CHECK_THROWS_AS(pipeline::run_config_from_json(nlohmann::json{{"n_bins", "eight"}}), ConfigError);
  const auto paper = pipeline::preset("paper-3t");
  CHECK(paper.n_bins == 20);
  CHECK(paper.phantom.tr == 0.004);
  CHECK(paper.phantom.venc == 150.0);
}

TEST_CASE("dataset round trip and truncated data.bin") {
  TempDir dir("dataset");
  auto p = fixture::gating_phantom(1.2, 2.0, 3);
  const auto acq = fixture::acquire(p);
  io::write_dataset(acq, dir / "ds");
  const auto back = io::read_dataset(dir / "ds");
  CHECK(back.header.grid == acq.header.grid);
  CHECK(back.header.tr == acq.header.tr);
  CHECK(back.samples == acq.samples);
  REQUIRE(back.truth.has_value());
  CHECK(back.truth->beat_starts == acq.truth->beat_starts);
  CHECK(back.truth->respiration == acq.truth->respiration);
  REQUIRE(back.schedule.size() == acq.schedule.size());
  for (std::size_t i = 0; i < acq.schedule.size(); ++i) {
    CHECK(back.schedule.entries[i].ky == acq.schedule.entries[i].ky);
    CHECK(back.schedule.entries[i].is_sg == acq.schedule.entries[i].is_sg);
  }

  const auto bin = dir / "ds/data.bin";
  fs::resize_file(bin, fs::file_size(bin) - 8);
  try {
    io::read_dataset(dir / "ds");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("data.bin") != std::string::npos);
    CHECK(msg.find("length mismatch") != std::string::npos);
  }
}

TEST_CASE("gating, binned and image directories round trip") {
  TempDir dir("stages");
  auto p = fixture::gating_phantom(1.25, 20.0, 5);
  p.grid = {16, 16, 8};
  p.tube_center = {2.0, -2.0};
  p.tube_radius = 4.0;
  const auto acq = fixture::acquire(p);
  const auto g = gating::gate(acq);
  io::write_gating(g, dir / "gating.json");
  const auto g2 = io::read_gating(dir / "gating.json");
  CHECK(g2.triggers == g.triggers);
  CHECK(g2.respiration.weights == g.respiration.weights);
  CHECK(g2.beats.beats.size() == g.beats.beats.size());
  CHECK(g2.respiration.mu == g.respiration.mu);

  std::vector<double> times(acq.schedule.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = acq.time(i);
  const auto bk = binning::assemble(acq, binning::assign_bins(acq.schedule, times, g.beats, 4), g.respiration.weights);
  io::write_binned(bk, dir / "binned");
  const auto bk2 = io::read_binned(dir / "binned");
  CHECK(bk2.data == bk.data);
  CHECK(bk2.weight_mask == bk.weight_mask);
  CHECK(bk2.provenance == bk.provenance);
  CHECK(bk2.fate == bk.fate);
  CHECK(bk2.readout_bin == bk.readout_bin);
  CHECK(bk2.bin_width_s == bk.bin_width_s);

  recon::ReconConfig rc;
  rc.fista.max_iters = 3;
  const auto r = recon::reconstruct(bk2, rc);
  io::write_images(r, rc.fista, dir / "images");
  const auto imgs = io::read_images(dir / "images");
  CHECK(imgs.grid == r.images.grid);
  CHECK(imgs.n_bins == 4);
  std::vector<cplx> as_float(r.images.data.size());
  for (std::size_t i = 0; i < as_float.size(); ++i) as_float[i] = cplx(cplxf(r.images.data[i]));
  CHECK(imgs.data == as_float);
  CHECK(fs::exists(dir / "images/convergence_e1.csv"));
  std::ifstream csv(dir / "images/convergence_e1.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("iter,objective,data_term,l1_term", 0) == 0);
}

TEST_CASE("ROI files") {
  TempDir dir("roi");
  const Grid3 g{8, 8, 8};
  io::write_json(dir / "v.json", {{"voxels", {{1, 2}, {3, 4}}}});
  const auto v = io::read_roi(dir / "v.json", g, 2);
  REQUIRE(v.size() == 2);
  CHECK(v[1] == std::array<int, 2>{3, 4});
  io::write_json(dir / "c.json", {{"circle", {{"center", {4.0, 4.0}}, {"radius", 1.5}}}});
  CHECK(io::read_roi(dir / "c.json", g, 2).size() == flow::circle_roi(g, 2, {4.0, 4.0}, 1.5).size());
  io::write_json(dir / "bad.json", {{"voxels", {{1, 20}}}});
  CHECK_THROWS(io::read_roi(dir / "bad.json", g, 2));
}

TEST_CASE("complex64 arrays and SHA-256") {
  TempDir dir("c64");
  const auto v = oracle::random_complex(10, 1);
  io::write_complex64(dir / "a.bin", v);
  const auto w = io::read_complex64(dir / "a.bin", 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(w[i] - v[i]) < 1e-6 * (1.0 + std::abs(v[i])));
  CHECK_THROWS_AS(io::read_complex64(dir / "a.bin", 11), DataError);
  {
    std::ofstream f(dir / "abc.txt", std::ios::binary);
    f << "abc";
  }
  CHECK(io::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
