#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowforge/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "ff_cli";

/// Runs the CLI, returns its exit status; stderr goes to `err`.
int cli(const std::string& args, std::string* err = nullptr) {
  const auto log = kRoot / "stderr.txt";
  const std::string cmd = std::string(FLOWFORGE_CLI) + " " + args + " > /dev/null 2> " + log.string();
  const int rc = std::system(cmd.c_str());
  if (err) {
    std::ifstream f(log);
    std::stringstream s;
    s << f.rdbuf();
    *err = s.str();
  }
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string small_config() {
  const auto p = kRoot / "small.json";
  if (!fs::exists(p)) {
    fs::create_directories(kRoot);
    flowforge::io::write_json(p.string(), {{"preset", "desk-small"},
                                           {"phantom", {{"duration", 20.0}}},
                                           {"recon", {{"fista", {{"max_iters", 6}}}}}});
  }
  return p.string();
}

std::string sha(const fs::path& p) { return flowforge::io::sha256_file(p.string()); }

}  // namespace

TEST_CASE("help and bad arguments") {
  fs::create_directories(kRoot);
  CHECK(cli("--help") == 0);
  CHECK(cli("gate") == 2);
  CHECK(cli("simulate --preset nonexistent --out " + (kRoot / "x").string()) == 2);
  CHECK(cli("bin " + (kRoot / "missing").string() + " --gating nowhere.json --bins 8 --out " +
            (kRoot / "b").string()) == 3);
}

TEST_CASE("pattern subcommand writes a schedule") {
  const auto out = kRoot / "pattern" / "schedule.csv";
  CHECK(cli("pattern --ny 16 --nz 8 --readouts 900 --out " + out.string()) == 0);
  CHECK(fs::exists(out));
  CHECK(fs::exists(kRoot / "pattern" / "density_e1.svg"));
  CHECK(cli("pattern --ny 15 --nz 8 --readouts 900 --out " + out.string()) == 2);
}

TEST_CASE("run is deterministic and stages are isolated") {
  const auto cfg = small_config();
  const auto a = kRoot / "run_a", b = kRoot / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(cli("run --config " + cfg + " --out " + a.string()) == 0);
  REQUIRE(cli("run --config " + cfg + " --out " + b.string()) == 0);
  const auto ma = flowforge::io::read_json((a / "manifest.json").string());
  const auto mb = flowforge::io::read_json((b / "manifest.json").string());
  REQUIRE(ma["stages"].size() == 7);
  for (std::size_t k = 0; k < ma["stages"].size(); ++k) {
    CHECK(ma["stages"][k]["status"] == "ok");
    CHECK(ma["stages"][k]["checksums"] == mb["stages"][k]["checksums"]);
  }
  CHECK(fs::exists(a / "config.json"));

  // The same stages, each in its own process, reading only files.
  const auto s = kRoot / "staged";
  fs::remove_all(s);
  REQUIRE(cli("simulate --config " + cfg + " --out " + (s / "dataset").string()) == 0);
  REQUIRE(cli("gate " + (s / "dataset").string() + " --out " + (s / "gating.json").string()) == 0);
  REQUIRE(cli("bin " + (s / "dataset").string() + " --gating " + (s / "gating.json").string() +
              " --bins 8 --out " + (s / "binned").string()) == 0);
  REQUIRE(cli("recon " + (s / "binned").string() + " --iters 6 --out " + (s / "images").string()) == 0);
  REQUIRE(cli("flow " + (s / "images").string() + " --config " + cfg + " --out " +
              (s / "flow_report.json").string()) == 0);
  REQUIRE(cli("report --pairs " + (a / "pairs.csv").string() + " --out " + (s / "report.json").string()) == 0);

  for (const char* f : {"dataset/data.bin", "dataset/header.json", "gating.json", "binned/index.json",
                        "binned/bin_00.data", "images/images.bin", "flow_report.json", "report.json"}) {
    CAPTURE(f);
    CHECK(sha(a / f) == sha(s / f));
  }
}

TEST_CASE("truncated data.bin: gate exits 3 naming the file") {
  const auto cfg = small_config();
  const auto d = kRoot / "trunc";
  fs::remove_all(d);
  REQUIRE(cli("simulate --config " + cfg + " --out " + (d / "dataset").string()) == 0);
  const auto bin = d / "dataset" / "data.bin";
  fs::resize_file(bin, fs::file_size(bin) / 2);
  std::string err;
  CHECK(cli("gate " + (d / "dataset").string() + " --out " + (d / "gating.json").string(), &err) == 3);
  CHECK(err.find("data.bin") != std::string::npos);
  CHECK(err.find("length mismatch") != std::string::npos);
}

TEST_CASE("numerical failure exits 4 and the manifest names the stage") {
  const auto cfg = kRoot / "diverge.json";
  flowforge::io::write_json(cfg.string(), {{"preset", "desk-small"},
                                           {"phantom", {{"duration", 20.0}}},
                                           {"recon", {{"fista", {{"max_iters", 5}, {"step_factor", 60.0}}}}}});
  const auto out = kRoot / "diverge";
  fs::remove_all(out);
  std::string err;
  CHECK(cli("run --config " + cfg.string() + " --out " + out.string(), &err) == 4);
  CHECK(err.find("stage recon") != std::string::npos);
  const auto m = flowforge::io::read_json((out / "manifest.json").string());
  CHECK(m["failed_stage"] == "recon");
  CHECK(fs::exists(out / "binned" / "index.json"));  // earlier stages persisted
}
