#include "doctest.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "flowforge/errors.hpp"
#include "flowforge/sampling.hpp"

using namespace flowforge;
using namespace flowforge::sampling;

namespace {

SamplingConfig full_config() {
  SamplingConfig c;
  c.n_y = 96;
  c.n_z = 56;
  c.encodings = 4;
  c.n_readouts = 75000;
  c.sg_interval = 9;
  return c;
}

double wrap(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  return a < 0 ? a + 2.0 * M_PI : a;
}

}  // namespace

TEST_CASE("next_angle reference values") {
  const auto c = full_config();
  CHECK(next_angle(c, 0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(next_angle(c, 1, 1) == doctest::Approx(2.3999632297).epsilon(1e-10));
  CHECK(next_angle(c, 1, 1) * 180.0 / M_PI == doctest::Approx(137.5077640500).epsilon(1e-10));
  CHECK(next_angle(c, 0, 2) == doctest::Approx(0.5999908074).epsilon(1e-10));
  CHECK_THROWS_AS(next_angle(c, -1, 1), ConfigError);
  CHECK_THROWS_AS(next_angle(c, 0, 5), ConfigError);
}

TEST_CASE("next_radius reference values") {
  auto c = full_config();
  CHECK(c.r_max() == 48.0);
  // Direct evaluation: 48 * frac(35^(1/3)).
  const double frac = std::cbrt(35.0) - 3.0;
  CHECK(next_radius(c, 0.0) == doctest::Approx(48.0 * frac).epsilon(1e-12));
  CHECK(std::abs(next_radius(c, 0.0) - 13.0111827) < 5e-7);
  SamplingConfig tiny;
  tiny.n_y = 2;
  tiny.n_z = 2;
  CHECK(next_radius(tiny, 0.0) == doctest::Approx(0.27106631).epsilon(1e-7));
  c.g_r = 1.0;
  for (double x : {0.0, 3.5, 47.25}) CHECK(next_radius(c, x) == doctest::Approx(x).epsilon(1e-12));
  CHECK_THROWS_AS(next_radius(c, 48.0), ConfigError);
  CHECK_THROWS_AS(next_radius(c, -0.1), ConfigError);
}

TEST_CASE("density_scale reference values") {
  auto c = full_config();
  CHECK(c.density_offset() == doctest::Approx(std::pow(1344.0, 0.25)).epsilon(1e-14));
  CHECK(density_scale(c, 0.0) == 0.0);
  // Direct evaluation of (48 + c)^1.5 - c^1.5 with c = 1344^(1/4).
  const double cc = std::pow(1344.0, 0.25);
  const double expect = std::pow(48.0 + cc, 1.5) - std::pow(cc, 1.5);
  CHECK(expect == doctest::Approx(382.5228).epsilon(1e-6));
  CHECK(density_scale(c, 48.0) == doctest::Approx(expect).epsilon(1e-12));
  c.d = 1.0;
  for (double r : {0.0, 1.0, 7.3, 40.0}) CHECK(density_scale(c, r) == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("density_scale is strictly increasing (random pairs)") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 48.0);
  std::uniform_real_distribution<double> dd(1.0, 3.0);
  auto c = full_config();
  for (int k = 0; k < 1000; ++k) {
    c.d = dd(rng);
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(density_scale(c, a) < density_scale(c, b));
  }
}

TEST_CASE("config validation") {
  auto c = full_config();
  c.n_y = 95;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = full_config();
  c.sg_interval = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = full_config();
  c.d = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = full_config();
  c.r_0 = 48.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("SG injection: 90 readouts, interval 9 -> 10 SG entries at 1,10,...,82") {
  auto c = full_config();
  c.n_readouts = 90;
  const auto s = generate_schedule(c);
  REQUIRE(s.size() == 90);
  std::vector<std::size_t> sg;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.entries[i].is_sg) sg.push_back(i + 1);
  }
  REQUIRE(sg.size() == 10);
  for (std::size_t k = 0; k < sg.size(); ++k) CHECK(sg[k] == 1 + 9 * k);
  CHECK(s.entries[0].ky == 49);
  CHECK(s.entries[0].kz == 29);
}

TEST_CASE("zero radius maps to the grid centre") {
  auto c = full_config();
  c.n_readouts = 10;
  const auto s = generate_schedule(c);
  // The first imaging readout has r_0 = 0.
  CHECK(s.entries[1].radius_scaled == 0.0);
  CHECK(s.entries[1].ky == 49);
  CHECK(s.entries[1].kz == 29);
}

TEST_CASE("full-size schedule: bounds, SG layout, interleave and angular increments") {
  const auto c = full_config();
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = generate_schedule(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  REQUIRE(s.size() == 75000);
  CHECK(s.sg_count() == (75000 + 8) / 9);
  const double step = 2.0 * M_PI * (2.0 - kGoldenRatio);
  std::vector<double> last(5, -1.0);
  std::int64_t last_sample = -1;
  int expected_e = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& e = s.entries[i];
    REQUIRE(e.ky >= 1);
    REQUIRE(e.ky <= c.n_y);
    REQUIRE(e.kz >= 1);
    REQUIRE(e.kz <= c.n_z);
    if (i % 9 == 0) {
      REQUIRE(e.is_sg);
      REQUIRE(e.ky == 49);
      REQUIRE(e.kz == 29);
      continue;
    }
    REQUIRE_FALSE(e.is_sg);
    REQUIRE(e.encoding == expected_e);
    expected_e = expected_e % c.encodings + 1;
    if (last[e.encoding] >= 0.0) {
      const double d = wrap(e.theta - last[e.encoding]);
      REQUIRE(std::abs(d - step) < 1e-9);
    }
    last[e.encoding] = e.theta;
    if (e.encoding == 1) {
      REQUIRE(e.sample == last_sample + 1);
      last_sample = e.sample;
    }
  }
}

TEST_CASE("determinism: identical configs give identical schedules") {
  auto c = full_config();
  c.n_readouts = 5000;
  const auto a = generate_schedule(c);
  const auto b = generate_schedule(c);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries[i].ky == b.entries[i].ky);
    CHECK(a.entries[i].kz == b.entries[i].kz);
    CHECK(a.entries[i].theta == b.entries[i].theta);
  }
}

TEST_CASE("centre-weighted density: d > 1 puts more samples near the centre than d = 1") {
  auto c = full_config();
  c.n_readouts = 20000;
  auto frac_inner = [](const SamplingSchedule& s) {
    const double cy = s.center_ky(), cz = s.center_kz();
    std::size_t inner = 0, total = 0;
    for (const auto& e : s.entries) {
      if (e.is_sg) continue;
      ++total;
      const double ry = (e.ky - cy) / (s.config.n_y / 2.0 - 1.0);
      const double rz = (e.kz - cz) / (s.config.n_z / 2.0 - 1.0);
      if (std::hypot(ry, rz) <= 0.25) ++inner;
    }
    return static_cast<double>(inner) / total;
  };
  const double dense = frac_inner(generate_schedule(c));
  c.d = 1.0;
  const double linear = frac_inner(generate_schedule(c));
  CHECK(dense > linear);
}

TEST_CASE("coverage: every annulus of width r_max/8 is hit per encoding in long windows") {
  auto c = full_config();
  c.n_y = 32;
  c.n_z = 16;
  c.n_readouts = 8000;
  const auto s = generate_schedule(c);
  const std::size_t window = 4 * c.n_y * c.n_z / c.encodings;
  std::vector<const ScheduleEntry*> imaging;
  for (const auto& e : s.entries) {
    if (!e.is_sg) imaging.push_back(&e);
  }
  double max_scaled = 0.0;
  for (auto* e : imaging) max_scaled = std::max(max_scaled, e->radius_scaled);
  for (std::size_t start = 0; start + window <= imaging.size(); start += window / 2) {
    for (int e = 1; e <= c.encodings; ++e) {
      std::set<int> rings;
      for (std::size_t k = start; k < start + window; ++k) {
        if (imaging[k]->encoding != e) continue;
        rings.insert(std::min(7, static_cast<int>(8.0 * imaging[k]->radius_scaled / max_scaled)));
      }
      CHECK(rings.size() == 8);
    }
  }
}

TEST_CASE("figure_of_merit: efficiency and acceleration by counting") {
  auto c = full_config();
  c.n_y = 16;
  c.n_z = 8;
  c.n_readouts = 900;
  const auto s = generate_schedule(c);
  std::vector<double> ones(s.size(), 1.0), half(s.size(), 1.0 / std::sqrt(2.0));
  auto f = figure_of_merit(s, ones, 128.0, 2, 4);
  CHECK(f.efficiency_percent == doctest::Approx(100.0));
  // Counting oracle: imaging readouts with W = 1.
  std::size_t n_img = 0;
  for (const auto& e : s.entries) n_img += e.is_sg ? 0 : 1;
  CHECK(f.acceleration == doctest::Approx(128.0 * 2 * 4 / n_img));
  f = figure_of_merit(s, half, 128.0, 2, 4);
  CHECK(f.efficiency_percent == doctest::Approx(50.0));
  std::vector<std::uint8_t> retained(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); i += 2) retained[i] = 1;
  double w2 = 0.0;
  for (std::size_t i = 0; i < s.size(); i += 2) w2 += s.entries[i].is_sg ? 0.0 : 0.5;
  f = figure_of_merit(s, half, 128.0, 2, 4, retained);
  CHECK(f.acceleration == doctest::Approx(128.0 * 2 * 4 / w2));
  SamplingSchedule empty;
  CHECK_THROWS_AS(figure_of_merit(empty, {}, 1.0, 1, 1), ConfigError);
  std::vector<double> bad(s.size(), 1.5);
  CHECK_THROWS_AS(figure_of_merit(s, bad, 1.0, 1, 1), ConfigError);
}

TEST_CASE("schedule CSV round trip") {
  auto c = full_config();
  c.n_readouts = 500;
  const auto s = generate_schedule(c);
  const auto path = (std::filesystem::temp_directory_path() / "ff_sched_test.csv").string();
  write_schedule_csv(s, path);
  const auto r = read_schedule_csv(path, c);
  REQUIRE(r.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(r.entries[i].ky == s.entries[i].ky);
    CHECK(r.entries[i].kz == s.entries[i].kz);
    CHECK(r.entries[i].encoding == s.entries[i].encoding);
    CHECK(r.entries[i].is_sg == s.entries[i].is_sg);
  }
  std::filesystem::remove(path);
}
