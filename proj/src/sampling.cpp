#include "flowforge/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "flowforge/errors.hpp"
#include "flowforge/svg.hpp"

namespace flowforge::sampling {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fractional part of a*i for large integer i without losing the low bits of
// the product.
double frac_product(double a, std::int64_t i) {
  const double fi = static_cast<double>(i);
  const double p = a * fi;
  const double err = std::fma(a, fi, -p);
  double f = (p - std::floor(p)) + err;
  return f - std::floor(f);
}

}  // namespace

double SamplingConfig::r_max() const {
  return static_cast<double>(std::max(n_y / 2, n_z / 2));
}

double SamplingConfig::density_offset() const {
  if (c > 0.0) return c;
  return std::pow(static_cast<double>(n_y) * n_z / 4.0, 0.25);
}

void SamplingConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("sampling: " + m); };
  if (n_y < 4 || n_y % 2 != 0) fail("n_y must be even and >= 4");
  if (n_z < 4 || n_z % 2 != 0) fail("n_z must be even and >= 4");
  if (encodings < 1) fail("encodings must be >= 1");
  if (n_readouts < 1) fail("n_readouts must be >= 1");
  if (sg_interval < 2) fail("sg_interval must be >= 2");
  if (!(d >= 1.0)) fail("density exponent d must be >= 1");
  if (c < 0.0) fail("density offset c must be > 0 (or 0 for the default)");
  if (!(r_0 >= 0.0 && r_0 < r_max())) fail("r_0 must lie in [0, r_max)");
  if (!std::isfinite(g_r) || !std::isfinite(theta_0)) fail("g_r and theta_0 must be finite");
}

std::size_t SamplingSchedule::sg_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const ScheduleEntry& e) { return e.is_sg; }));
}

double golden_angle_increment() { return kTwoPi * (2.0 - kGoldenRatio); }

double next_angle(const SamplingConfig& cfg, std::int64_t i, int e) {
  if (i < 0 || e < 1 || e > cfg.encodings) {
    throw ConfigError("next_angle: requires i >= 0 and 1 <= e <= E");
  }
  const double a = 2.0 - kGoldenRatio;
  double f = frac_product(a, i) + a * static_cast<double>(e - 1) / cfg.encodings;
  f -= std::floor(f);
  double theta = std::fmod(kTwoPi * f + cfg.theta_0, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  return theta;
}

double next_radius(const SamplingConfig& cfg, double r_prev) {
  const double rmax = cfg.r_max();
  if (!(r_prev >= 0.0 && r_prev < rmax)) {
    throw ConfigError("next_radius: r_prev must lie in [0, r_max)");
  }
  double r = std::fmod(r_prev + cfg.g_r * rmax, rmax);
  if (r < 0.0) r += rmax;
  return r;
}

double density_scale(const SamplingConfig& cfg, double r) {
  const double c = cfg.density_offset();
  return std::pow(r + c, cfg.d) - std::pow(c, cfg.d);
}

SamplingSchedule generate_schedule(const SamplingConfig& cfg) {
  cfg.validate();
  const std::int64_t n_sg = (cfg.n_readouts + cfg.sg_interval - 1) / cfg.sg_interval;
  const std::int64_t n_imaging = cfg.n_readouts - n_sg;
  const std::int64_t n_samples = (n_imaging + cfg.encodings - 1) / cfg.encodings;

  std::vector<double> scaled(static_cast<std::size_t>(n_samples));
  double r = cfg.r_0;
  double max_scaled = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    scaled[i] = density_scale(cfg, r);
    max_scaled = std::max(max_scaled, scaled[i]);
    r = next_radius(cfg, r);
  }
  if (max_scaled <= 0.0) max_scaled = 1.0;

  const double half_y = std::floor(cfg.n_y / 2.0 - 1.0);
  const double half_z = std::floor(cfg.n_z / 2.0 - 1.0);
  const double off_y = std::floor(cfg.n_y / 2.0 + 1.0);
  const double off_z = std::floor(cfg.n_z / 2.0 + 1.0);

  std::vector<ScheduleEntry> imaging;
  imaging.reserve(static_cast<std::size_t>(n_imaging));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double rho = scaled[i] / max_scaled;
    for (int e = 1; e <= cfg.encodings && static_cast<std::int64_t>(imaging.size()) < n_imaging; ++e) {
      ScheduleEntry entry;
      entry.sample = i;
      entry.encoding = e;
      entry.theta = next_angle(cfg, i, e);
      entry.radius_scaled = scaled[i];
      entry.ky = static_cast<int>(std::round(rho * half_y * std::sin(entry.theta) + off_y));
      entry.kz = static_cast<int>(std::round(rho * half_z * std::cos(entry.theta) + off_z));
      imaging.push_back(entry);
    }
  }

  SamplingSchedule schedule;
  schedule.config = cfg;
  schedule.entries.reserve(static_cast<std::size_t>(cfg.n_readouts));
  std::size_t next = 0;
  for (std::int64_t pos = 0; pos < cfg.n_readouts; ++pos) {
    if (pos % cfg.sg_interval == 0) {
      ScheduleEntry sg;
      sg.is_sg = true;
      sg.encoding = 1;
      sg.ky = static_cast<int>(off_y);
      sg.kz = static_cast<int>(off_z);
      schedule.entries.push_back(sg);
    } else {
      schedule.entries.push_back(imaging[next++]);
    }
  }
  return schedule;
}

FigureOfMerit figure_of_merit(const SamplingSchedule& schedule, std::span<const double> weights,
                              double n_matrix, int n_frames, int encodings,
                              std::span<const std::uint8_t> retained) {
  if (schedule.entries.empty()) throw ConfigError("figure_of_merit: empty schedule");
  if (weights.size() != schedule.size()) {
    throw ConfigError("figure_of_merit: weights length does not match schedule length");
  }
  if (!retained.empty() && retained.size() != schedule.size()) {
    throw ConfigError("figure_of_merit: retained mask length does not match schedule length");
  }
  double all = 0.0, binned = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("figure_of_merit: weights must lie in [0, 1]");
    all += w * w;
    const bool counts = !schedule.entries[i].is_sg && (retained.empty() || retained[i] != 0);
    if (counts) binned += w * w;
  }
  FigureOfMerit fom;
  fom.efficiency_percent = 100.0 * all / static_cast<double>(weights.size());
  fom.acceleration = binned > 0.0 ? n_matrix * n_frames * encodings / binned
                                  : std::numeric_limits<double>::infinity();
  return fom;
}

void write_schedule_csv(const SamplingSchedule& schedule, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "i,e,ky,kz,is_sg\n";
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const auto& e = schedule.entries[i];
    out << i << ',' << e.encoding << ',' << e.ky << ',' << e.kz << ',' << (e.is_sg ? 1 : 0) << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

SamplingSchedule read_schedule_csv(const std::string& path, const SamplingConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,e,ky,kz,is_sg", 0) != 0) {
    throw DataError(path + ": missing header i,e,ky,kz,is_sg");
  }
  SamplingSchedule schedule;
  schedule.config = cfg;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok[5];
    for (auto& t : tok) {
      if (!std::getline(ls, t, ',')) throw DataError(path + ": malformed row " + std::to_string(row));
    }
    ScheduleEntry e;
    try {
      if (std::stoll(tok[0]) != static_cast<long long>(row)) {
        throw DataError(path + ": readout index out of order at row " + std::to_string(row));
      }
      e.encoding = std::stoi(tok[1]);
      e.ky = std::stoi(tok[2]);
      e.kz = std::stoi(tok[3]);
      e.is_sg = std::stoi(tok[4]) != 0;
    } catch (const std::logic_error&) {
      throw DataError(path + ": malformed row " + std::to_string(row));
    }
    if (e.ky < 1 || e.ky > cfg.n_y || e.kz < 1 || e.kz > cfg.n_z || e.encoding < 1 ||
        e.encoding > cfg.encodings) {
      throw DataError(path + ": index out of grid at row " + std::to_string(row));
    }
    schedule.entries.push_back(e);
    ++row;
  }
  return schedule;
}

std::string density_svg(const SamplingSchedule& schedule, int encoding) {
  const int ny = schedule.config.n_y, nz = schedule.config.n_z;
  std::vector<double> counts(static_cast<std::size_t>(ny) * nz, 0.0);
  for (const auto& e : schedule.entries) {
    if (!e.is_sg && e.encoding == encoding) counts[(e.ky - 1) * nz + (e.kz - 1)] += 1.0;
  }
  svg::Axes axes;
  axes.title = "sampling density, encoding " + std::to_string(encoding);
  axes.x_label = "kz";
  axes.y_label = "ky";
  axes.width = std::max(240, 8 * nz + 90);
  axes.height = std::max(200, 8 * ny + 86);
  return svg::heatmap(axes, ny, nz, counts);
}

}  // namespace flowforge::sampling
