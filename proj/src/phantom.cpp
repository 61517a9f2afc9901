#include "flowforge/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "flowforge/errors.hpp"
#include "flowforge/kernels.hpp"

namespace flowforge::phantom {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEdge = 0.3;  // logistic edge scale, voxels

// Chamber geometry, voxels relative to the grid centre.
constexpr double kChamberX = -6.0;
constexpr double kChamberY = 6.0;
constexpr double kChamberR = 4.0;

double logistic_inside(double signed_distance) {
  return 1.0 / (1.0 + std::exp(signed_distance / kEdge));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// In-plane axes perpendicular to the tube.
std::array<int, 2> cross_axes(int tube_axis) {
  if (tube_axis == 0) return {1, 2};
  if (tube_axis == 1) return {0, 2};
  return {0, 1};
}

// Static per-voxel quantities shared by every rendered frame.
class Renderer {
 public:
  explicit Renderer(const PhantomConfig& cfg) : cfg_(cfg), g_(cfg.grid) {
    const std::size_t n = g_.size();
    bg_.resize(n);
    for (int x = 0; x < g_.nx; ++x) {
      for (int y = 0; y < g_.ny; ++y) {
        for (int z = 0; z < g_.nz; ++z) {
          const double u = (x - g_.nx / 2) / static_cast<double>(g_.nx);
          const double v = (y - g_.ny / 2) / static_cast<double>(g_.ny);
          const double w = (z - g_.nz / 2) / static_cast<double>(g_.nz);
          bg_[g_.index(x, y, z)] = 0.6 * u - 0.4 * v + 0.8 * v * v + 0.3 * w;
        }
      }
    }
  }

  void render(const PhysiologicalState& s, int encoding, Volume& out) const {
    if (out.grid != g_) out = Volume(g_);
    const double shift = cfg_.resp_shift_mm / cfg_.voxel_size_mm * s.respiration;
    const double ax = 0.38 * g_.nx, ay = 0.42 * g_.ny;
    const double chamber = 1.2 * (1.0 - cfg_.cardiac_modulation +
                                  cfg_.cardiac_modulation * chamber_waveform(s.cardiac_phase));
    const double cz = std::max(0.3 * g_.nz, 1.0);
    const double v_now = cfg_.v_peak * flow_waveform(cfg_, s.cardiac_phase);
    const int comp = encoding - 2;  // velocity component encoded, -1 for the reference
    const auto ca = cross_axes(cfg_.tube_axis);
    const double a = cfg_.tube_radius;

    for (int x = 0; x < g_.nx; ++x) {
      const double X = x - g_.nx / 2 - shift;
      for (int y = 0; y < g_.ny; ++y) {
        const double Y = y - g_.ny / 2;
        const double rho = std::hypot(X / ax, Y / ay);
        const double tissue_mask = logistic_inside((rho - 1.0) * std::min(ax, ay));
        const double rc = std::hypot(X - kChamberX, Y - kChamberY);
        for (int z = 0; z < g_.nz; ++z) {
          const double Z = z - g_.nz / 2;
          const std::array<double, 3> P{X, Y, Z};
          const double tissue = 0.6 * (0.85 + 0.15 * std::cos(2.0 * kPi * Z / g_.nz)) * tissue_mask;
          const double ch_dist = (std::hypot(rc / kChamberR, Z / cz) - 1.0) * kChamberR;
          const double m_c = logistic_inside(ch_dist);
          const double r = std::hypot(P[ca[0]] - cfg_.tube_center[0], P[ca[1]] - cfg_.tube_center[1]);
          const double m_b = logistic_inside(r - a);

          double v_enc = 0.0;
          if (comp >= 0) {
            if (comp == cfg_.tube_axis && r < a) v_enc = v_now * (1.0 - r * r / (a * a));
          }
          const cplx blood = comp >= 0 && v_enc != 0.0 ? std::polar(1.0, kPi * v_enc / cfg_.venc)
                                                       : cplx(1.0, 0.0);
          const double rest = std::max(0.0, 1.0 - m_c - m_b);
          cplx value = tissue * rest + chamber * m_c + blood * m_b;

          const std::size_t idx = g_.index(x, y, z);
          double phase = bg_[idx];
          if (comp >= 0) {
            phase += kPi * cfg_.background_ramp_cm_s[comp] * (Y / g_.ny) / cfg_.venc;
          }
          out.data[idx] = value * std::polar(1.0, phase);
        }
      }
    }
  }

 private:
  const PhantomConfig& cfg_;
  Grid3 g_;
  std::vector<double> bg_;
};

}  // namespace

void PhantomConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("phantom: " + m); };
  if (grid.nx < 4 || grid.ny < 4 || grid.nz < 4) fail("grid dimensions must be >= 4");
  if (grid.ny % 2 != 0 || grid.nz % 2 != 0) fail("n_y and n_z must be even");
  if (!(voxel_size_mm > 0.0)) fail("voxel_size must be > 0");
  if (tube_axis < 0 || tube_axis > 2) fail("tube_axis must be 0, 1 or 2");
  if (!(tube_radius > 0.0)) fail("tube_radius must be > 0");
  const auto ca = cross_axes(tube_axis);
  for (int k = 0; k < 2; ++k) {
    const double half = grid.dim(ca[k]) / 2.0;
    if (std::abs(tube_center[k]) + tube_radius > half - 1.0) fail("tube does not fit in the grid");
  }
  if (!(v_peak >= 0.0)) fail("v_peak must be >= 0");
  if (!(venc > 0.0)) fail("venc must be > 0");
  if (v_peak > venc && !allow_aliasing) fail("v_peak exceeds venc (set allow_aliasing to test aliasing)");
  if (!(heart_rate_hz >= 0.5 && heart_rate_hz <= 3.0)) fail("heart_rate_hz must lie in [0.5, 3]");
  if (!(resp_rate_hz > 0.0 && resp_rate_hz < 0.5)) fail("resp_rate_hz must lie in (0, 0.5)");
  if (!(resp_shift_mm >= 0.0)) fail("resp_shift_mm must be >= 0");
  if (!(rr_jitter_s >= 0.0)) fail("rr_jitter_s must be >= 0");
  for (const auto& b : arrhythmia_beats) {
    if (b.beat < 0 || !(b.rr_scale > 0.0)) fail("arrhythmia beats need index >= 0 and rr_scale > 0");
  }
  if (!(cardiac_modulation >= 0.0 && cardiac_modulation <= 1.0)) {
    fail("cardiac_modulation must lie in [0, 1]");
  }
  if (!(diastolic_flow_fraction >= 0.0 && diastolic_flow_fraction <= 1.0)) {
    fail("diastolic_flow_fraction must lie in [0, 1]");
  }
  if (n_coils < 1) fail("n_coils must be >= 1");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(tr > 0.0) || !(duration > 0.0)) fail("tr and duration must be > 0");
}

std::int64_t PhantomConfig::n_readouts() const {
  return static_cast<std::int64_t>(std::floor(duration / tr + 1e-9));
}

int BeatModel::beat_index(double t) const {
  if (starts.size() < 2 || t < starts.front() || t >= starts.back()) return -1;
  const auto it = std::upper_bound(starts.begin(), starts.end(), t);
  return static_cast<int>(it - starts.begin()) - 1;
}

double BeatModel::cardiac_phase(double t) const {
  const int k = beat_index(t);
  if (k < 0) return 0.0;
  return (t - starts[k]) / rr(k);
}

std::vector<double> BeatModel::triggers_in(double t0, double t1) const {
  std::vector<double> out;
  for (double s : starts) {
    if (s >= t0 && s <= t1) out.push_back(s);
  }
  return out;
}

BeatModel make_beats(const PhantomConfig& cfg) {
  std::mt19937_64 rng(splitmix64(cfg.seed));
  std::normal_distribution<double> jitter(0.0, cfg.rr_jitter_s);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double nominal = 1.0 / cfg.heart_rate_hz;

  auto draw_rr = [&](int k) {
    double rr = std::max(0.3 * nominal, nominal + jitter(rng));
    for (const auto& b : cfg.arrhythmia_beats) {
      if (b.beat == k) rr *= b.rr_scale;
    }
    return rr;
  };

  BeatModel model;
  double rr = draw_rr(0);
  double t = -unit(rng) * rr;
  int k = 0;
  model.starts.push_back(t);
  while (t <= cfg.duration) {
    t += rr;
    model.starts.push_back(t);
    rr = draw_rr(++k);
  }
  return model;
}

double respiratory_displacement(const PhantomConfig& cfg, double t) {
  const double c = std::cos(kPi * cfg.resp_rate_hz * t);
  return c * c * c * c;
}

double flow_waveform(const PhantomConfig& cfg, double phase) {
  const double b = cfg.diastolic_flow_fraction;
  return b + (1.0 - b) * 0.5 * (1.0 + std::cos(2.0 * kPi * (phase - cfg.systolic_peak_phase)));
}

double chamber_waveform(double phase) {
  // Fast systolic emptying from the end-diastolic maximum, slower refill.
  constexpr double kSystole = 0.35;
  phase -= std::floor(phase);
  if (phase < kSystole) return 0.5 * (1.0 + std::cos(kPi * phase / kSystole));
  return 0.5 * (1.0 - std::cos(kPi * (phase - kSystole) / (1.0 - kSystole)));
}

Volume simulate_object(const PhantomConfig& cfg, const PhysiologicalState& state, int encoding) {
  if (encoding < 1 || encoding > 4) throw ConfigError("simulate_object: encoding must be 1..4");
  Renderer renderer(cfg);
  Volume out(cfg.grid);
  renderer.render(state, encoding, out);
  return out;
}

Volume simulate_object(const PhantomConfig& cfg, const BeatModel& beats, double t, int encoding) {
  if (!(t >= 0.0 && t <= cfg.duration)) throw ConfigError("simulate_object: t outside [0, duration]");
  return simulate_object(cfg, {beats.cardiac_phase(t), respiratory_displacement(cfg, t)}, encoding);
}

double true_velocity(const PhantomConfig& cfg, const PhysiologicalState& state, int component,
                     int x, int y, int z) {
  if (component != cfg.tube_axis) return 0.0;
  const std::array<double, 3> P{x - cfg.grid.nx / 2 -
                                    cfg.resp_shift_mm / cfg.voxel_size_mm * state.respiration,
                                static_cast<double>(y - cfg.grid.ny / 2),
                                static_cast<double>(z - cfg.grid.nz / 2)};
  const auto ca = cross_axes(cfg.tube_axis);
  const double a = cfg.tube_radius;
  const double r = std::hypot(P[ca[0]] - cfg.tube_center[0], P[ca[1]] - cfg.tube_center[1]);
  if (r >= a) return 0.0;
  return cfg.v_peak * flow_waveform(cfg, state.cardiac_phase) * (1.0 - r * r / (a * a));
}

std::vector<Volume> coil_maps(const PhantomConfig& cfg) {
  const Grid3& g = cfg.grid;
  const double ring = 0.55 * std::max(g.nx, g.ny);
  const double sigma = 0.45 * std::max(g.nx, g.ny);
  std::vector<Volume> maps(cfg.n_coils, Volume(g));
  for (int c = 0; c < cfg.n_coils; ++c) {
    const double ang = 2.0 * kPi * c / cfg.n_coils + kPi / 4.0;
    const double px = ring * std::cos(ang), py = ring * std::sin(ang);
    const double pz = (c % 2 == 0 ? 0.25 : -0.25) * g.nz;
    const double ramp = ang + kPi / 3.0;
    for (int x = 0; x < g.nx; ++x) {
      for (int y = 0; y < g.ny; ++y) {
        for (int z = 0; z < g.nz; ++z) {
          const double X = x - g.nx / 2, Y = y - g.ny / 2, Z = z - g.nz / 2;
          const double d2 = (X - px) * (X - px) + (Y - py) * (Y - py) + (Z - pz) * (Z - pz);
          const double mag = std::exp(-d2 / (2.0 * sigma * sigma));
          const double phase = 0.5 * c + 1.2 * (X * std::cos(ramp) + Y * std::sin(ramp)) / g.nx;
          maps[c].at(x, y, z) = std::polar(mag, phase);
        }
      }
    }
  }
  double peak = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    double s = 0.0;
    for (const auto& m : maps) s += std::norm(m.data[v]);
    peak = std::max(peak, s);
  }
  const double scale = 1.0 / std::sqrt(peak);
  for (auto& m : maps) {
    for (auto& v : m.data) v *= scale;
  }
  return maps;
}

std::vector<std::uint8_t> object_mask(const PhantomConfig& cfg) {
  PhantomConfig still = cfg;
  still.background_ramp_cm_s = {0.0, 0.0, 0.0};
  const Volume v = simulate_object(still, PhysiologicalState{0.0, 0.0}, 1);
  std::vector<std::uint8_t> mask(v.data.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = std::abs(v.data[i]) > 0.25 ? 1 : 0;
  return mask;
}

void RawAcquisition::validate() const {
  const std::size_t expected =
      static_cast<std::size_t>(header.n_readouts) * header.n_coils * header.grid.nx;
  if (samples.size() != expected) {
    throw DataError("acquisition: sample count " + std::to_string(samples.size()) +
                    " does not match header (" + std::to_string(expected) + ")");
  }
  if (schedule.size() != static_cast<std::size_t>(header.n_readouts)) {
    throw DataError("acquisition: schedule length does not match header n_readouts");
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw DataError("acquisition: non-finite sample");
    }
  }
}

RawAcquisition acquire(const PhantomConfig& cfg, const sampling::SamplingSchedule& schedule) {
  cfg.validate();
  if (schedule.config.n_y != cfg.grid.ny || schedule.config.n_z != cfg.grid.nz) {
    throw ConfigError("acquire: schedule grid (" + std::to_string(schedule.config.n_y) + "x" +
                      std::to_string(schedule.config.n_z) + ") does not match phantom grid");
  }
  if (schedule.config.encodings > 4) throw ConfigError("acquire: at most 4 encodings supported");

  const std::size_t n = schedule.size();
  const BeatModel beats = make_beats(cfg);
  const auto maps = coil_maps(cfg);
  const Renderer renderer(cfg);

  RawAcquisition acq;
  acq.header.grid = cfg.grid;
  acq.header.tr = cfg.tr;
  acq.header.venc = cfg.venc;
  acq.header.encodings = schedule.config.encodings;
  acq.header.sg_interval = schedule.config.sg_interval;
  acq.header.n_coils = cfg.n_coils;
  acq.header.n_readouts = static_cast<std::int64_t>(n);
  acq.header.voxel_size_mm = cfg.voxel_size_mm;
  acq.schedule = schedule;

  GroundTruth truth;
  truth.phantom = cfg;
  truth.beat_starts = beats.starts;
  truth.cardiac_phase.resize(n);
  truth.respiration.resize(n);
  std::vector<kernels::LineRequest> lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * cfg.tr;
    truth.cardiac_phase[i] = static_cast<float>(beats.cardiac_phase(t));
    truth.respiration[i] = static_cast<float>(respiratory_displacement(cfg, t));
    lines[i] = {schedule.entries[i].ky - 1, schedule.entries[i].kz - 1};
  }

  auto render = [&](std::size_t i, Volume& img) {
    const double t = static_cast<double>(i) * cfg.tr;
    renderer.render({beats.cardiac_phase(t), respiratory_displacement(cfg, t)},
                    schedule.entries[i].encoding, img);
  };
  acq.samples.resize(n * cfg.n_coils * cfg.grid.nx);
  kernels::omp::project_lines(render, maps, lines, acq.samples);

  if (cfg.noise_sigma > 0.0) {
    const std::size_t per_line = static_cast<std::size_t>(cfg.n_coils) * cfg.grid.nx;
    const auto ln = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ln; ++i) {
      std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1)));
      std::normal_distribution<float> gauss(0.0f, static_cast<float>(cfg.noise_sigma / std::sqrt(2.0)));
      cplxf* line = acq.samples.data() + i * per_line;
      for (std::size_t j = 0; j < per_line; ++j) line[j] += cplxf(gauss(rng), gauss(rng));
    }
  }
  acq.truth = std::move(truth);
  return acq;
}

FlowTruth analytic_flow_truth(const PhantomConfig& cfg, double mean_rr_s) {
  const double a_mm = cfg.tube_radius * cfg.voxel_size_mm;
  const double area_mm2 = kPi * a_mm * a_mm;
  const double b = cfg.diastolic_flow_fraction;
  const double mean_w = b + 0.5 * (1.0 - b);
  FlowTruth t;
  t.mean_rr_s = mean_rr_s;
  // v [cm/s] * area [mm^2] * 0.01 = mL/s; Poiseuille mean velocity is v_peak / 2.
  t.peak_flow_ml_s = 0.5 * cfg.v_peak * area_mm2 * 0.01;
  t.net_flow_ml = t.peak_flow_ml_s * mean_w * mean_rr_s;
  t.peak_velocity_cm_s = cfg.v_peak;
  return t;
}

double bin_averaged_waveform(const PhantomConfig& cfg, int bin, int n_bins) {
  const double b = cfg.diastolic_flow_fraction;
  const double p0 = static_cast<double>(bin) / n_bins - cfg.systolic_peak_phase;
  const double p1 = static_cast<double>(bin + 1) / n_bins - cfg.systolic_peak_phase;
  const double mean_cos =
      (std::sin(2.0 * kPi * p1) - std::sin(2.0 * kPi * p0)) / (2.0 * kPi * (p1 - p0));
  return b + (1.0 - b) * 0.5 * (1.0 + mean_cos);
}

}  // namespace flowforge::phantom
