#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flowforge::sampling {

/// Golden ratio used for the angular advance.
inline constexpr double kGoldenRatio = 1.6180339887498948482;

/// Parameters of the pseudo-random variable-density Cartesian pattern.
struct SamplingConfig {
  int n_y = 96;
  int n_z = 56;
  int encodings = 4;
  std::int64_t n_readouts = 75000;
  int sg_interval = 9;
  /// Density offset; <= 0 selects the default ((n_y * n_z) / 4)^(1/4).
  double c = 0.0;
  double d = 1.5;
  double g_r = 3.2710663101885897;  // cube root of 35
  double theta_0 = 0.0;
  double r_0 = 0.0;

  double r_max() const;
  double density_offset() const;
  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// One readout of the schedule. ky/kz and encoding are 1-based.
struct ScheduleEntry {
  std::int64_t sample = -1;  // angular sample index i (-1 for self-gating lines)
  int encoding = 1;
  int ky = 0;
  int kz = 0;
  bool is_sg = false;
  double theta = 0.0;         // radians, imaging entries only
  double radius_scaled = 0.0; // S{r(i)}, before normalisation
};

struct SamplingSchedule {
  SamplingConfig config;
  std::vector<ScheduleEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::size_t sg_count() const;
  /// Grid-centre indices (1-based) hit by self-gating lines.
  int center_ky() const { return config.n_y / 2 + 1; }
  int center_kz() const { return config.n_z / 2 + 1; }
};

/// 2*pi*(2 - golden ratio), the per-sample angular advance.
double golden_angle_increment();

double next_angle(const SamplingConfig& cfg, std::int64_t i, int e);
double next_radius(const SamplingConfig& cfg, double r_prev);
double density_scale(const SamplingConfig& cfg, double r);

SamplingSchedule generate_schedule(const SamplingConfig& cfg);

struct FigureOfMerit {
  double efficiency_percent = 0.0;
  double acceleration = 0.0;
};

/// Efficiency over all readouts and acceleration over the retained imaging
/// readouts. `retained` (optional, same length as the schedule) marks readouts
/// that ended up in a bin; when empty every imaging readout counts.
FigureOfMerit figure_of_merit(const SamplingSchedule& schedule, std::span<const double> weights,
                              double n_matrix, int n_frames, int encodings,
                              std::span<const std::uint8_t> retained = {});

/// CSV with columns i,e,ky,kz,is_sg (i is the 0-based readout position).
void write_schedule_csv(const SamplingSchedule& schedule, const std::string& path);
SamplingSchedule read_schedule_csv(const std::string& path, const SamplingConfig& cfg);

/// Heat-map of how often each (ky, kz) cell is visited by one encoding.
std::string density_svg(const SamplingSchedule& schedule, int encoding);

}  // namespace flowforge::sampling
