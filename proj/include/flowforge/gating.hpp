#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowforge/phantom.hpp"

namespace flowforge::gating {

/// Pass band in Hz; low = 0 means low-pass.
struct Band {
  double low = 0.0;
  double high = 0.0;
};

/// Self-gating projections: rows are coil * n_x + x, columns are SG readouts
/// in time order.
struct CasoratiMatrix {
  Eigen::MatrixXd values;
  std::vector<double> sg_times;           // s
  std::vector<std::size_t> sg_readouts;   // schedule positions
  double sample_rate_hz = 0.0;
  int n_ro = 0;
  int n_coils = 0;
};

inline constexpr std::size_t kMinSgReadouts = 16;

CasoratiMatrix build_casorati(const phantom::RawAcquisition& acq);

/// Hamming windowed-sinc FIR (odd length, symmetric).
std::vector<double> design_fir(const Band& band, double sample_rate_hz, int length);

struct SurrogateConfig {
  Band cardiac{0.5, 3.0};
  Band respiratory{0.0, 0.5};
  double kernel_seconds = 8.0;
};

struct Surrogates {
  std::vector<double> v_c;
  std::vector<double> v_r;
  double sigma_c = 0.0;  // leading singular values of the filtered matrices
  double sigma_r = 0.0;
  bool degenerate = false;
};

Surrogates extract_surrogates(const CasoratiMatrix& cm, const SurrogateConfig& cfg = {});

/// Catmull-Rom interpolation by an integer factor; output length (n-1)*f+1.
std::vector<double> upsample(std::span<const double> v, int factor);

struct TriggerConfig {
  int upsample = 8;
  double max_heart_rate_hz = 3.0;  // sets the minimum trigger spacing
  // Take v_C's sign as given (peaks at end-diastole) instead of inferring it
  // from the waveform; near-sinusoidal surrogates carry no polarity cue.
  bool fixed_polarity = false;
};

/// Trigger times (s, first sample at t0) from the cardiac surrogate.
std::vector<double> detect_triggers(std::span<const double> v_c, double sample_rate_hz,
                                    const TriggerConfig& cfg = {}, double t0 = 0.0);

enum class BeatStatus { accepted, arrhythmia };

struct Beat {
  double start = 0.0;
  double end = 0.0;
  BeatStatus status = BeatStatus::accepted;
  double rr() const { return end - start; }
};

struct ArrhythmiaResult {
  std::vector<Beat> beats;  // one per consecutive trigger pair
  double mean_rr = 0.0;
  double sd_rr = 0.0;
  std::size_t n_rejected() const;
};

inline constexpr std::size_t kMinTriggers = 4;

/// Single-pass 3-sigma test on RR intervals.
ArrhythmiaResult reject_arrhythmia(std::span<const double> triggers, double n_sigma = 3.0);

struct GmmFit {
  double mean[2]{};
  double var[2]{};
  double weight[2]{};
  int iterations = 0;
  bool converged = false;
};

GmmFit fit_gmm2(std::span<const double> x, int max_iters = 500);

struct RespiratoryWeights {
  std::vector<double> v_r_interp;
  std::vector<double> weights;
  double mu = 0.0;
  double phi = 0.0;
  int p = 4;
  double target_efficiency = 50.0;
  double achieved_efficiency = 0.0;
  bool target_attainable = true;
  bool gmm_converged = true;
  std::vector<std::string> warnings;
};

RespiratoryWeights respiratory_weights(std::span<const double> sg_times, std::span<const double> v_r,
                                       std::span<const double> readout_times,
                                       double target_efficiency_percent, int p);

struct PrecisionError {
  double precision_error_s = 0.0;
  std::size_t matched_count = 0;
  double mean_offset_s = 0.0;
};

PrecisionError precision_error(std::span<const double> sg_triggers,
                               std::span<const double> ecg_triggers, double window_s = 0.2);

struct GatingConfig {
  SurrogateConfig surrogates;
  TriggerConfig triggers{8, 3.0, true};
  double target_efficiency = 50.0;
  int p = 4;
};

struct GatingResult {
  GatingConfig config;
  double sample_rate_hz = 0.0;
  std::vector<double> sg_times;
  std::vector<double> v_c;
  std::vector<double> v_r;
  std::vector<double> triggers;  // all detected triggers
  ArrhythmiaResult beats;
  RespiratoryWeights respiration;
};

GatingResult gate(const phantom::RawAcquisition& acq, const GatingConfig& cfg = {});

/// v_C and v_R traces with trigger markers over the first `seconds` of data.
std::string traces_svg(const GatingResult& result, double seconds = 10.0);

}  // namespace flowforge::gating
