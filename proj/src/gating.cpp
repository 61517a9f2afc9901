#include "flowforge/gating.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "flowforge/errors.hpp"
#include "flowforge/fft.hpp"
#include "flowforge/kernels.hpp"
#include "flowforge/svg.hpp"

namespace flowforge::gating {
namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x); }

// Unit-DC-gain Hamming low-pass with cutoff fc (Hz).
std::vector<double> lowpass(double fc, double fs, int length) {
  std::vector<double> h(length);
  const int m = (length - 1) / 2;
  const double f = fc / fs;
  double sum = 0.0;
  for (int n = 0; n < length; ++n) {
    const double w = length > 1 ? 0.54 - 0.46 * std::cos(2.0 * kPi * n / (length - 1)) : 1.0;
    h[n] = 2.0 * f * sinc(2.0 * f * (n - m)) * w;
    sum += h[n];
  }
  for (auto& v : h) v /= sum;
  return h;
}

// Leading right-singular vector of `m` through the small Gram matrix m m^T.
std::pair<std::vector<double>, double> leading_right_vector(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd gram = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::Index top = gram.rows() - 1;
  const double lambda = std::max(0.0, eig.eigenvalues()(top));
  const double sigma = std::sqrt(lambda);
  std::vector<double> v(m.cols(), 0.0);
  const double total = gram.trace();
  if (!(sigma > 0.0) || !(lambda > 1e-24 * std::max(total, 1e-300)) || !std::isfinite(sigma)) {
    return {v, 0.0};
  }
  const Eigen::VectorXd right = m.transpose() * eig.eigenvectors().col(top);
  const double norm = right.norm();
  for (Eigen::Index i = 0; i < right.size(); ++i) v[i] = right(i) / norm;
  return {v, sigma};
}

double skewness(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Dominant frequency of v in [f_lo, f_hi] by direct periodogram evaluation.
double dominant_frequency(std::span<const double> v, double fs, double f_lo, double f_hi) {
  const double step = fs / (4.0 * static_cast<double>(v.size()));
  double best_f = f_lo, best_p = -1.0;
  for (double f = f_lo; f <= f_hi; f += step) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double arg = 2.0 * kPi * f * static_cast<double>(j) / fs;
      re += v[j] * std::cos(arg);
      im -= v[j] * std::sin(arg);
    }
    const double pw = re * re + im * im;
    if (pw > best_p) {
      best_p = pw;
      best_f = f;
    }
  }
  return best_f;
}

struct Peak {
  double index;  // fractional upsampled index
  double height;
};

// Each cycle is marked by its steepest descending crossing, found as a deep
// local minimum of the slope; slow baseline drift barely changes the slope,
// so cycles whose lobe never clears zero are still found. The trigger is the
// local peak immediately preceding that descent.
std::vector<double> triggers_for(std::span<const double> u, double dt, double min_spacing,
                                 double expected_cycles, double t0) {
  std::vector<std::size_t> cand;
  for (std::size_t j = 1; j + 2 < u.size(); ++j) {
    const double d0 = u[j] - u[j - 1], d1 = u[j + 1] - u[j], d2 = u[j + 2] - u[j + 1];
    if (d1 < 0.0 && d1 <= d0 && d1 < d2) cand.push_back(j);
  }
  if (cand.empty()) return {};
  const auto slope = [&](std::size_t j) { return u[j + 1] - u[j]; };
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return slope(a) < slope(b); });

  // Reference steepness: median over the expected number of cycles.
  const std::size_t n_ref = std::clamp<std::size_t>(static_cast<std::size_t>(expected_cycles), 1, cand.size());
  const double threshold = 0.3 * slope(cand[n_ref / 2]);
  const auto gap = static_cast<std::ptrdiff_t>(std::ceil(min_spacing / dt));
  std::vector<std::size_t> kept;
  for (std::size_t j : cand) {
    if (slope(j) > threshold) break;
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return std::abs(static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(j)) < gap;
    });
    if (clear) kept.push_back(j);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<Peak> peaks;
  for (std::size_t j : kept) {
    std::size_t k = j;
    while (k > 0 && u[k - 1] > u[k]) --k;
    if (k == 0) continue;  // peak precedes the record
    double idx = static_cast<double>(k);
    if (k + 1 < u.size()) {
      const double a = u[k - 1], b = u[k], d = u[k + 1];
      const double den = a - 2.0 * b + d;
      if (den < 0.0) idx += std::clamp(0.5 * (a - d) / den, -0.5, 0.5);
    }
    const Peak p{idx, u[k]};
    if (!peaks.empty() && (p.index - peaks.back().index) * dt < min_spacing) {
      if (p.height > peaks.back().height) peaks.back() = p;
      continue;
    }
    peaks.push_back(p);
  }
  std::vector<double> times;
  times.reserve(peaks.size());
  for (const auto& p : peaks) times.push_back(t0 + p.index * dt);
  return times;
}

double rr_variance(const std::vector<double>& t) {
  if (t.size() < 3) return std::numeric_limits<double>::infinity();
  std::vector<double> rr(t.size() - 1);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) rr[i] = t[i + 1] - t[i];
  const double sd = sample_sd(rr);
  return sd * sd;
}

}  // namespace

CasoratiMatrix build_casorati(const phantom::RawAcquisition& acq) {
  const auto& h = acq.header;
  std::vector<std::size_t> sg;
  for (std::size_t i = 0; i < acq.schedule.size(); ++i) {
    if (acq.schedule.entries[i].is_sg) sg.push_back(i);
  }
  if (sg.size() < kMinSgReadouts) {
    throw DataError("build_casorati: found " + std::to_string(sg.size()) +
                    " self-gating readouts, at least " + std::to_string(kMinSgReadouts) +
                    " are required");
  }
  if (acq.samples.size() < static_cast<std::size_t>(h.n_readouts) * h.n_coils * h.grid.nx) {
    throw DataError("build_casorati: sample buffer shorter than the header declares");
  }
  CasoratiMatrix cm;
  cm.n_ro = h.grid.nx;
  cm.n_coils = h.n_coils;
  cm.sample_rate_hz = 1.0 / (h.sg_interval * h.tr);
  cm.sg_readouts = sg;
  cm.sg_times.resize(sg.size());
  cm.values.resize(static_cast<Eigen::Index>(h.n_coils) * h.grid.nx, static_cast<Eigen::Index>(sg.size()));
  const auto ncols = static_cast<std::ptrdiff_t>(sg.size());
#pragma omp parallel
  {
    std::vector<cplx> line(h.grid.nx);
#pragma omp for schedule(static)
    for (std::ptrdiff_t l = 0; l < ncols; ++l) {
      cm.sg_times[l] = acq.time(sg[l]);
      for (int c = 0; c < h.n_coils; ++c) {
        const auto src = acq.line(sg[l], c);
        std::copy(src.begin(), src.end(), line.begin());
        fft::fft1c(line, fft::Direction::inverse);
        for (int x = 0; x < h.grid.nx; ++x) {
          cm.values(static_cast<Eigen::Index>(c) * h.grid.nx + x, l) = std::abs(line[x]);
        }
      }
    }
  }
  if (!cm.values.allFinite()) throw DataError("build_casorati: non-finite projection");
  return cm;
}

std::vector<double> design_fir(const Band& band, double fs, int length) {
  if (length < 3 || length % 2 == 0) throw ConfigError("design_fir: length must be odd and >= 3");
  const double nyquist = fs / 2.0;
  if (!(band.low >= 0.0 && band.high > band.low && band.high < nyquist)) {
    throw ConfigError("design_fir: band [" + std::to_string(band.low) + ", " +
                      std::to_string(band.high) + "] Hz must satisfy 0 <= low < high < Nyquist (" +
                      std::to_string(nyquist) + " Hz)");
  }
  auto h = lowpass(band.high, fs, length);
  if (band.low > 0.0) {
    const auto lo = lowpass(band.low, fs, length);
    for (int i = 0; i < length; ++i) h[i] -= lo[i];
  }
  return h;
}

Surrogates extract_surrogates(const CasoratiMatrix& cm, const SurrogateConfig& cfg) {
  const double fs = cm.sample_rate_hz;
  int length = static_cast<int>(std::lround(cfg.kernel_seconds * fs));
  if (length % 2 == 0) ++length;
  length = std::max(length, 3);
  const auto hc = design_fir(cfg.cardiac, fs, length);
  const auto hr = design_fir(cfg.respiratory, fs, length);

  Eigen::MatrixXd centred = cm.values.colwise() - cm.values.rowwise().mean();
  Eigen::MatrixXd fc, fr;
  kernels::omp::fir_rows(centred, hc, fc);
  kernels::omp::fir_rows(centred, hr, fr);

  Surrogates s;
  std::tie(s.v_c, s.sigma_c) = leading_right_vector(fc);
  std::tie(s.v_r, s.sigma_r) = leading_right_vector(fr);
  s.degenerate = !(s.sigma_c > 0.0) || !(s.sigma_r > 0.0);

  // v_C follows the total band-passed signal, so its peaks mark the bright
  // (end-diastolic) phase.
  const Eigen::VectorXd dc = fc.colwise().sum().transpose();
  double corr = 0.0;
  for (std::size_t i = 0; i < s.v_c.size(); ++i) corr += s.v_c[i] * dc(i);
  if (corr < 0.0) {
    for (auto& v : s.v_c) v = -v;
  }
  // v_R: the dense end-expiration mode on the positive side.
  if (!s.v_r.empty() && skewness(s.v_r) > 0.0) {
    for (auto& v : s.v_r) v = -v;
  }
  return s;
}

std::vector<double> upsample(std::span<const double> v, int factor) {
  if (factor < 1) throw ConfigError("upsample: factor must be >= 1");
  const std::size_t n = v.size();
  if (n < 2 || factor == 1) return {v.begin(), v.end()};
  std::vector<double> out((n - 1) * factor + 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double p0 = v[k == 0 ? 0 : k - 1], p1 = v[k], p2 = v[k + 1];
    const double p3 = v[std::min(k + 2, n - 1)];
    for (int j = 0; j < factor; ++j) {
      const double t = static_cast<double>(j) / factor;
      const double t2 = t * t, t3 = t2 * t;
      out[k * factor + j] = 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                                   (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
    }
  }
  out.back() = v.back();
  return out;
}

std::vector<double> detect_triggers(std::span<const double> v_c, double fs, const TriggerConfig& cfg,
                                    double t0) {
  if (!(fs > 0.0)) throw ConfigError("detect_triggers: sample rate must be > 0");
  if (v_c.size() < 2 || static_cast<double>(v_c.size()) < 2.0 * fs / 0.5) {
    throw DataError("detect_triggers: cardiac surrogate too short (" + std::to_string(v_c.size()) +
                    " samples, need at least two cycles at 30 bpm)");
  }
  auto u = upsample(v_c, cfg.upsample);
  const double dt = 1.0 / (fs * cfg.upsample);
  const double min_spacing = 1.0 / cfg.max_heart_rate_hz;

  std::vector<double> du(u.size() - 1);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) du[i] = u[i + 1] - u[i];
  double m2 = 0.0, m3 = 0.0;
  for (double d : du) {
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(du.size());
  m3 /= static_cast<double>(du.size());
  const double slope_skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;

  const double cycles = static_cast<double>(v_c.size()) / fs *
                        dominant_frequency(v_c, fs, 0.5, std::min(cfg.max_heart_rate_hz, 0.5 * fs));

  std::vector<double> flipped(u.size());
  std::transform(u.begin(), u.end(), flipped.begin(), [](double x) { return -x; });

  std::vector<double> times;
  if (cfg.fixed_polarity) {
    times = triggers_for(u, dt, min_spacing, cycles, t0);
  } else if (std::abs(slope_skew) > 0.2) {
    // Sharp systolic drop after the end-diastolic peak: choose the polarity
    // whose derivative is negatively skewed.
    times = triggers_for(slope_skew < 0.0 ? std::span<const double>(u) : flipped, dt, min_spacing, cycles, t0);
  } else {
    auto a = triggers_for(u, dt, min_spacing, cycles, t0);
    auto b = triggers_for(flipped, dt, min_spacing, cycles, t0);
    const double va = rr_variance(a), vb = rr_variance(b);
    times = (vb < 0.8 * va) ? std::move(b) : std::move(a);
  }
  if (times.empty()) throw DataError("detect_triggers: no cardiac activity detected");
  return times;
}

std::size_t ArrhythmiaResult::n_rejected() const {
  return static_cast<std::size_t>(std::count_if(
      beats.begin(), beats.end(), [](const Beat& b) { return b.status != BeatStatus::accepted; }));
}

ArrhythmiaResult reject_arrhythmia(std::span<const double> triggers, double n_sigma) {
  if (triggers.size() < kMinTriggers) {
    throw DataError("reject_arrhythmia: need at least " + std::to_string(kMinTriggers) +
                    " triggers, got " + std::to_string(triggers.size()));
  }
  ArrhythmiaResult res;
  std::vector<double> rr;
  for (std::size_t i = 0; i + 1 < triggers.size(); ++i) {
    if (!(triggers[i + 1] > triggers[i])) throw DataError("reject_arrhythmia: triggers not increasing");
    res.beats.push_back({triggers[i], triggers[i + 1], BeatStatus::accepted});
    rr.push_back(triggers[i + 1] - triggers[i]);
  }
  res.mean_rr = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
  res.sd_rr = sample_sd(rr);
  for (std::size_t k = 0; k < rr.size(); ++k) {
    if (std::abs(rr[k] - res.mean_rr) > n_sigma * res.sd_rr) res.beats[k].status = BeatStatus::arrhythmia;
  }
  return res;
}

GmmFit fit_gmm2(std::span<const double> x, int max_iters) {
  GmmFit fit;
  const std::size_t n = x.size();
  if (n == 0) throw DataError("fit_gmm2: empty input");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) { return sorted[static_cast<std::size_t>(q * (n - 1))]; };
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (!(var > 0.0)) {
    fit.mean[0] = fit.mean[1] = mean;
    fit.weight[0] = 1.0;
    fit.converged = true;
    return fit;
  }
  fit.mean[0] = quantile(0.25);
  fit.mean[1] = quantile(0.75);
  fit.var[0] = fit.var[1] = var / 4.0;
  fit.weight[0] = fit.weight[1] = 0.5;
  const double floor = 1e-10 * var;

  std::vector<double> r(n);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double lp[2];
      for (int k = 0; k < 2; ++k) {
        const double d = x[i] - fit.mean[k];
        lp[k] = std::log(fit.weight[k]) - 0.5 * std::log(2.0 * kPi * fit.var[k]) - 0.5 * d * d / fit.var[k];
      }
      const double m = std::max(lp[0], lp[1]);
      const double lse = m + std::log(std::exp(lp[0] - m) + std::exp(lp[1] - m));
      r[i] = std::exp(lp[0] - lse);
      ll += lse;
    }
    double n0 = 0.0, s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      n0 += r[i];
      s0 += r[i] * x[i];
      s1 += (1.0 - r[i]) * x[i];
    }
    const double n1 = static_cast<double>(n) - n0;
    if (n0 < 1e-9 || n1 < 1e-9) {
      fit.iterations = it;
      fit.converged = false;
      return fit;
    }
    fit.mean[0] = s0 / n0;
    fit.mean[1] = s1 / n1;
    double v0 = 0.0, v1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v0 += r[i] * (x[i] - fit.mean[0]) * (x[i] - fit.mean[0]);
      v1 += (1.0 - r[i]) * (x[i] - fit.mean[1]) * (x[i] - fit.mean[1]);
    }
    fit.var[0] = v0 / n0;
    fit.var[1] = v1 / n1;
    fit.weight[0] = n0 / static_cast<double>(n);
    fit.weight[1] = n1 / static_cast<double>(n);
    fit.iterations = it;
    if (fit.var[0] < floor || fit.var[1] < floor) {
      fit.converged = false;
      return fit;
    }
    if (std::abs(ll - prev_ll) <= 1e-10 * std::abs(ll)) {
      fit.converged = true;
      return fit;
    }
    prev_ll = ll;
  }
  fit.converged = false;
  return fit;
}

namespace {

double histogram_mode(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const int bins = 64;
  if (!(*hi > *lo)) return *lo;
  std::vector<int> count(bins, 0);
  const double w = (*hi - *lo) / bins;
  for (double v : x) ++count[std::min(bins - 1, static_cast<int>((v - *lo) / w))];
  const int best = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
  return *lo + (best + 0.5) * w;
}

double efficiency(std::span<const double> dist, double phi) {
  double s = 0.0;
  for (double d : dist) {
    const double w = std::exp(-d / phi);
    s += w * w;
  }
  return 100.0 * s / static_cast<double>(dist.size());
}

}  // namespace

RespiratoryWeights respiratory_weights(std::span<const double> sg_times, std::span<const double> v_r,
                                       std::span<const double> readout_times, double target, int p) {
  if (p < 1 || p % 2 != 0) throw ConfigError("respiratory_weights: p must be a positive even integer");
  if (!(target > 0.0 && target <= 100.0)) {
    throw ConfigError("respiratory_weights: target efficiency must lie in (0, 100]");
  }
  if (sg_times.size() != v_r.size() || v_r.empty()) {
    throw DataError("respiratory_weights: v_R and SG times must be non-empty and of equal length");
  }
  if (readout_times.empty()) throw DataError("respiratory_weights: no readouts");

  RespiratoryWeights res;
  res.p = p;
  res.target_efficiency = target;
  res.v_r_interp.resize(readout_times.size());
  for (std::size_t i = 0; i < readout_times.size(); ++i) {
    const double t = readout_times[i];
    const auto it = std::upper_bound(sg_times.begin(), sg_times.end(), t);
    if (it == sg_times.begin()) {
      res.v_r_interp[i] = v_r.front();
    } else if (it == sg_times.end()) {
      res.v_r_interp[i] = v_r.back();
    } else {
      const std::size_t k = static_cast<std::size_t>(it - sg_times.begin());
      const double a = (t - sg_times[k - 1]) / (sg_times[k] - sg_times[k - 1]);
      res.v_r_interp[i] = (1.0 - a) * v_r[k - 1] + a * v_r[k];
    }
  }

  const GmmFit fit = fit_gmm2(res.v_r_interp);
  if (fit.converged) {
    // Most prominent = tallest histogram peak, weight / sigma; a broad
    // component can carry more mass without being the populated mode.
    const double h0 = fit.weight[0] / std::sqrt(fit.var[0]);
    const double h1 = fit.weight[1] / std::sqrt(fit.var[1]);
    int k = h0 > h1 ? 0 : 1;
    if (std::abs(h0 - h1) <= 1e-9 * std::max(h0, h1)) k = fit.var[0] <= fit.var[1] ? 0 : 1;
    res.mu = fit.mean[k];
  } else {
    res.gmm_converged = false;
    res.mu = histogram_mode(res.v_r_interp);
    res.warnings.push_back("GMM did not converge; weighting centre taken from the histogram mode");
  }

  std::vector<double> dist(res.v_r_interp.size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = std::pow(res.v_r_interp[i] - res.mu, p);

  std::vector<double> positive;
  for (double d : dist) {
    if (d > 0.0) positive.push_back(d);
  }
  if (positive.empty()) {
    res.phi = std::numeric_limits<double>::infinity();
  } else {
    std::nth_element(positive.begin(), positive.begin() + positive.size() / 2, positive.end());
    const double scale = positive[positive.size() / 2];
    double lo = scale * 1e-12, hi = scale * 1e12;
    for (int i = 0; i < 20 && efficiency(dist, lo) > target; ++i) lo *= 1e-6;
    for (int i = 0; i < 20 && efficiency(dist, hi) < target; ++i) hi *= 1e6;
    double phi = std::sqrt(lo * hi);
    for (int it = 0; it < 300; ++it) {
      phi = std::sqrt(lo * hi);
      const double e = efficiency(dist, phi);
      if (std::abs(e - target) < 1e-7) break;
      (e < target ? lo : hi) = phi;
    }
    res.phi = phi;
  }

  res.weights.resize(dist.size());
  double s = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double w = std::isinf(res.phi) ? 1.0 : std::exp(-dist[i] / res.phi);
    res.weights[i] = std::clamp(w, 0.0, 1.0);
    s += res.weights[i] * res.weights[i];
  }
  res.achieved_efficiency = 100.0 * s / static_cast<double>(dist.size());
  if (std::abs(res.achieved_efficiency - target) > 0.1) {
    res.target_attainable = false;
    res.warnings.push_back("target efficiency not attainable; achieved " +
                           std::to_string(res.achieved_efficiency) + "%");
  }
  return res;
}

PrecisionError precision_error(std::span<const double> sg, std::span<const double> ecg,
                               double window_s) {
  if (sg.empty() || ecg.empty()) throw DataError("precision_error: both trigger trains must be non-empty");
  std::vector<double> diffs;
  for (double t : sg) {
    const auto it = std::lower_bound(ecg.begin(), ecg.end(), t);
    double best = std::numeric_limits<double>::infinity();
    if (it != ecg.end()) best = *it - t;
    if (it != ecg.begin() && std::abs(*(it - 1) - t) < std::abs(best)) best = *(it - 1) - t;
    if (std::abs(best) <= window_s) diffs.push_back(-best);  // TT_SG - TT_ECG
  }
  if (diffs.size() < 2) {
    throw DataError("precision_error: " + std::to_string(diffs.size()) +
                    " trigger(s) matched within the window; need at least 2");
  }
  PrecisionError pe;
  pe.matched_count = diffs.size();
  pe.mean_offset_s = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
  pe.precision_error_s = sample_sd(diffs);
  return pe;
}

GatingResult gate(const phantom::RawAcquisition& acq, const GatingConfig& cfg) {
  const auto cm = build_casorati(acq);
  const auto s = extract_surrogates(cm, cfg.surrogates);
  if (s.degenerate) throw DataError("gate: self-gating signal is degenerate (no temporal variation)");
  GatingResult res;
  res.config = cfg;
  res.sample_rate_hz = cm.sample_rate_hz;
  res.sg_times = cm.sg_times;
  res.v_c = s.v_c;
  res.v_r = s.v_r;
  res.triggers = detect_triggers(res.v_c, cm.sample_rate_hz, cfg.triggers, cm.sg_times.front());
  res.beats = reject_arrhythmia(res.triggers);
  std::vector<double> times(acq.schedule.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = acq.time(i);
  res.respiration = respiratory_weights(res.sg_times, res.v_r, times, cfg.target_efficiency, cfg.p);
  return res;
}

std::string traces_svg(const GatingResult& r, double seconds) {
  auto scaled = [&](const std::vector<double>& v, double offset) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    svg::Series s;
    for (std::size_t i = 0; i < v.size() && r.sg_times[i] <= r.sg_times.front() + seconds; ++i) {
      s.x.push_back(r.sg_times[i]);
      s.y.push_back(offset + (m > 0.0 ? v[i] / m : 0.0));
    }
    return s;
  };
  auto vc = scaled(r.v_c, 1.2);
  vc.label = "v_C";
  auto vr = scaled(r.v_r, -1.2);
  vr.label = "v_R";
  vr.color = "#2ca02c";
  svg::Series trig;
  trig.label = "triggers";
  trig.color = "#d62728";
  trig.markers = true;
  for (double t : r.triggers) {
    if (t > r.sg_times.front() + seconds) break;
    trig.x.push_back(t);
    trig.y.push_back(2.3);
  }
  svg::Axes axes;
  axes.title = "self-gating surrogates";
  axes.x_label = "time (s)";
  axes.y_label = "normalised amplitude";
  return svg::line_plot(axes, {vc, vr, trig});
}

}  // namespace flowforge::gating
