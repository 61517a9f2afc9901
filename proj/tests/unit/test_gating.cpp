#include "doctest.h"

#include <algorithm>
#include <random>

#include "../fixtures.hpp"
#include "flowforge/errors.hpp"
#include "flowforge/gating.hpp"
#include "oracles.hpp"

using namespace flowforge;
using namespace flowforge::gating;

namespace {

constexpr double kFs = 1.0 / (9 * 0.014);

/// Casorati matrix with rows gain_r * signal(t) + offset_r.
CasoratiMatrix synthetic(int rows, int cols, const std::function<double(double)>& signal) {
  CasoratiMatrix cm;
  cm.values.resize(rows, cols);
  cm.sample_rate_hz = kFs;
  cm.n_ro = rows;
  cm.n_coils = 1;
  for (int j = 0; j < cols; ++j) {
    const double t = j / kFs;
    cm.sg_times.push_back(t);
    for (int r = 0; r < rows; ++r) cm.values(r, j) = (1.0 + 0.1 * r) * signal(t) + 5.0 + r;
  }
  return cm;
}

/// Periodogram energy of x below f (Hz) as a fraction of the total.
double energy_below(std::span<const double> x, double fs, double f) {
  const int n = static_cast<int>(x.size());
  const double m = oracle::mean(x);
  double low = 0.0, total = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < n; ++j) acc += (x[j] - m) * std::polar(1.0, -2.0 * M_PI * k * j / n);
    const double p = std::norm(acc);
    total += p;
    if (k * fs / n < f) low += p;
  }
  return low / total;
}

std::vector<double> sample(std::function<double(double)> f, double fs, double seconds) {
  std::vector<double> v(static_cast<std::size_t>(seconds * fs));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(i / fs);
  return v;
}

}  // namespace

TEST_CASE("Casorati: static noiseless phantom has identical columns; column count by schedule") {
  auto p = fixture::gating_phantom(1.2, 6.0, 1);
  p.v_peak = 0.0;
  p.cardiac_modulation = 0.0;
  p.resp_shift_mm = 0.0;
  p.noise_sigma = 0.0;
  const auto acq = fixture::acquire(p);
  const auto cm = build_casorati(acq);
  CHECK(cm.values.cols() == static_cast<Eigen::Index>((acq.schedule.size() + 8) / 9));
  CHECK(cm.values.rows() == p.grid.nx * p.n_coils);
  CHECK(cm.sample_rate_hz == doctest::Approx(1.0 / (9 * p.tr)));
  for (Eigen::Index r = 0; r < cm.values.rows(); ++r) {
    const double m = cm.values.row(r).mean();
    CHECK((cm.values.row(r).array() - m).square().mean() < 1e-9);
  }
  for (std::size_t j = 1; j < cm.sg_times.size(); ++j) CHECK(cm.sg_times[j] > cm.sg_times[j - 1]);
}

TEST_CASE("Casorati: respiration-only phantom peaks at the respiratory rate") {
  auto p = fixture::gating_phantom(1.2, 40.0, 2);
  p.v_peak = 0.0;
  p.cardiac_modulation = 0.0;
  p.noise_sigma = 0.0;
  const auto cm = build_casorati(fixture::acquire(p));
  const Eigen::VectorXd rm = cm.values.colwise().mean().transpose();
  const int n = static_cast<int>(rm.size());
  int best = 1;
  double best_p = 0.0;
  for (int k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < n; ++j) acc += (rm(j) - rm.mean()) * std::polar(1.0, -2.0 * M_PI * k * j / n);
    if (std::norm(acc) > best_p) {
      best_p = std::norm(acc);
      best = k;
    }
  }
  const double bin = cm.sample_rate_hz / n;
  CHECK(std::abs(best * bin - p.resp_rate_hz) <= bin);
}

TEST_CASE("too few SG lines is an error naming the minimum") {
  auto p = fixture::gating_phantom(1.2, 1.0, 1);
  p.duration = 0.1;
  const auto acq = fixture::acquire(p);
  try {
    build_casorati(acq);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("16") != std::string::npos);
  }
}

TEST_CASE("surrogates: 1.2 Hz rows are captured by v_C") {
  const auto cm = synthetic(12, 600, [](double t) { return std::sin(2 * M_PI * 1.2 * t); });
  const auto s = extract_surrogates(cm);
  std::vector<double> ref(cm.sg_times.size());
  for (std::size_t j = 0; j < ref.size(); ++j) ref[j] = std::sin(2 * M_PI * 1.2 * cm.sg_times[j]);
  CHECK(std::abs(oracle::correlation(s.v_c, ref)) >= 0.99);
  double nrm = 0.0;
  for (double v : s.v_c) nrm += v * v;
  CHECK(nrm == doctest::Approx(1.0));
}

TEST_CASE("surrogates: a 0.25 Hz signal stays out of the cardiac band") {
  const auto cm = synthetic(12, 600, [](double t) { return std::sin(2 * M_PI * 0.25 * t); });
  const auto s = extract_surrogates(cm);
  CHECK(s.sigma_c <= 0.05 * s.sigma_r);
}

TEST_CASE("surrogates: v_C holds at most 1% of its energy below the cardiac band") {
  const auto cm = synthetic(12, 800, [](double t) {
    return 3.0 * std::sin(2 * M_PI * 0.25 * t) + std::sin(2 * M_PI * 1.3 * t);
  });
  const auto s = extract_surrogates(cm);
  CHECK(energy_below(s.v_c, kFs, 0.5) <= 0.01);
}

TEST_CASE("surrogates: scaling the matrix leaves the surrogates unchanged up to sign") {
  auto cm = synthetic(8, 500, [](double t) {
    return std::sin(2 * M_PI * 0.3 * t) + 0.5 * std::sin(2 * M_PI * 1.1 * t + 0.4);
  });
  const auto a = extract_surrogates(cm);
  cm.values *= 37.0;
  const auto b = extract_surrogates(cm);
  CHECK(std::abs(oracle::correlation(a.v_c, b.v_c)) > 1.0 - 1e-9);
  CHECK(std::abs(oracle::correlation(a.v_r, b.v_r)) > 1.0 - 1e-9);
}

TEST_CASE("surrogates: zero input is flagged degenerate without NaN") {
  CasoratiMatrix cm;
  cm.values = Eigen::MatrixXd::Zero(4, 200);
  cm.sample_rate_hz = kFs;
  for (int j = 0; j < 200; ++j) cm.sg_times.push_back(j / kFs);
  const auto s = extract_surrogates(cm);
  CHECK(s.degenerate);
  for (double v : s.v_c) CHECK(std::isfinite(v));
}

TEST_CASE("FIR band outside Nyquist is rejected") {
  CHECK_THROWS_AS(design_fir({0.5, 5.0}, kFs, 63), ConfigError);
  CHECK_THROWS_AS(design_fir({0.5, 3.0}, kFs, 64), ConfigError);
  const auto h = design_fir({0.5, 3.0}, kFs, 63);
  for (int i = 0; i < 31; ++i) CHECK(h[i] == doctest::Approx(h[62 - i]));
}

TEST_CASE("upsample passes through the original samples") {
  const std::vector<double> v{0.0, 1.0, 4.0, 9.0, 16.0};
  const auto u = upsample(v, 4);
  REQUIRE(u.size() == 17);
  for (int k = 0; k < 5; ++k) CHECK(u[4 * k] == doctest::Approx(v[k]));
}

TEST_CASE("triggers of a clean sinusoid are spaced by the period") {
  for (double f : {0.9, 1.25, 1.6}) {
    const auto v = sample([f](double t) { return std::sin(2 * M_PI * f * t); }, kFs, 30.0);
    const auto trig = detect_triggers(v, kFs);
    REQUIRE(trig.size() >= 20);
    for (std::size_t k = 1; k < trig.size(); ++k) {
      CHECK(trig[k] > trig[k - 1]);
      CHECK(std::abs(trig[k] - trig[k - 1] - 1.0 / f) <= 1.0 / kFs);
    }
  }
}

TEST_CASE("trigger set is invariant to the polarity of v_C") {
  // Slow rise, fast fall: an asymmetric cardiac-like waveform.
  auto wave = [](double t) {
    const double ph = std::fmod(t * 1.1, 1.0);
    return ph < 0.8 ? ph / 0.8 : (1.0 - ph) / 0.2;
  };
  const auto v = sample(wave, kFs, 30.0);
  std::vector<double> neg(v.size());
  std::transform(v.begin(), v.end(), neg.begin(), [](double x) { return -x; });
  const auto a = detect_triggers(v, kFs);
  const auto b = detect_triggers(neg, kFs);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("flat cardiac surrogate reports no cardiac activity") {
  const std::vector<double> flat(400, 0.0);
  CHECK_THROWS_AS(detect_triggers(flat, kFs), DataError);
}

TEST_CASE("noiseless phantom: trigger count within one of the true beat count") {
  auto p = fixture::gating_phantom(1.25, 30.0, 3);
  p.noise_sigma = 0.0;
  const auto acq = fixture::acquire(p);
  const auto r = gate(acq);
  const auto truth = phantom::BeatModel{acq.truth->beat_starts}.triggers_in(r.sg_times.front(), r.sg_times.back());
  CHECK(std::abs(static_cast<long>(r.triggers.size()) - static_cast<long>(truth.size())) <= 1);
}

TEST_CASE("arrhythmia: identical RR gives no rejections") {
  std::vector<double> t;
  for (int k = 0; k < 20; ++k) t.push_back(0.8 * k);
  const auto r = reject_arrhythmia(t);
  CHECK(r.n_rejected() == 0);
  CHECK(r.beats.size() == 19);
  CHECK_THROWS_AS(reject_arrhythmia(std::vector<double>{0, 1, 2}), DataError);
}

TEST_CASE("arrhythmia: one 1800 ms beat among 50 jittered 900 ms beats") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> jitter(0.0, 0.02);
  std::vector<double> rr;
  for (int k = 0; k < 50; ++k) rr.push_back(0.9 + jitter(rng));
  rr.insert(rr.begin() + 23, 1.8);
  std::vector<double> t{0.0};
  for (double x : rr) t.push_back(t.back() + x);
  // Oracle threshold.
  const double m = oracle::mean(rr), sd = oracle::sample_sd(rr);
  std::vector<std::size_t> expected;
  for (std::size_t k = 0; k < rr.size(); ++k) {
    if (std::abs(rr[k] - m) > 3.0 * sd) expected.push_back(k);
  }
  REQUIRE(expected == std::vector<std::size_t>{23});
  const auto r = reject_arrhythmia(t);
  REQUIRE(r.beats.size() == rr.size());
  for (std::size_t k = 0; k < rr.size(); ++k) {
    CHECK((r.beats[k].status == BeatStatus::arrhythmia) == (k == 23));
  }
}

TEST_CASE("arrhythmia: simulated PVC short-long pairs are rejected") {
  // Breathing is switched off: its harmonics fall inside the cardiac band and
  // widen the detected RR spread enough to mask the smoothed PVC intervals.
  auto p = fixture::gating_phantom(1.25, 60.0, 4);
  p.resp_shift_mm = 0.0;
  p.rr_jitter_s = 0.01;
  p.arrhythmia_beats = {{20, 0.6}, {21, 1.45}, {50, 0.6}, {51, 1.45}};
  const auto acq = fixture::acquire(p);
  const auto r = gate(acq);
  const auto& starts = acq.truth->beat_starts;
  std::vector<double> pvc_starts{starts[20], starts[21], starts[50], starts[51]};
  CHECK(r.beats.n_rejected() == pvc_starts.size());
  for (const auto& b : r.beats.beats) {
    if (b.status != BeatStatus::arrhythmia) continue;
    const bool near = std::any_of(pvc_starts.begin(), pvc_starts.end(),
                                  [&](double s) { return std::abs(s - b.start) < 0.15; });
    CHECK(near);
  }
}

TEST_CASE("GMM: 70% component is chosen as the weighting centre") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> dense(1.0, 0.05), broad(0.0, 0.2);
  std::uniform_real_distribution<double> u;
  std::vector<double> x(4000), t(4000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = u(rng) < 0.7 ? dense(rng) : broad(rng);
    t[i] = 0.1 * i;
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const auto r = respiratory_weights(t, x, t, 50.0, 4);
  CHECK(std::abs(r.mu - 1.0) <= 0.05 * (*hi - *lo));
  const auto fit = fit_gmm2(x);
  CHECK(fit.converged);
  const int k = fit.weight[0] > fit.weight[1] ? 0 : 1;
  CHECK(fit.weight[k] == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("weights: constant surrogate gives W = 1 and 100% efficiency") {
  std::vector<double> t(100), v(100, 0.3);
  for (int i = 0; i < 100; ++i) t[i] = 0.1 * i;
  const auto r = respiratory_weights(t, v, t, 50.0, 4);
  for (double w : r.weights) CHECK(w == 1.0);
  CHECK(r.achieved_efficiency == doctest::Approx(100.0));
}

TEST_CASE("weights: 50% target on sinusoidal breathing, monotone in distance from mu") {
  std::vector<double> sg, v, ro;
  for (int i = 0; i < 800; ++i) {
    sg.push_back(i * 0.126);
    v.push_back(std::sin(2 * M_PI * 0.25 * sg.back()));
  }
  for (int i = 0; i < 7000; ++i) ro.push_back(i * 0.014);
  const auto r = respiratory_weights(sg, v, ro, 50.0, 4);
  double eff = 0.0;
  for (double w : r.weights) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    eff += w * w;
  }
  eff *= 100.0 / r.weights.size();
  CHECK(eff >= 49.9);
  CHECK(eff <= 50.1);
  CHECK(r.achieved_efficiency == doctest::Approx(eff).epsilon(1e-9));
  std::vector<std::size_t> order(ro.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(r.v_r_interp[a] - r.mu) < std::abs(r.v_r_interp[b] - r.mu);
  });
  for (std::size_t k = 1; k < order.size(); ++k) CHECK(r.weights[order[k]] <= r.weights[order[k - 1]]);
}

TEST_CASE("efficiency is non-decreasing in phi") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> d(500);
  for (auto& x : d) x = std::pow(g(rng), 4);
  double prev = -1.0;
  for (double phi = 1e-4; phi < 1e4; phi *= 3.0) {
    double e = 0.0;
    for (double x : d) e += std::exp(-2.0 * x / phi);
    CHECK(e >= prev);
    prev = e;
  }
  // Also through the public solver: raising the target never lowers phi.
  std::vector<double> t(500), v(500);
  for (int i = 0; i < 500; ++i) {
    t[i] = 0.1 * i;
    v[i] = std::sin(0.3 * i) + 0.2 * std::sin(1.7 * i);
  }
  double prev_phi = 0.0;
  for (double target : {20.0, 40.0, 60.0, 80.0}) {
    const auto r = respiratory_weights(t, v, t, target, 4);
    CHECK(r.phi >= prev_phi);
    prev_phi = r.phi;
  }
}

TEST_CASE("weights: invalid p or target") {
  std::vector<double> t{0, 1, 2}, v{0, 1, 0};
  CHECK_THROWS_AS(respiratory_weights(t, v, t, 50.0, 3), ConfigError);
  CHECK_THROWS_AS(respiratory_weights(t, v, t, 120.0, 4), ConfigError);
}

TEST_CASE("precision error: identical, constant offset and Gaussian jitter") {
  std::vector<double> ecg;
  for (int k = 0; k < 300; ++k) ecg.push_back(0.875 * k);
  auto same = precision_error(ecg, ecg);
  CHECK(same.precision_error_s == 0.0);
  CHECK(same.matched_count == 300);
  std::vector<double> off(ecg);
  for (auto& t : off) t += 0.0625;
  CHECK(precision_error(off, ecg).precision_error_s == 0.0);
  CHECK(precision_error(off, ecg).mean_offset_s == 0.0625);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> j(0.0, 0.015);
  std::vector<double> sg(ecg);
  for (auto& t : sg) t += j(rng);
  const auto pe = precision_error(sg, ecg);
  CHECK(pe.precision_error_s >= 0.012);
  CHECK(pe.precision_error_s <= 0.018);
  const std::vector<double> far{1000.0};
  CHECK_THROWS_AS(precision_error(far, ecg), DataError);
}
