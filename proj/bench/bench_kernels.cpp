// Serial reference vs OpenMP for each kernel, at desk-preset sizes.
//
//   ./bench_kernels --benchmark_filter=sense
//   OMP_NUM_THREADS=4 ./bench_kernels

#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "flowforge/kernels.hpp"

using namespace flowforge;
namespace k = flowforge::kernels;

namespace {

const Grid3 kGrid{32, 32, 8};
constexpr int kCoils = 4;
constexpr int kBins = 8;

std::vector<cplx> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

k::SenseLayout layout(double fill) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  k::SenseLayout l;
  l.grid = kGrid;
  l.n_coils = kCoils;
  l.cells.resize(kBins);
  for (auto& cells : l.cells)
    for (int ky = 0; ky < kGrid.ny; ++ky)
      for (int kz = 0; kz < kGrid.nz; ++kz)
        if (u(rng) < fill) cells.push_back({ky, kz, u(rng)});
  l.finalize();
  return l;
}

template <auto Fn>
void bm_project_lines(benchmark::State& st) {
  std::vector<Volume> maps;
  for (int c = 0; c < kCoils; ++c) {
    Volume v(kGrid);
    const auto r = random_vec(kGrid.size(), 10 + c);
    std::copy(r.begin(), r.end(), v.data.begin());
    maps.push_back(std::move(v));
  }
  const auto obj = random_vec(kGrid.size(), 20);
  const k::RenderFn render = [&](std::size_t, Volume& im) { std::copy(obj.begin(), obj.end(), im.data.begin()); };
  std::vector<k::LineRequest> lines;
  for (int i = 0; i < 256; ++i) lines.push_back({i % kGrid.ny, (i / kGrid.ny) % kGrid.nz});
  std::vector<cplxf> out(lines.size() * kCoils * kGrid.nx);
  for (auto _ : st) {
    Fn(render, maps, lines, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(lines.size()));
}

template <auto Fn>
void bm_sense_forward(benchmark::State& st) {
  const auto l = layout(0.15);
  const auto maps = random_vec(kCoils * kGrid.size(), 1);
  const auto x = random_vec(l.image_size(), 2);
  std::vector<cplx> y(l.measurement_size());
  for (auto _ : st) {
    Fn(l, maps, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Fn>
void bm_sense_adjoint(benchmark::State& st) {
  const auto l = layout(0.15);
  const auto maps = random_vec(kCoils * kGrid.size(), 1);
  const auto y = random_vec(l.measurement_size(), 2);
  std::vector<cplx> x(l.image_size());
  for (auto _ : st) {
    Fn(l, maps, y, x);
    benchmark::DoNotOptimize(x.data());
  }
}

k::HaarPlan haar_plan() {
  k::HaarPlan p;
  p.dims = {kBins, kGrid.nx, kGrid.ny, kGrid.nz};
  p.axes = {true, true, true, true};
  return p;
}

template <auto Fn>
void bm_haar_forward(benchmark::State& st) {
  const auto p = haar_plan();
  const auto x = random_vec(p.band_size(), 4);
  std::vector<cplx> bands(p.band_size() * p.n_bands());
  for (auto _ : st) {
    Fn(p, x, bands);
    benchmark::DoNotOptimize(bands.data());
  }
}

template <auto Fn>
void bm_haar_adjoint(benchmark::State& st) {
  const auto p = haar_plan();
  const auto bands = random_vec(p.band_size() * p.n_bands(), 5);
  std::vector<cplx> x(p.band_size());
  for (auto _ : st) {
    Fn(p, bands, x);
    benchmark::DoNotOptimize(x.data());
  }
}

template <auto Fn>
void bm_soft_threshold(benchmark::State& st) {
  const auto src = random_vec(haar_plan().band_size() * 16, 6);
  auto v = src;
  for (auto _ : st) {
    st.PauseTiming();
    v = src;
    st.ResumeTiming();
    Fn(v, 0.8);
    benchmark::DoNotOptimize(v.data());
  }
}

template <auto Fn>
void bm_median3(benchmark::State& st) {
  const Grid3 g{64, 64, 32};
  std::vector<double> in(g.size()), out(g.size());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (auto& x : in) x = n(rng);
  for (auto _ : st) {
    Fn(g, in, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void bm_fir_rows(benchmark::State& st) {
  // Casorati size of a 5 min scan at TR 4 ms: 4 coils x 32 readout points, 8334 SG lines.
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(4 * 32, 8334);
  std::vector<double> h(121, 1.0 / 121);
  Eigen::MatrixXd out;
  for (auto _ : st) {
    Fn(m, h, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(bm_project_lines<k::serial::project_lines>)->Name("project_lines/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_project_lines<k::omp::project_lines>)->Name("project_lines/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_sense_forward<k::serial::sense_forward>)->Name("sense_forward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sense_forward<k::omp::sense_forward>)->Name("sense_forward/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_sense_adjoint<k::serial::sense_adjoint>)->Name("sense_adjoint/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sense_adjoint<k::omp::sense_adjoint>)->Name("sense_adjoint/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_haar_forward<k::serial::haar_forward>)->Name("haar_forward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_haar_forward<k::omp::haar_forward>)->Name("haar_forward/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_haar_adjoint<k::serial::haar_adjoint>)->Name("haar_adjoint/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_haar_adjoint<k::omp::haar_adjoint>)->Name("haar_adjoint/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_soft_threshold<k::serial::soft_threshold>)->Name("soft_threshold/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_soft_threshold<k::omp::soft_threshold>)->Name("soft_threshold/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_median3<k::serial::median3>)->Name("median3/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_median3<k::omp::median3>)->Name("median3/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_fir_rows<k::serial::fir_rows>)->Name("fir_rows/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_fir_rows<k::omp::fir_rows>)->Name("fir_rows/omp")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
