#include "doctest.h"

#include <random>

#include "flowforge/errors.hpp"
#include "flowforge/operators.hpp"
#include "flowforge/wavelet.hpp"
#include "oracles.hpp"

using namespace flowforge;
using namespace flowforge::recon;

namespace {

SensitivityMaps random_maps(const Grid3& g, int nc, std::uint64_t seed) {
  SensitivityMaps m;
  m.grid = g;
  m.n_coils = nc;
  m.data = oracle::random_complex(nc * g.size(), seed);
  return m;
}

SensitivityMaps unit_map(const Grid3& g) {
  SensitivityMaps m;
  m.grid = g;
  m.n_coils = 1;
  m.data.assign(g.size(), cplx(1.0, 0.0));
  return m;
}

kernels::SenseLayout random_layout(const Grid3& g, int nc, int bins, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  kernels::SenseLayout l;
  l.grid = g;
  l.n_coils = nc;
  l.cells.resize(bins);
  for (int b = 0; b < bins; ++b)
    for (int ky = 0; ky < g.ny; ++ky)
      for (int kz = 0; kz < g.nz; ++kz)
        if (u(rng) < 0.4) l.cells[b].push_back({ky, kz, u(rng)});
  return l;
}

}  // namespace

TEST_CASE("SENSE operator passes the adjoint test on 10 random problems") {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const Grid3 g{6 + static_cast<int>(trial % 3), 8, 4 + 2 * static_cast<int>(trial % 2)};
    const auto maps = random_maps(g, 3, 100 + trial);
    for (bool parallel : {false, true}) {
      const SenseOperator op(maps, random_layout(g, 3, 3, trial), parallel);
      CHECK(adjoint_test(op, 1000 + trial) < 1e-6);
    }
  }
}

TEST_CASE("adjoint test helper agrees with a direct inner-product oracle") {
  const Grid3 g{4, 4, 4};
  const auto maps = random_maps(g, 2, 3);
  const SenseOperator op(maps, random_layout(g, 2, 2, 4));
  const auto x = oracle::random_complex(op.domain_size(), 5);
  const auto y = oracle::random_complex(op.range_size(), 6);
  std::vector<cplx> ax(op.range_size()), ahy(op.domain_size());
  op.forward(x, ax);
  op.adjoint(y, ahy);
  cplx lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) lhs += std::conj(y[i]) * ax[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += std::conj(ahy[i]) * x[i];
  CHECK(std::abs(lhs - rhs) / (oracle::norm(ax) * oracle::norm(y)) < 1e-12);
}

TEST_CASE("full sampling with one uniform coil: A^H A = I") {
  const Grid3 g{6, 8, 4};
  const auto maps = unit_map(g);
  const std::vector<double> w(g.ny * g.nz, 1.0);
  const auto op = encode_operator(maps, w);
  CHECK(op.range_size() == g.size());
  const auto x = oracle::random_complex(g.size(), 7);
  std::vector<cplx> y(op.range_size()), back(g.size());
  op.forward(x, y);
  op.adjoint(y, back);
  CHECK(oracle::rel_error(back, x) < 1e-6);
  CHECK(oracle::norm(y) == doctest::Approx(oracle::norm(x)).epsilon(1e-12));
}

TEST_CASE("zero weights annihilate the forward model") {
  const Grid3 g{4, 4, 4};
  const auto maps = random_maps(g, 2, 9);
  CHECK(encode_operator(maps, std::vector<double>(16, 0.0)).range_size() == 0);
  auto layout = random_layout(g, 2, 1, 10);
  for (auto& c : layout.cells[0]) c.weight = 0.0;
  const SenseOperator op(maps, layout);
  const auto x = oracle::random_complex(op.domain_size(), 11);
  std::vector<cplx> y(op.range_size(), cplx(1, 1));
  op.forward(x, y);
  for (const auto& v : y) CHECK(v == cplx{});
}

TEST_CASE("encode_operator shape and weight checks") {
  const Grid3 g{4, 4, 4};
  const auto maps = random_maps(g, 1, 1);
  CHECK_THROWS_AS(encode_operator(maps, std::vector<double>(15, 1.0)), ConfigError);
  CHECK_THROWS_AS(encode_operator(maps, std::vector<double>(16, 1.5)), ConfigError);
}

TEST_CASE("Haar frame passes the adjoint test and reconstructs perfectly") {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const kernels::Dims4 d{2 + static_cast<int>(trial % 4), 4, 5, 3 + static_cast<int>(trial % 2)};
    for (bool parallel : {false, true}) {
      const HaarWavelet w(d, parallel);
      CHECK(adjoint_test(w, trial) < 1e-6);
      const auto x = oracle::random_complex(w.domain_size(), 50 + trial);
      std::vector<cplx> bands(w.range_size()), back(w.domain_size());
      w.forward(x, bands);
      w.adjoint(bands, back);
      CHECK(oracle::rel_error(back, x) < 1e-10);
      // Tight frame: energy preserved.
      CHECK(oracle::norm(bands) == doctest::Approx(oracle::norm(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Haar detail bands of a constant are zero") {
  const HaarWavelet w({4, 4, 4, 2});
  std::vector<cplx> x(w.domain_size(), cplx(2.5, -1.0)), bands(w.range_size());
  w.forward(x, bands);
  for (std::size_t i = w.domain_size(); i < bands.size(); ++i) CHECK(std::abs(bands[i]) < 1e-14);
  CHECK(w.n_bands() == 16);
}

TEST_CASE("temporal step: the temporal detail band peaks at the step") {
  const kernels::Dims4 d{20, 3, 3, 2};
  const HaarWavelet w(d);
  const std::size_t frame = 3 * 3 * 2;
  std::vector<cplx> x(w.domain_size());
  for (int b = 0; b < 20; ++b) {
    const double v = b <= 10 ? 0.0 : 1.0 - 0.5 * (b - 11) / 8.0;
    for (std::size_t i = 0; i < frame; ++i) x[b * frame + i] = v;
  }
  std::vector<cplx> bands(w.range_size());
  w.forward(x, bands);
  const int band = w.detail_band(0);
  REQUIRE(band > 0);
  // Direct evaluation: detail[b] = (x[b] - x[b+1]) / 2, periodic.
  std::vector<double> energy(20, 0.0);
  for (int b = 0; b < 20; ++b)
    for (std::size_t i = 0; i < frame; ++i)
      energy[b] += std::norm(bands[band * w.domain_size() + b * frame + i]);
  const auto argmax = std::max_element(energy.begin(), energy.end()) - energy.begin();
  CHECK(argmax == 10);
  CHECK(bands[band * w.domain_size() + 10 * frame].real() == doctest::Approx(-0.5));
}

TEST_CASE("axes shorter than 2 are skipped and reported") {
  const HaarWavelet w({1, 4, 4, 1});
  CHECK(w.skipped_axes() == std::vector<std::string>{"t", "z"});
  CHECK(w.n_bands() == 4);
  CHECK(w.detail_band(0) == -1);
  CHECK(w.detail_band(2) == 2);
}

TEST_CASE("power iteration estimates the top eigenvalue of A^H A") {
  const Grid3 g{4, 6, 4};
  auto maps = unit_map(g);
  for (auto& v : maps.data) v *= 1.7;
  const auto op = encode_operator(maps, std::vector<double>(24, 1.0));
  CHECK(power_iteration(op, 30) == doctest::Approx(1.7 * 1.7).epsilon(1e-9));
}
