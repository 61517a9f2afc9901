#include "doctest.h"

#include "flowforge/fft.hpp"
#include "oracles.hpp"

using namespace flowforge;

TEST_CASE("fft1c matches the direct centered DFT for even and odd lengths") {
  for (int n : {1, 2, 5, 8, 13, 32}) {
    auto x = oracle::random_complex(n, 11 + n);
    const auto ref = oracle::dft1c(x);
    auto y = x;
    fft::fft1c(y, fft::Direction::forward);
    CHECK(oracle::rel_error(y, ref) < 1e-12);
    fft::fft1c(y, fft::Direction::inverse);
    CHECK(oracle::rel_error(y, x) < 1e-12);
  }
}

TEST_CASE("fft3c matches the separable direct DFT") {
  const Grid3 g{6, 4, 5};
  auto x = oracle::random_complex(g.size(), 3);
  const auto ref = oracle::dft3c(x, g);
  auto y = x;
  fft::fft3c(y, g, fft::Direction::forward);
  CHECK(oracle::rel_error(y, ref) < 1e-12);
  const auto back = oracle::dft3c(ref, g, true);
  CHECK(oracle::rel_error(back, x) < 1e-12);
}

TEST_CASE("centered transform of a delta at the grid centre is flat") {
  const Grid3 g{4, 6, 8};
  std::vector<cplx> v(g.size());
  v[g.index(2, 3, 4)] = 1.0;
  fft::fft3c(v, g, fft::Direction::forward);
  const double expected = 1.0 / std::sqrt(static_cast<double>(g.size()));
  for (const auto& z : v) CHECK(std::abs(z - cplx(expected, 0.0)) < 1e-12);
}

TEST_CASE("fft2c_yz equals a 3D transform followed by an inverse along x") {
  const Grid3 g{3, 4, 6};
  auto x = oracle::random_complex(g.size(), 5);
  auto a = x;
  fft::fft2c_yz(a, g, fft::Direction::forward);
  // Reference: transform each x slab directly.
  std::vector<cplx> ref(g.size());
  for (int ix = 0; ix < g.nx; ++ix) {
    const Grid3 slab{1, g.ny, g.nz};
    std::vector<cplx> s(x.begin() + g.index(ix, 0, 0), x.begin() + g.index(ix, 0, 0) + slab.size());
    const auto t = oracle::dft3c(s, slab);
    std::copy(t.begin(), t.end(), ref.begin() + g.index(ix, 0, 0));
  }
  CHECK(oracle::rel_error(a, ref) < 1e-12);
}

TEST_CASE("Parseval: the unitary transform preserves energy") {
  const Grid3 g{8, 8, 4};
  auto x = oracle::random_complex(g.size(), 9);
  const double e0 = oracle::norm(x);
  fft::fft3c(x, g, fft::Direction::forward);
  CHECK(oracle::norm(x) == doctest::Approx(e0).epsilon(1e-12));
}
