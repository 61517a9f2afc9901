#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "flowforge/errors.hpp"
#include "flowforge/stats.hpp"
#include "oracles.hpp"

using namespace flowforge;
using namespace flowforge::stats;

namespace {

PairedMeasurements pairs(std::vector<double> a, std::vector<double> b) {
  PairedMeasurements pm;
  pm.a = std::move(a);
  pm.b = std::move(b);
  for (std::size_t i = 0; i < pm.a.size(); ++i) pm.labels.push_back("p" + std::to_string(i));
  return pm;
}

}  // namespace

TEST_CASE("bland_altman: identical sets") {
  const auto r = bland_altman(pairs({1, 2, 3}, {1, 2, 3}));
  CHECK(r.bias_percent == 0.0);
  CHECK(r.loa_percent == 0.0);
}

TEST_CASE("bland_altman: uniform 10% scale") {
  const auto r = bland_altman(pairs({1.1, 2.2, 3.3, 4.4}, {1, 2, 3, 4}));
  CHECK(r.bias_percent == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(r.loa_percent == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("bland_altman: percent errors {-5, 0, 5} give LOA 9.80 with the n-1 convention") {
  const auto r = bland_altman(pairs({95, 100, 105}, {100, 100, 100}));
  CHECK(std::abs(r.bias_percent) < 1e-9);
  CHECK(r.loa_percent == doctest::Approx(1.96 * 5.0).epsilon(1e-9));
  REQUIRE(r.percent_errors.size() == 3);
  CHECK(r.percent_errors[0] == doctest::Approx(-5.0));
}

TEST_CASE("bland_altman: zero reference names the pair") {
  auto pm = pairs({1, 2}, {1, 0});
  pm.labels = {"aorta", "pulmonary"};
  try {
    bland_altman(pm);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("pulmonary") != std::string::npos);
  }
}

TEST_CASE("bland_altman sign antisymmetry on near-equal sets") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(50.0, 150.0), eps(-5e-4, 5e-4);
  std::vector<double> a, b;
  for (int i = 0; i < 20; ++i) {
    b.push_back(u(rng));
    a.push_back(b.back() * (1.0 + eps(rng)));
  }
  const double fwd = bland_altman(pairs(a, b)).bias_percent;
  const double rev = bland_altman(pairs(b, a)).bias_percent;
  CHECK(std::abs(fwd + rev) < 1e-3 * std::max(1e-6, std::abs(fwd)) + 1e-6);
}

TEST_CASE("paired_ttest: a = b gives p = 1") {
  const auto r = paired_ttest(pairs({1, 2, 3, 4}, {1, 2, 3, 4}));
  CHECK(r.p_two_sided == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.degenerate);
}

TEST_CASE("paired_ttest: constant nonzero difference is flagged with p = 0") {
  const auto r = paired_ttest(pairs({2, 3, 4, 5}, {1, 2, 3, 4}));
  CHECK(r.degenerate);
  CHECK(r.p_two_sided == 0.0);
}

TEST_CASE("paired_ttest: p shrinks as the noise on a constant difference shrinks") {
  double prev = 1.0;
  for (double e : {1e-1, 1e-2, 1e-3}) {
    const auto r = paired_ttest(pairs({1 + e, 1 - e, 1 + 0.5 * e, 1}, {0, 0, 0, 0}));
    CHECK(r.p_two_sided < prev);
    prev = r.p_two_sided;
  }
}

TEST_CASE("paired_ttest: n = 32, mean difference 0.5 sd") {
  // Differences alternate +-s around 0.5 so the sample sd is exactly 1.
  const int n = 32;
  const double s = std::sqrt((n - 1.0) / n);
  std::vector<double> a(n), b(n, 0.0);
  for (int i = 0; i < n; ++i) a[i] = 0.5 + (i % 2 ? s : -s);
  const auto r = paired_ttest(pairs(a, b));
  CHECK(r.dof == 31);
  CHECK(r.t == doctest::Approx(0.5 * std::sqrt(32.0)).epsilon(1e-9));
  const double p_oracle = 2.0 * oracle::t_cdf(-r.t, 31.0);
  CHECK(r.p_two_sided == doctest::Approx(p_oracle).epsilon(1e-6));
  CHECK(r.p_two_sided == doctest::Approx(0.0081).epsilon(0.02));
}

TEST_CASE("student_t_cdf agrees with quadrature over a range of t and dof") {
  for (double dof : {1.0, 3.0, 10.0, 31.0}) {
    for (double t : {-4.0, -1.0, 0.0, 0.7, 2.5}) {
      CHECK(student_t_cdf(t, dof) == doctest::Approx(oracle::t_cdf(t, dof)).epsilon(1e-8));
    }
  }
}

TEST_CASE("pearson closed-form cases") {
  CHECK(pearson(pairs({1, 2, 3}, {2, 1, 3})) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pearson(pairs({5, 7, 9, 13}, {1, 2, 3, 5})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(pairs({-1, -2, -3}, {1, 2, 3})) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(pearson(pairs({1, 1, 1}, {1, 2, 3})), NumericalError);
  CHECK_THROWS_AS(pearson(pairs({1, 2}, {1, 2})), ConfigError);
}

TEST_CASE("pearson is invariant under positive affine maps") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<double> a(40), b(40);
  for (int i = 0; i < 40; ++i) {
    a[i] = g(rng);
    b[i] = 0.7 * a[i] + g(rng);
  }
  const double r0 = pearson(pairs(a, b));
  CHECK(r0 == doctest::Approx(oracle::correlation(a, b)).epsilon(1e-12));
  auto a2 = a;
  for (auto& v : a2) v = 3.5 * v - 12.0;
  CHECK(std::abs(pearson(pairs(a2, b)) - r0) < 1e-12);
}

TEST_CASE("mean and sample sd") {
  const std::vector<double> x{-5, 0, 5};
  CHECK(mean(x) == 0.0);
  CHECK(sample_sd(x) == doctest::Approx(5.0));
}

TEST_CASE("read_pairs_csv with header and malformed rows") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto ok = (dir / "ff_pairs_ok.csv").string();
  {
    std::ofstream f(ok);
    f << "label,measured,reference\na,1.5,1.4\nb,2,2.1\n";
  }
  const auto pm = read_pairs_csv(ok);
  REQUIRE(pm.a.size() == 2);
  CHECK(pm.labels[1] == "b");
  CHECK(pm.b[0] == doctest::Approx(1.4));
  const auto bad = (dir / "ff_pairs_bad.csv").string();
  {
    std::ofstream f(bad);
    f << "a,1\n";
  }
  CHECK_THROWS_AS(read_pairs_csv(bad), DataError);
  std::filesystem::remove(ok);
  std::filesystem::remove(bad);
}
