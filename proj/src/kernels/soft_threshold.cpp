#include <cmath>
#include <vector>

#include "flowforge/kernels.hpp"

namespace flowforge::kernels {
namespace {

constexpr std::size_t kBlock = 4096;

inline cplx shrink(cplx z, double t) {
  const double m = std::abs(z);
  return m > t ? z * ((m - t) / m) : cplx{};
}

template <typename F>
double blocked_sum(std::span<const cplx> v, F f) {
  const std::size_t nb = (v.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(nb, 0.0);
  const auto lnb = static_cast<std::ptrdiff_t>(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < lnb; ++b) {
    const std::size_t end = std::min(v.size(), (b + 1) * kBlock);
    double s = 0.0;
    for (std::size_t i = b * kBlock; i < end; ++i) s += f(v[i]);
    partial[b] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

double sum_squares(std::span<const cplx> v) {
  return blocked_sum(v, [](cplx z) { return std::norm(z); });
}

double sum_abs(std::span<const cplx> v) {
  return blocked_sum(v, [](cplx z) { return std::abs(z); });
}

namespace serial {

void soft_threshold(std::span<cplx> coeffs, double threshold) {
  for (auto& z : coeffs) z = shrink(z, threshold);
}

}  // namespace serial

namespace omp {

void soft_threshold(std::span<cplx> coeffs, double threshold) {
  const auto n = static_cast<std::ptrdiff_t>(coeffs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) coeffs[i] = shrink(coeffs[i], threshold);
}

}  // namespace omp
}  // namespace flowforge::kernels
