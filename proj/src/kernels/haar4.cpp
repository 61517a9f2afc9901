#include <algorithm>
#include <vector>

#include "flowforge/kernels.hpp"

namespace flowforge::kernels {

int HaarPlan::n_active() const {
  return static_cast<int>(std::count(axes.begin(), axes.end(), true));
}

namespace {

std::array<std::size_t, 4> strides_of(const Dims4& d) {
  return {static_cast<std::size_t>(d[1]) * d[2] * d[3], static_cast<std::size_t>(d[2]) * d[3],
          static_cast<std::size_t>(d[3]), 1};
}

std::vector<int> active_axes(const HaarPlan& plan) {
  std::vector<int> out;
  for (int a = 0; a < 4; ++a) {
    if (plan.axes[a]) out.push_back(a);
  }
  return out;
}

// Linear index of p shifted by +1 (sign = 1) or -1 (sign = -1) along `axis`,
// periodic.
std::size_t shifted(std::size_t p, const Dims4& d, const std::array<std::size_t, 4>& st, int axis,
                    int sign) {
  const int n = d[axis];
  const int coord = static_cast<int>((p / st[axis]) % n);
  const int moved = (coord + sign + n) % n;
  return p + (static_cast<std::ptrdiff_t>(moved) - coord) * static_cast<std::ptrdiff_t>(st[axis]);
}

// 1D analysis and synthesis passes along `axis` over samples [begin, end).
void pass_analysis(const cplx* in, cplx* lo, cplx* hi, const Dims4& d,
                   const std::array<std::size_t, 4>& st, int axis, std::size_t begin,
                   std::size_t end) {
  for (std::size_t p = begin; p < end; ++p) {
    const cplx a = in[p];
    const cplx b = in[shifted(p, d, st, axis, 1)];
    lo[p] = 0.5 * (a + b);
    hi[p] = 0.5 * (a - b);
  }
}

void pass_synthesis(const cplx* lo, const cplx* hi, cplx* out, const Dims4& d,
                    const std::array<std::size_t, 4>& st, int axis, std::size_t begin,
                    std::size_t end) {
  for (std::size_t p = begin; p < end; ++p) {
    const std::size_t q = shifted(p, d, st, axis, -1);
    out[p] = 0.5 * (lo[p] + lo[q] + hi[p] - hi[q]);
  }
}

}  // namespace

namespace serial {

// Direct evaluation: band b at p is 2^-k sum over corners delta of
// s(b, delta) u[p + delta], s = -1 for each detail axis where delta = 1.
void haar_forward(const HaarPlan& plan, std::span<const cplx> input, std::span<cplx> bands) {
  const auto axes = active_axes(plan);
  const int k = static_cast<int>(axes.size());
  const auto st = strides_of(plan.dims);
  const std::size_t n = plan.band_size();
  const double scale = 1.0 / static_cast<double>(1 << k);
  for (int b = 0; b < (1 << k); ++b) {
    for (std::size_t p = 0; p < n; ++p) {
      cplx acc = 0.0;
      for (int corner = 0; corner < (1 << k); ++corner) {
        std::size_t q = p;
        double s = 1.0;
        for (int j = 0; j < k; ++j) {
          if (corner & (1 << j)) {
            q = shifted(q, plan.dims, st, axes[j], 1);
            if (b & (1 << j)) s = -s;
          }
        }
        acc += s * input[q];
      }
      bands[b * n + p] = scale * acc;
    }
  }
}

void haar_adjoint(const HaarPlan& plan, std::span<const cplx> bands, std::span<cplx> output) {
  const auto axes = active_axes(plan);
  const int k = static_cast<int>(axes.size());
  const auto st = strides_of(plan.dims);
  const std::size_t n = plan.band_size();
  const double scale = 1.0 / static_cast<double>(1 << k);
  for (std::size_t p = 0; p < n; ++p) {
    cplx acc = 0.0;
    for (int corner = 0; corner < (1 << k); ++corner) {
      std::size_t q = p;
      for (int j = 0; j < k; ++j) {
        if (corner & (1 << j)) q = shifted(q, plan.dims, st, axes[j], -1);
      }
      for (int b = 0; b < (1 << k); ++b) {
        double s = 1.0;
        for (int j = 0; j < k; ++j) {
          if ((corner & (1 << j)) && (b & (1 << j))) s = -s;
        }
        acc += s * bands[b * n + q];
      }
    }
    output[p] = scale * acc;
  }
}

}  // namespace serial

namespace omp {

// Separable passes: after processing active axis j, band bit j selects the
// high-pass output of that axis.
void haar_forward(const HaarPlan& plan, std::span<const cplx> input, std::span<cplx> bands) {
  const auto axes = active_axes(plan);
  const auto st = strides_of(plan.dims);
  const std::size_t n = plan.band_size();
  const auto ln = static_cast<std::ptrdiff_t>(n);
  if (axes.empty()) {
    std::copy(input.begin(), input.end(), bands.begin());
    return;
  }
  std::vector<cplx> cur(input.begin(), input.end());
  std::vector<cplx> next;
  int count = 1;
  for (std::size_t j = 0; j < axes.size(); ++j) {
    next.resize(2 * count * n);
    for (int b = 0; b < count; ++b) {
      const cplx* src = cur.data() + b * n;
      cplx* lo = next.data() + b * n;
      cplx* hi = next.data() + (b + count) * n;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t blk = 0; blk < ln; blk += 4096) {
        const std::size_t end = std::min<std::size_t>(n, blk + 4096);
        pass_analysis(src, lo, hi, plan.dims, st, axes[j], blk, end);
      }
    }
    cur.swap(next);
    count *= 2;
  }
  std::copy(cur.begin(), cur.end(), bands.begin());
}

void haar_adjoint(const HaarPlan& plan, std::span<const cplx> bands, std::span<cplx> output) {
  const auto axes = active_axes(plan);
  const auto st = strides_of(plan.dims);
  const std::size_t n = plan.band_size();
  const auto ln = static_cast<std::ptrdiff_t>(n);
  if (axes.empty()) {
    std::copy(bands.begin(), bands.begin() + n, output.begin());
    return;
  }
  std::vector<cplx> cur(bands.begin(), bands.begin() + (n << axes.size()));
  std::vector<cplx> next;
  int count = 1 << axes.size();
  for (int j = static_cast<int>(axes.size()) - 1; j >= 0; --j) {
    count /= 2;
    next.resize(count * n);
    for (int b = 0; b < count; ++b) {
      const cplx* lo = cur.data() + b * n;
      const cplx* hi = cur.data() + (b + count) * n;
      cplx* dst = next.data() + b * n;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t blk = 0; blk < ln; blk += 4096) {
        const std::size_t end = std::min<std::size_t>(n, blk + 4096);
        pass_synthesis(lo, hi, dst, plan.dims, st, axes[j], blk, end);
      }
    }
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), output.begin());
}

}  // namespace omp
}  // namespace flowforge::kernels
