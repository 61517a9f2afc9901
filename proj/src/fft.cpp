#include "flowforge/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace flowforge::fft {
namespace {

using PlanKey = std::tuple<int, int, int, int>;  // rank dims..., sign

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n0, int n1, int n2, int sign) {
    std::lock_guard lock(mutex_);
    const PlanKey key{n0, n1, n2, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<cplx> scratch(static_cast<std::size_t>(n0) * std::max(n1, 1) * std::max(n2, 1));
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (n1 == 0) {
      plan = fftw_plan_dft_1d(n0, buf, buf, sign, flags);
    } else if (n2 == 0) {
      plan = fftw_plan_dft_2d(n0, n1, buf, buf, sign, flags);
    } else {
      plan = fftw_plan_dft_3d(n0, n1, n2, buf, buf, sign, flags);
    }
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

int sign_of(Direction dir) { return dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

// Circular shift of a row-major array of up to three dims by `shift` per axis.
void circshift(std::span<cplx> data, std::array<int, 3> dims, std::array<int, 3> shift) {
  thread_local std::vector<cplx> tmp;
  tmp.assign(data.begin(), data.end());
  const int n0 = dims[0], n1 = dims[1], n2 = dims[2];
  for (int a = 0; a < n0; ++a) {
    const int sa = (a + shift[0]) % n0;
    for (int b = 0; b < n1; ++b) {
      const int sb = (b + shift[1]) % n1;
      const std::size_t src = (static_cast<std::size_t>(a) * n1 + b) * n2;
      const std::size_t dst = (static_cast<std::size_t>(sa) * n1 + sb) * n2;
      for (int c = 0; c < n2; ++c) {
        data[dst + (c + shift[2]) % n2] = tmp[src + c];
      }
    }
  }
}

void centered(std::span<cplx> data, std::array<int, 3> dims, int rank, Direction dir) {
  // ifftshift moves the centre sample (n/2) to 0; fftshift moves 0 back to n/2.
  std::array<int, 3> pre{}, post{};
  for (int i = 0; i < 3; ++i) {
    pre[i] = dims[i] - dims[i] / 2;
    post[i] = dims[i] / 2;
  }
  circshift(data, dims, pre);
  fftw_plan plan = PlanCache::instance().get(dims[0], rank > 1 ? dims[1] : 0,
                                             rank > 2 ? dims[2] : 0, sign_of(dir));
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
  circshift(data, dims, post);
  const double scale = 1.0 / std::sqrt(static_cast<double>(data.size()));
  for (auto& v : data) v *= scale;
}

}  // namespace

void fft1c(std::span<cplx> data, Direction dir) {
  if (data.empty()) return;
  centered(data, {static_cast<int>(data.size()), 1, 1}, 1, dir);
}

void fft3c(std::span<cplx> data, const Grid3& grid, Direction dir) {
  centered(data, grid.dims(), 3, dir);
}

void fft2c_yz(std::span<cplx> data, const Grid3& grid, Direction dir) {
  const std::size_t slab = static_cast<std::size_t>(grid.ny) * grid.nz;
  for (int x = 0; x < grid.nx; ++x) {
    centered(data.subspan(x * slab, slab), {grid.ny, grid.nz, 1}, 2, dir);
  }
}

}  // namespace flowforge::fft
