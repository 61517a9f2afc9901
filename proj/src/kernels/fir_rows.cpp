#include "flowforge/kernels.hpp"

namespace flowforge::kernels {
namespace {

// Whole-sample symmetric reflection about the first and last samples.
Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Zero-phase filtering of one row: the symmetric kernel is centred on each
// output sample, which removes the (L - 1) / 2 group delay.
void filter_row(const Eigen::MatrixXd& in, Eigen::Index r, std::span<const double> h,
                Eigen::MatrixXd& out) {
  const Eigen::Index n = in.cols();
  const auto half = static_cast<Eigen::Index>(h.size() / 2);
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      acc += h[k] * in(r, reflect(t + half - static_cast<Eigen::Index>(k), n));
    }
    out(r, t) = acc;
  }
}

}  // namespace

namespace serial {

void fir_rows(const Eigen::MatrixXd& input, std::span<const double> kernel, Eigen::MatrixXd& output) {
  output.resize(input.rows(), input.cols());
  for (Eigen::Index r = 0; r < input.rows(); ++r) filter_row(input, r, kernel, output);
}

}  // namespace serial

namespace omp {

void fir_rows(const Eigen::MatrixXd& input, std::span<const double> kernel, Eigen::MatrixXd& output) {
  output.resize(input.rows(), input.cols());
  const Eigen::Index rows = input.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < rows; ++r) filter_row(input, r, kernel, output);
}

}  // namespace omp
}  // namespace flowforge::kernels
