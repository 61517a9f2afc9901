#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flowforge/binning.hpp"
#include "flowforge/operators.hpp"
#include "flowforge/wavelet.hpp"

namespace flowforge::recon {

/// Cell-wise weighted average of all bins and encodings, zero where never
/// sampled. Layout [coil][kx][ky][kz].
std::vector<cplx> time_averaged_kspace(const binning::BinnedKSpace& binned);

/// Fraction of the central quarter of the ky-kz grid sampled at least once.
double central_fill(const binning::BinnedKSpace& binned);

struct SensitivityConfig {
  int window = 5;             // in-plane window edge; the z edge is min(window, 3)
  double apodization = 0.15;  // Gaussian k-space apodisation width, fraction of the grid
  double mask_fraction = 0.05;
};

/// Local-covariance (Walsh-style) estimate from the time-averaged k-space.
/// Maps are unit-norm across coils inside the mask and zero outside; their
/// phase is referenced to the coil with the most energy.
SensitivityMaps estimate_sensitivities(const binning::BinnedKSpace& binned,
                                       const SensitivityConfig& cfg = {});
SensitivityMaps estimate_sensitivities(std::span<const cplx> kspace, const Grid3& grid, int n_coils,
                                       const SensitivityConfig& cfg = {});

struct FistaConfig {
  double lambda = 5e-4;
  int max_iters = 150;
  double tol = 1e-5;
  int power_iters = 30;
  double step_factor = 0.9;  // step = step_factor / L
  double divergence_factor = 10.0;
};

struct IterationLog {
  int iter = 0;
  double objective = 0.0;
  double data_term = 0.0;
  double l1_term = 0.0;
  /// "momentum", "restart" (proximal-gradient fallback) or "hold".
  std::string step;
};

struct SolveResult {
  std::vector<cplx> x;
  std::vector<IterationLog> log;
  double lipschitz = 0.0;
  bool converged = false;
};

/// Penalised detail coefficients: every band except the approximation band.
double l1_detail(const HaarWavelet& psi, std::span<const cplx> x);

/// Monotone FISTA for 1/2 |A x - y|^2 + lambda |Psi_detail x|_1. The proximal
/// step uses x <- Psi^H soft(Psi x), which is exact for an orthogonal Psi and
/// approximate for the undecimated frame; the monotone guard keeps the
/// objective non-increasing either way.
SolveResult fista_l1(const LinearOperator& a, const HaarWavelet& psi, std::span<const cplx> y,
                     const FistaConfig& cfg, std::span<const cplx> x0 = {});

/// Extension point for other per-encoding solvers.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const LinearOperator& a, const kernels::Dims4& dims,
                            std::span<const cplx> y) const = 0;
};

class L1SenseSolver final : public Solver {
 public:
  explicit L1SenseSolver(FistaConfig cfg = {}) : cfg_(cfg) {}
  std::string name() const override { return "l1-sense-mfista"; }
  SolveResult solve(const LinearOperator& a, const kernels::Dims4& dims,
                    std::span<const cplx> y) const override;
  const FistaConfig& config() const { return cfg_; }

 private:
  FistaConfig cfg_;
};

/// Complex images [encoding][bin][x][y][z].
struct ImageSeries {
  Grid3 grid;
  int encodings = 0;
  int n_bins = 0;
  double voxel_size_mm = 1.0;
  double bin_width_s = 0.0;
  double venc = 0.0;
  std::vector<cplx> data;

  std::size_t frame_size() const { return grid.size(); }
  std::span<const cplx> frame(int e, int b) const {
    return {data.data() + (static_cast<std::size_t>(e) * n_bins + b) * grid.size(), grid.size()};
  }
  std::span<cplx> frame(int e, int b) {
    return {data.data() + (static_cast<std::size_t>(e) * n_bins + b) * grid.size(), grid.size()};
  }
};

/// Per-bin sampled cells of one encoding (cells with W > 0).
kernels::SenseLayout layout_for(const binning::BinnedKSpace& binned, int encoding);
/// Weighted measurement vector W * y in the layout's [bin][cell][coil][kx] order.
std::vector<cplx> weighted_data(const binning::BinnedKSpace& binned, int encoding,
                                const kernels::SenseLayout& layout, double scale = 1.0);

/// 98th percentile of the root-sum-of-squares time-averaged image.
double normalization_level(const binning::BinnedKSpace& binned);

struct ReconConfig {
  FistaConfig fista;
  SensitivityConfig sensitivity;
  bool normalize = true;
};

struct ReconResult {
  ImageSeries images;
  SensitivityMaps maps;
  std::vector<SolveResult> per_encoding;
  double data_scale = 1.0;  // images are reported in raw units; the solver saw data * data_scale
  std::vector<std::string> skipped_axes;
  std::string solver;
};

ReconResult reconstruct(const binning::BinnedKSpace& binned, const ReconConfig& cfg,
                        const Solver* solver = nullptr);
ReconResult reconstruct(const binning::BinnedKSpace& binned, const ReconConfig& cfg,
                        const SensitivityMaps& maps, const Solver* solver = nullptr);

}  // namespace flowforge::recon
