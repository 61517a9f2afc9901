#pragma once

#include <span>
#include <string>
#include <vector>

namespace flowforge::stats {

struct PairedMeasurements {
  std::vector<std::string> labels;
  std::vector<double> a;
  std::vector<double> b;  // reference
  std::string units;

  void validate(std::size_t min_n) const;
};

struct BlandAltman {
  double bias_percent = 0.0;
  double loa_percent = 0.0;  // half-width: 1.96 * sample SD
  std::vector<double> percent_errors;
};

BlandAltman bland_altman(const PairedMeasurements& pm);

struct TTest {
  double t = 0.0;
  double p_two_sided = 1.0;
  int dof = 0;
  bool degenerate = false;  // zero variance of the differences
};

TTest paired_ttest(const PairedMeasurements& pm);

/// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

double pearson(const PairedMeasurements& pm);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);

/// Reads label,a,b rows (header line optional).
PairedMeasurements read_pairs_csv(const std::string& path);

std::string bland_altman_svg(const PairedMeasurements& pm, const BlandAltman& ba);
std::string correlation_svg(const PairedMeasurements& pm, double r);

}  // namespace flowforge::stats
