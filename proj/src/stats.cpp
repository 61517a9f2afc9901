#include "flowforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "flowforge/errors.hpp"
#include "flowforge/svg.hpp"

namespace flowforge::stats {

void PairedMeasurements::validate(std::size_t min_n) const {
  if (a.size() != b.size()) throw ConfigError("paired measurements: a and b differ in length");
  if (a.size() < min_n) {
    throw ConfigError("paired measurements: need at least " + std::to_string(min_n) + " pairs");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw DataError("paired measurements: non-finite value in pair " + std::to_string(i));
    }
  }
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

BlandAltman bland_altman(const PairedMeasurements& pm) {
  pm.validate(2);
  BlandAltman ba;
  for (std::size_t i = 0; i < pm.a.size(); ++i) {
    if (pm.b[i] == 0.0) {
      const std::string name = i < pm.labels.size() ? pm.labels[i] : std::to_string(i);
      throw DataError("bland_altman: reference value is zero for pair '" + name + "'");
    }
    ba.percent_errors.push_back(100.0 * (pm.a[i] - pm.b[i]) / pm.b[i]);
  }
  ba.bias_percent = mean(ba.percent_errors);
  ba.loa_percent = 1.96 * sample_sd(ba.percent_errors);
  return ba;
}

double student_t_cdf(double t, double dof) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t(dof), t);
}

TTest paired_ttest(const PairedMeasurements& pm) {
  pm.validate(3);
  std::vector<double> d(pm.a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = pm.a[i] - pm.b[i];
  TTest r;
  r.dof = static_cast<int>(d.size()) - 1;
  const double m = mean(d);
  const double sd = sample_sd(d);
  if (sd == 0.0) {
    r.degenerate = true;
    if (m == 0.0) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
    } else {
      r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_two_sided = 0.0;
    }
    return r;
  }
  r.t = m / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p_two_sided = 2.0 * student_t_cdf(-std::abs(r.t), r.dof);
  return r;
}

double pearson(const PairedMeasurements& pm) {
  pm.validate(3);
  const double ma = mean(pm.a), mb = mean(pm.b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < pm.a.size(); ++i) {
    sab += (pm.a[i] - ma) * (pm.b[i] - mb);
    saa += (pm.a[i] - ma) * (pm.a[i] - ma);
    sbb += (pm.b[i] - mb) * (pm.b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericalError("pearson: zero variance, correlation undefined");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

PairedMeasurements read_pairs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  PairedMeasurements pm;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string label, a, b;
    if (!std::getline(ls, label, ',') || !std::getline(ls, a, ',') || !std::getline(ls, b)) {
      throw DataError(path + ": malformed row " + std::to_string(row));
    }
    try {
      std::size_t used_a = 0, used_b = 0;
      const double va = std::stod(a, &used_a);
      const double vb = std::stod(b, &used_b);
      pm.labels.push_back(label);
      pm.a.push_back(va);
      pm.b.push_back(vb);
    } catch (const std::logic_error&) {
      if (row == 1) continue;  // header
      throw DataError(path + ": non-numeric value in row " + std::to_string(row));
    }
  }
  return pm;
}

std::string bland_altman_svg(const PairedMeasurements& pm, const BlandAltman& ba) {
  svg::Series pts;
  pts.label = "pairs";
  pts.markers = true;
  for (std::size_t i = 0; i < pm.a.size(); ++i) {
    pts.x.push_back(0.5 * (pm.a[i] + pm.b[i]));
    pts.y.push_back(ba.percent_errors[i]);
  }
  const auto [lo, hi] = std::minmax_element(pts.x.begin(), pts.x.end());
  auto hline = [&](double y, const std::string& label, const std::string& color) {
    svg::Series s;
    s.label = label;
    s.color = color;
    s.x = {*lo, *hi};
    s.y = {y, y};
    return s;
  };
  svg::Axes axes;
  axes.title = "Bland-Altman";
  axes.x_label = "mean of pair";
  axes.y_label = "percent error";
  return svg::line_plot(axes, {pts, hline(ba.bias_percent, "bias", "#d62728"),
                               hline(ba.bias_percent + ba.loa_percent, "+LOA", "#7f7f7f"),
                               hline(ba.bias_percent - ba.loa_percent, "-LOA", "#7f7f7f")});
}

std::string correlation_svg(const PairedMeasurements& pm, double r) {
  svg::Series pts;
  pts.label = "r = " + std::to_string(r).substr(0, 6);
  pts.markers = true;
  pts.x = pm.b;
  pts.y = pm.a;
  const double lo = std::min(*std::min_element(pm.a.begin(), pm.a.end()),
                             *std::min_element(pm.b.begin(), pm.b.end()));
  const double hi = std::max(*std::max_element(pm.a.begin(), pm.a.end()),
                             *std::max_element(pm.b.begin(), pm.b.end()));
  svg::Series identity;
  identity.label = "identity";
  identity.color = "#7f7f7f";
  identity.x = {lo, hi};
  identity.y = {lo, hi};
  svg::Axes axes;
  axes.title = "correlation";
  axes.x_label = "reference";
  axes.y_label = "measured";
  return svg::line_plot(axes, {pts, identity});
}

}  // namespace flowforge::stats
