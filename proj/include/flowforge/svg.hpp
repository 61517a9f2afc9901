#pragma once

#include <span>
#include <string>
#include <vector>

// Minimal SVG plotting used for the diagnostic figures the CLI emits.
namespace flowforge::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;  // draw points instead of a polyline
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 360;
};

std::string line_plot(const Axes& axes, const std::vector<Series>& series);

/// Row-major `rows x cols` grid of non-negative values, darker = larger.
std::string heatmap(const Axes& axes, int rows, int cols, std::span<const double> values);

void write_file(const std::string& path, const std::string& content);

}  // namespace flowforge::svg
