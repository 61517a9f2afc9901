#include "flowforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "flowforge/errors.hpp"

namespace flowforge::svg {
namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void header(std::ostringstream& os, const Axes& axes) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << axes.width << "\" height=\""
     << axes.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << axes.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(axes.title) << "</text>\n"
     << "<text x=\"" << axes.width / 2 << "\" y=\"" << axes.height - 10
     << "\" text-anchor=\"middle\">" << escape(axes.x_label) << "</text>\n"
     << "<text x=\"16\" y=\"" << axes.height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << axes.height / 2 << ")\">" << escape(axes.y_label) << "</text>\n";
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      if (std::isfinite(v)) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      if (std::isfinite(v)) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = axes.width - kMarginLeft - kMarginRight;
  const double ph = axes.height - kMarginTop - kMarginBottom;
  auto px = [&](double v) { return kMarginLeft + (v - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return kMarginTop + (ymax - v) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os.precision(5);
  header(os, axes);
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << kMarginTop + ph + 16
       << "\" text-anchor=\"middle\" font-size=\"10\">" << xv << "</text>\n";
    os << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">" << yv << "</text>\n";
  }
  int legend_y = kMarginTop + 14;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      for (std::size_t i = 0; i < n; ++i) {
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
           << s.color << "\"/>\n";
      }
    } else if (n > 0) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < n; ++i) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
    }
    if (!s.label.empty()) {
      os << "<text x=\"" << kMarginLeft + pw - 8 << "\" y=\"" << legend_y
         << "\" text-anchor=\"end\" fill=\"" << s.color << "\">" << escape(s.label) << "</text>\n";
      legend_y += 14;
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const Axes& axes, int rows, int cols, std::span<const double> values) {
  const double vmax = values.empty() ? 1.0 : std::max(1e-300, *std::max_element(values.begin(), values.end()));
  const double pw = axes.width - kMarginLeft - kMarginRight;
  const double ph = axes.height - kMarginTop - kMarginBottom;
  const double cw = pw / std::max(cols, 1);
  const double ch = ph / std::max(rows, 1);
  std::ostringstream os;
  os.precision(5);
  header(os, axes);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = values[static_cast<std::size_t>(r) * cols + c] / vmax;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(v, 0.0, 1.0))));
      os << "<rect x=\"" << kMarginLeft + c * cw << "\" y=\"" << kMarginTop + r * ch << "\" width=\""
         << cw << "\" height=\"" << ch << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << content;
}

}  // namespace flowforge::svg
