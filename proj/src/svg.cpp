#include "crbmgen/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

namespace crbmgen {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPlotHeight = 480.0;
constexpr double kMargin = 40.0;
constexpr double kLegendHeight = 56.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string rgb(double r, double g, double b) {
  char buf[16];
  auto to8 = [](double x) { return static_cast<int>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", to8(r), to8(g), to8(b));
  return buf;
}

/// 0 -> dark blue, 0.5 -> light blue, 1 -> red.
std::string heat_color(double x) {
  static constexpr std::array<std::array<double, 3>, 3> stops = {{{0.03, 0.11, 0.35}, {0.55, 0.80, 0.95},
                                                                  {0.80, 0.07, 0.10}}};
  x = std::clamp(x, 0.0, 1.0);
  const int seg = x < 0.5 ? 0 : 1;
  const double f = (x - 0.5 * seg) * 2.0;
  const auto& a = stops[static_cast<std::size_t>(seg)];
  const auto& b = stops[static_cast<std::size_t>(seg + 1)];
  return rgb(a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2]));
}

std::string header(double height, const std::string& title) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";
  if (!title.empty()) {
    out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + xml_escape(title) + "</text>\n";
  }
  return out;
}

std::string rect(const char* cls, double x, double y, double w, double h, const std::string& fill) {
  return "<rect class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "start") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(s) + "</text>\n";
}

std::string value_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string render_heatmap(const Matrix& matrix, const std::string& title) {
  if (matrix.size() == 0) throw Error("cannot render an empty matrix");
  const double lo = matrix.minCoeff();
  const double hi = matrix.maxCoeff();
  const double span = hi - lo;
  const double plot_w = kWidth - 2 * kMargin;
  const double cell_w = plot_w / static_cast<double>(matrix.cols());
  const double cell_h = kPlotHeight / static_cast<double>(matrix.rows());
  const double height = kMargin + kPlotHeight + kLegendHeight;

  std::string out = header(height, title);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      const double x = span > 0.0 ? (matrix(i, j) - lo) / span : 0.0;
      out += rect("cell", kMargin + static_cast<double>(j) * cell_w, kMargin + static_cast<double>(i) * cell_h,
                  cell_w, cell_h, heat_color(x));
    }
  }
  // colour scale
  constexpr int kSteps = 10;
  const double legend_y = kMargin + kPlotHeight + 12;
  const double swatch = plot_w / (2 * kSteps);
  for (int s = 0; s < kSteps; ++s) {
    out += rect("legend", kMargin + s * swatch, legend_y, swatch, 12, heat_color(s / double(kSteps - 1)));
  }
  out += text(kMargin, legend_y + 26, value_label(lo));
  out += text(kMargin + kSteps * swatch, legend_y + 26, value_label(hi), "end");
  out += "</svg>\n";
  return out;
}

std::string render_bars(const Vector& values, const std::string& title) {
  if (values.size() == 0) throw Error("cannot render an empty vector");
  const double lo = std::min(0.0, values.minCoeff());
  const double hi = std::max(0.0, values.maxCoeff());
  const double span = hi > lo ? hi - lo : 1.0;
  const double plot_w = kWidth - 2 * kMargin;
  const double bar_w = plot_w / static_cast<double>(values.size());
  const double height = kMargin + kPlotHeight + kLegendHeight;
  auto y_of = [&](double v) { return kMargin + (hi - v) / span * kPlotHeight; };

  std::string out = header(height, title);
  const double zero = y_of(0.0);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double y = y_of(values(i));
    out += rect("cell", kMargin + static_cast<double>(i) * bar_w + 1, std::min(y, zero), std::max(bar_w - 2, 0.5),
                std::abs(zero - y), values(i) >= 0.0 ? "#4363d8" : "#e6194b");
  }
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(zero) + "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" +
         num(zero) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  const double legend_y = kMargin + kPlotHeight + 12;
  out += rect("legend", kMargin, legend_y, 12, 12, "#4363d8");
  out += text(kMargin + 16, legend_y + 10, ">= 0");
  out += rect("legend", kMargin + 70, legend_y, 12, 12, "#e6194b");
  out += text(kMargin + 86, legend_y + 10, "< 0");
  out += text(kWidth - kMargin, legend_y + 10, "range " + value_label(lo) + " .. " + value_label(hi), "end");
  out += "</svg>\n";
  return out;
}

std::string render_keyscape(const Keyscape& scape, const std::string& title) {
  if (scape.levels.empty()) throw Error("cannot render an empty keyscape");
  const double plot_w = kWidth - 2 * kMargin;
  const double row_h = kPlotHeight / static_cast<double>(scape.levels.size());
  const double n_levels = static_cast<double>(scape.levels.size());

  std::set<KeyLabel> present;
  for (const auto& row : scape.levels) present.insert(row.begin(), row.end());
  const double legend_rows = std::ceil(static_cast<double>(present.size()) / 6.0);
  const double height = kMargin + kPlotHeight + 16 + legend_rows * 18 + 8;

  std::string out = header(height, title);
  for (std::size_t level = 0; level < scape.levels.size(); ++level) {
    const auto& row = scape.levels[level];
    // level l spans (l + 1) / L of the width, centred: a stepped triangle
    const double row_w = plot_w * (static_cast<double>(level) + 1.0) / n_levels;
    const double x0 = kMargin + (plot_w - row_w) / 2;
    const double cell_w = row_w / static_cast<double>(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += rect("cell", x0 + static_cast<double>(c) * cell_w, kMargin + static_cast<double>(level) * row_h, cell_w,
                  row_h, key_color(row[c]));
    }
  }
  const double legend_y = kMargin + kPlotHeight + 16;
  int i = 0;
  for (KeyLabel key : present) {
    const double x = kMargin + (i % 6) * (plot_w / 6);
    const double y = legend_y + (i / 6) * 18;
    out += rect("legend", x, y, 12, 12, key_color(key));
    out += text(x + 16, y + 10, key_name(key));
    ++i;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace crbmgen
