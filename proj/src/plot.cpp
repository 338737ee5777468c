#include "kaidoa/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace kaidoa {

PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "rmse") {
    return PlotKind::rmse;
  }
  if (name == "resolution") {
    return PlotKind::resolution;
  }
  if (name == "rmse_db_with_crb") {
    return PlotKind::rmse_db_with_crb;
  }
  throw std::invalid_argument("unknown plot kind: " + name);
}

namespace {

constexpr int kWidth = 820;
constexpr int kHeight = 560;
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 30;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 70;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string num(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

double plot_value(const ResultRow& row, PlotKind kind) {
  switch (kind) {
    case PlotKind::rmse:
      return row.rmse_deg;
    case PlotKind::resolution:
      return row.prob_resolution;
    case PlotKind::rmse_db_with_crb:
      return row.rmse_db;
  }
  return 0.0;
}

std::string title_for(PlotKind kind) {
  switch (kind) {
    case PlotKind::rmse:
      return "RMSE versus SNR";
    case PlotKind::resolution:
      return "Probability of resolution versus SNR";
    case PlotKind::rmse_db_with_crb:
      return "RMSE and the square root of CRB versus SNR";
  }
  return "";
}

std::string y_label_for(PlotKind kind) {
  switch (kind) {
    case PlotKind::rmse:
      return "RMSE (degrees)";
    case PlotKind::resolution:
      return "Probability of resolution";
    case PlotKind::rmse_db_with_crb:
      return "RMSE (dB)";
  }
  return "";
}

std::string polyline(const Curve& curve, double x_min, double x_max, double y_min, double y_max,
                     const std::string& color, bool dashed, const std::string& css_class) {
  const double x_span = x_max > x_min ? x_max - x_min : 1.0;
  const double y_span = y_max > y_min ? y_max - y_min : 1.0;
  std::string points;
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    if (!std::isfinite(curve.y[i])) {
      continue;
    }
    const double px = kMarginLeft + (curve.x[i] - x_min) / x_span * (kWidth - kMarginLeft - kMarginRight);
    const double py = kHeight - kMarginBottom -
                      (curve.y[i] - y_min) / y_span * (kHeight - kMarginTop - kMarginBottom);
    if (!points.empty()) {
      points += ' ';
    }
    points += num(px) + "," + num(py);
  }
  std::string element = "  <polyline class=\"" + css_class + "\" fill=\"none\" stroke=\"" + color +
                        "\" stroke-width=\"2\"";
  if (dashed) {
    element += " stroke-dasharray=\"8 5\"";
  }
  element += " points=\"" + points + "\"/>\n";
  return element;
}

}  // namespace

std::string plot_string(const ResultTable& table, PlotKind kind) {
  if (table.rows.empty()) {
    throw std::invalid_argument("emit_plot: empty table");
  }

  // Rows grouped into one curve per estimator, in first-seen order.
  std::vector<Curve> curves;
  std::map<std::string, std::size_t> index;
  for (const ResultRow& row : table.rows) {
    const std::string name = to_string(row.estimator);
    auto it = index.find(name);
    if (it == index.end()) {
      it = index.emplace(name, curves.size()).first;
      curves.push_back(Curve{name, {}, {}});
    }
    curves[it->second].x.push_back(row.snr_db);
    curves[it->second].y.push_back(plot_value(row, kind));
  }
  Curve crb;
  if (kind == PlotKind::rmse_db_with_crb) {
    crb.label = "sqrt CRB";
    for (const ResultRow& row : table.rows) {
      if (row.estimator == table.rows.front().estimator) {
        crb.x.push_back(row.snr_db);
        crb.y.push_back(20.0 * std::log10(row.crb_sqrt_deg));
      }
    }
  }

  double x_min = table.rows.front().snr_db;
  double x_max = x_min;
  double y_min = 0.0;
  double y_max = 1.0;
  bool y_seeded = false;
  for (const Curve& curve : curves) {
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
      x_min = std::min(x_min, curve.x[i]);
      x_max = std::max(x_max, curve.x[i]);
      if (std::isfinite(curve.y[i])) {
        if (!y_seeded) {
          y_min = y_max = curve.y[i];
          y_seeded = true;
        } else {
          y_min = std::min(y_min, curve.y[i]);
          y_max = std::max(y_max, curve.y[i]);
        }
      }
    }
  }
  for (double value : crb.y) {
    if (std::isfinite(value)) {
      y_min = std::min(y_min, value);
      y_max = std::max(y_max, value);
    }
  }
  if (kind == PlotKind::resolution) {
    y_min = 0.0;
    y_max = 1.0;
  } else {
    const double pad = 0.05 * (y_max - y_min + 1e-12);
    y_min -= pad;
    y_max += pad;
    if (kind == PlotKind::rmse) {
      y_min = std::min(0.0, y_min);
    }
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(kHeight) + "\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
         std::to_string(kHeight) + "\" fill=\"white\"/>\n";
  svg += "  <text x=\"" + std::to_string(kWidth / 2) +
         "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">" +
         title_for(kind) + "</text>\n";

  // axes
  svg += "  <line x1=\"" + std::to_string(kMarginLeft) + "\" y1=\"" +
         std::to_string(kHeight - kMarginBottom) + "\" x2=\"" +
         std::to_string(kWidth - kMarginRight) + "\" y2=\"" +
         std::to_string(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + std::to_string(kMarginLeft) + "\" y1=\"" + std::to_string(kMarginTop) +
         "\" x2=\"" + std::to_string(kMarginLeft) + "\" y2=\"" +
         std::to_string(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";

  // ticks
  const int tick_count = 6;
  for (int t = 0; t < tick_count; ++t) {
    const double frac = static_cast<double>(t) / (tick_count - 1);
    const double x_value = x_min + frac * (x_max - x_min);
    const double y_value = y_min + frac * (y_max - y_min);
    const double px = kMarginLeft + frac * (kWidth - kMarginLeft - kMarginRight);
    const double py = kHeight - kMarginBottom - frac * (kHeight - kMarginTop - kMarginBottom);
    svg += "  <line x1=\"" + num(px) + "\" y1=\"" + std::to_string(kHeight - kMarginBottom) +
           "\" x2=\"" + num(px) + "\" y2=\"" + std::to_string(kHeight - kMarginBottom + 6) +
           "\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + num(px) + "\" y=\"" + std::to_string(kHeight - kMarginBottom + 22) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + num(x_value) +
           "</text>\n";
    svg += "  <line x1=\"" + std::to_string(kMarginLeft - 6) + "\" y1=\"" + num(py) + "\" x2=\"" +
           std::to_string(kMarginLeft) + "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + std::to_string(kMarginLeft - 10) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + num(y_value) +
           "</text>\n";
  }

  svg += "  <text x=\"" + std::to_string((kMarginLeft + kWidth - kMarginRight) / 2) + "\" y=\"" +
         std::to_string(kHeight - 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">SNR (dB)</text>\n";
  svg += "  <text x=\"22\" y=\"" + std::to_string((kMarginTop + kHeight - kMarginBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 22 " +
         std::to_string((kMarginTop + kHeight - kMarginBottom) / 2) + ")\">" + y_label_for(kind) +
         "</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const std::string color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg += polyline(curves[c], x_min, x_max, y_min, y_max, color, false, "curve");
    svg += "  <text x=\"" + std::to_string(kMarginLeft + 12) + "\" y=\"" +
           std::to_string(kMarginTop + 18 + 18 * static_cast<int>(c)) +
           "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"" + color + "\">" +
           curves[c].label + "</text>\n";
  }
  if (kind == PlotKind::rmse_db_with_crb) {
    svg += polyline(crb, x_min, x_max, y_min, y_max, "#444444", true, "crb");
    svg += "  <text x=\"" + std::to_string(kMarginLeft + 12) + "\" y=\"" +
           std::to_string(kMarginTop + 18 + 18 * static_cast<int>(curves.size())) +
           "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#444444\">" + crb.label +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const ResultTable& table, PlotKind kind, const std::filesystem::path& path) {
  const std::string svg = plot_string(table, kind);
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("emit_plot: cannot open " + path.string());
  }
  stream << svg;
  if (!stream) {
    throw std::runtime_error("emit_plot: write failed for " + path.string());
  }
}

}  // namespace kaidoa
