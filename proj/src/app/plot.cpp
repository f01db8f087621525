#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "composolve/app.hpp"
#include "composolve/errors.hpp"

namespace composolve::app {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 450.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 190.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
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

// Solver name of a "<label>_seed<k>" series.
std::string group_of(const std::string& label) {
  const std::size_t pos = label.rfind("_seed");
  return pos == std::string::npos ? label : label.substr(0, pos);
}

}  // namespace

std::optional<XAxis> parse_x_axis(std::string_view s) {
  if (s == "queries") return XAxis::queries;
  if (s == "wall" || s == "wall_ms") return XAxis::wall;
  return std::nullopt;
}

std::optional<YAxis> parse_y_axis(std::string_view s) {
  if (s == "gap") return YAxis::gap;
  if (s == "gradnorm" || s == "composite_grad_sq") return YAxis::gradnorm;
  return std::nullopt;
}

PlotOutput render_svg(const std::vector<PlotSeries>& series, XAxis x_axis, YAxis y_axis) {
  PlotOutput out;
  std::size_t clipped = 0;
  double x_max = 0.0;
  double ly_min = std::numeric_limits<double>::infinity();
  double ly_max = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    const PlotSeries& ps = series[s];
    for (std::size_t k = 0; k < std::min(ps.x.size(), ps.y.size()); ++k) {
      double y = ps.y[k];
      if (std::isnan(y) || !std::isfinite(ps.x[k])) continue;
      if (!(y >= kPlotFloor)) {
        y = kPlotFloor;
        ++clipped;
      }
      if (!std::isfinite(y)) continue;
      const double ly = std::log10(y);
      pts[s].emplace_back(ps.x[k], ly);
      x_max = std::max(x_max, ps.x[k]);
      ly_min = std::min(ly_min, ly);
      ly_max = std::max(ly_max, ly);
    }
  }
  if (clipped > 0) {
    out.warnings.push_back(std::to_string(clipped) + " value(s) below " + fmt("%g", kPlotFloor) +
                           " clipped to the floor");
  }
  if (!std::isfinite(ly_min)) {
    ly_min = -1.0;
    ly_max = 0.0;
  }
  ly_min = std::floor(ly_min);
  ly_max = std::ceil(ly_max);
  if (ly_max <= ly_min) ly_max = ly_min + 1.0;
  if (!(x_max > 0.0)) x_max = 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + pw * x / x_max; };
  auto sy = [&](double ly) { return kTop + ph * (ly_max - ly) / (ly_max - ly_min); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) +
         "\" height=\"" + fmt("%.0f", kHeight) + "\" viewBox=\"0 0 " + fmt("%.0f", kWidth) + " " +
         fmt("%.0f", kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
         fmt("%.2f", pw) + "\" height=\"" + fmt("%.2f", ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  // y ticks at powers of ten
  const int decades = static_cast<int>(ly_max - ly_min);
  const int step = std::max(1, decades / 8);
  for (int e = static_cast<int>(ly_min); e <= static_cast<int>(ly_max); e += step) {
    const double y = sy(e);
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" +
           fmt("%.2f", kLeft + pw) + "\" y2=\"" + fmt("%.2f", y) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", y + 4) +
           "\" text-anchor=\"end\">1e" + std::to_string(e) + "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_max * k / 5.0;
    const double x = sx(xv);
    svg += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + fmt("%.4g", xv) + "</text>\n";
  }
  const std::string x_label = x_axis == XAxis::queries ? "oracle queries" : "wall time (ms)";
  const std::string y_label = y_axis == YAxis::gap ? "objective gap" : "composite gradient norm^2";
  svg += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 20) +
         "\" text-anchor=\"middle\">" + x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt("%.2f", kTop + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + fmt("%.2f", kTop + ph / 2) +
         ")\">" + y_label + "</text>\n";

  std::map<std::string, std::size_t> colors;
  std::vector<std::string> legend_order;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const std::string g = group_of(series[s].label);
    if (colors.emplace(g, colors.size()).second) legend_order.push_back(g);
    const char* color = kPalette[colors[g] % std::size(kPalette)];
    std::string points;
    for (const auto& [x, ly] : pts[s]) {
      if (!points.empty()) points += ' ';
      points += fmt("%.2f", sx(x)) + "," + fmt("%.2f", sy(ly));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.2\" points=\"" + points + "\"><title>" +
           escape(series[s].label) + "</title></polyline>\n";
  }
  for (std::size_t k = 0; k < legend_order.size(); ++k) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(k);
    const double x = kLeft + pw + 14;
    const char* color = kPalette[colors[legend_order[k]] % std::size(kPalette)];
    svg += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" +
           fmt("%.2f", x + 20) + "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", x + 26) + "\" y=\"" + fmt("%.2f", y + 4) + "\">" +
           escape(legend_order[k]) + "</text>\n";
  }
  svg += "</svg>\n";
  out.svg = std::move(svg);
  return out;
}

PlotOutput cmd_plot(const std::vector<std::filesystem::path>& csvs, XAxis x, YAxis y,
                    const std::filesystem::path& svg_path) {
  if (csvs.empty()) throw DomainError("plot: no CSV files given");
  std::vector<PlotSeries> series;
  for (const auto& path : csvs) {
    const std::vector<TraceRecord> rows = parse_trace_csv(read_text_file(path), path.string());
    PlotSeries s;
    s.label = path.stem().string();
    for (const TraceRecord& r : rows) {
      s.x.push_back(x == XAxis::queries ? static_cast<double>(r.queries()) : r.wall_ms);
      s.y.push_back(y == YAxis::gap ? r.gap : r.composite_grad_sq);
    }
    series.push_back(std::move(s));
  }
  PlotOutput out = render_svg(series, x, y);
  write_text_file(svg_path, out.svg);
  return out;
}

}  // namespace composolve::app
