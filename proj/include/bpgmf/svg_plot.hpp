#ifndef BPGMF_SVG_PLOT_HPP_
#define BPGMF_SVG_PLOT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpgmf/optimizers.hpp"

namespace bpgmf {

enum class PlotX { iter, time };
enum class PlotY { objective, gap, test_rmse };

inline constexpr double kGapOffset = 1e-2;

inline PlotX parse_plot_x(const std::string& s) {
  if (s == "iter") return PlotX::iter;
  if (s == "time") return PlotX::time;
  throw std::invalid_argument("unknown x axis '" + s + "' (expected iter or time)");
}

inline PlotY parse_plot_y(const std::string& s) {
  if (s == "objective") return PlotY::objective;
  if (s == "gap") return PlotY::gap;
  if (s == "test_rmse") return PlotY::test_rmse;
  throw std::invalid_argument("unknown y axis '" + s + "' (expected objective, gap or test_rmse)");
}

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Least objective over every record of every trace.
inline double least_objective(const std::vector<std::vector<TraceRecord>>& traces) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& t : traces)
    for (const auto& r : t) v = std::min(v, r.objective);
  return v;
}

/// Series for the chosen axes. gap is objective - least objective + 1e-2.
inline std::vector<PlotSeries> build_series(const std::vector<std::vector<TraceRecord>>& traces,
                                            const std::vector<std::string>& labels, PlotX xs, PlotY ys) {
  if (traces.empty()) throw std::invalid_argument("plot: at least one trace is required");
  if (labels.size() != traces.size()) throw std::invalid_argument("plot: one label per trace is required");
  const double vmin = least_objective(traces);
  std::vector<PlotSeries> out;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    PlotSeries s{labels[t], {}, {}};
    for (const auto& r : traces[t]) {
      if (xs == PlotX::time && !r.elapsed_sec)
        throw std::runtime_error("plot: trace '" + labels[t] + "' has no elapsed_sec column (rerun with --timing)");
      if (ys == PlotY::test_rmse && !r.test_rmse)
        throw std::runtime_error("plot: trace '" + labels[t] + "' has no test_rmse column");
      s.x.push_back(xs == PlotX::iter ? static_cast<double>(r.iter) : *r.elapsed_sec);
      switch (ys) {
        case PlotY::objective: s.y.push_back(r.objective); break;
        case PlotY::gap: s.y.push_back(r.objective - vmin + kGapOffset); break;
        case PlotY::test_rmse: s.y.push_back(*r.test_rmse); break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace detail

/// Self-contained SVG 1.1 line chart with a legend.
inline std::string render_svg(const std::vector<PlotSeries>& series, bool log_y, const std::string& x_title,
                              const std::string& y_title) {
  const double W = 800, H = 500, left = 80, right = 200, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = log_y ? std::log10(std::max(s.y[i], std::numeric_limits<double>::min())) : s.y[i];
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) {
    const double v = log_y ? std::log10(std::max(y, std::numeric_limits<double>::min())) : y;
    return top + (1.0 - (v - y0) / (y1 - y0)) * ph;
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
    << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double sx = px(fx);
    o << "<line x1=\"" << detail::svg_num(sx) << "\" y1=\"" << top + ph << "\" x2=\"" << detail::svg_num(sx)
      << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << detail::svg_num(sx) << "\" y=\"" << top + ph + 20
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << detail::tick_label(fx)
      << "</text>\n";
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double sy = top + (1.0 - i / 4.0) * ph;
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::svg_num(sy) << "\" x2=\"" << left << "\" y2=\""
      << detail::svg_num(sy) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << left - 8 << "\" y=\"" << detail::svg_num(sy + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
      << detail::tick_label(log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
    << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << detail::xml_escape(x_title)
    << "</text>\n"
    << "<text x=\"20\" y=\"" << top + ph / 2 << "\" font-family=\"sans-serif\" font-size=\"14\" "
    << "text-anchor=\"middle\" transform=\"rotate(-90 20 " << top + ph / 2 << ")\">"
    << detail::xml_escape(y_title + (log_y ? " (log scale)" : "")) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 8];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) o << ' ';
      o << detail::svg_num(px(series[s].x[i])) << ',' << detail::svg_num(py(series[s].y[i]));
    }
    o << "\"/>\n";
    const double ly = top + 20 + 20.0 * static_cast<double>(s);
    o << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << left + pw + 45 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::xml_escape(series[s].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace bpgmf

#endif  // BPGMF_SVG_PLOT_HPP_
