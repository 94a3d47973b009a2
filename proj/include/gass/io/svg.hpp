#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gass/diversity.hpp"
#include "gass/error.hpp"
#include "gass/io/canonical_json.hpp"
#include "gass/io/report.hpp"

namespace gass::io {

/// One batch in the projection plane.
struct ProjectionSeries {
  std::string label;
  std::vector<ProjectionCoord> coords;
};

namespace detail {

inline constexpr double kWidth = 520, kHeight = 420;
inline constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

struct Style {
  const char* color;
  bool square;
};

inline constexpr Style kStyles[] = {{"#1f77b4", false}, {"#d62728", true}, {"#2ca02c", false},
                                    {"#9467bd", true}};

inline std::string fmt(double x, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, x);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

inline std::string escape(const std::string& s) {
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

struct Range {
  double lo, hi;
};

// Padded data range; a zero-width range is widened to +-0.05.
inline Range padded(double lo, double hi) {
  if (!(hi - lo > 1e-9)) {
    const double mid = 0.5 * (lo + hi);
    return {mid - 0.05, mid + 0.05};
  }
  const double pad = 0.08 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace detail

/// Standalone SVG scatter of (e_i . e_t, e_i . u_ind) with each batch's
/// spread rectangle. Output depends only on the input numbers.
inline std::string render_projections(const std::vector<ProjectionSeries>& series,
                                      const std::string& title = "batch projections") {
  using namespace detail;
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series)
    for (const auto& c : s.coords) {
      x_lo = std::min(x_lo, c.dep);
      x_hi = std::max(x_hi, c.dep);
      y_lo = std::min(y_lo, c.ind);
      y_hi = std::max(y_hi, c.ind);
    }
  if (x_lo > x_hi) x_lo = x_hi = y_lo = y_hi = 0.0;
  const Range xr = padded(x_lo, x_hi), yr = padded(y_lo, y_hi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth, "%.0f") + "\" height=\"" +
       fmt(kHeight, "%.0f") + "\" viewBox=\"0 0 " + fmt(kWidth, "%.0f") + " " + fmt(kHeight, "%.0f") +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth, "%.0f") + "\" height=\"" + fmt(kHeight, "%.0f") +
       "\" fill=\"white\"/>\n";
  o += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  o += "<rect class=\"frame\" x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) +
       "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0, yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    o += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
         fmt(xv, "%.3f") + "</text>\n";
    o += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(py(yv) + 4) + "\" text-anchor=\"end\">" +
         fmt(yv, "%.3f") + "</text>\n";
  }
  o += "<text class=\"xlabel\" x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 14) +
       "\" text-anchor=\"middle\">prompt-dependent projection</text>\n";
  o += "<text class=\"ylabel\" x=\"16\" y=\"" + fmt(kTop + ph / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + fmt(kTop + ph / 2) +
       ")\">prompt-independent projection</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const Style st = kStyles[si % std::size(kStyles)];
    if (s.coords.empty()) continue;
    double a = 1e300, b = -1e300, c = 1e300, d = -1e300;
    for (const auto& p : s.coords) {
      a = std::min(a, p.dep);
      b = std::max(b, p.dep);
      c = std::min(c, p.ind);
      d = std::max(d, p.ind);
    }
    o += "<rect class=\"spread\" x=\"" + fmt(px(a)) + "\" y=\"" + fmt(py(d)) + "\" width=\"" +
         fmt(px(b) - px(a)) + "\" height=\"" + fmt(py(c) - py(d)) + "\" fill=\"none\" stroke=\"" +
         st.color + "\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& p : s.coords) {
      if (st.square)
        o += "<rect class=\"mark\" x=\"" + fmt(px(p.dep) - 4) + "\" y=\"" + fmt(py(p.ind) - 4) +
             "\" width=\"8\" height=\"8\" fill=\"" + st.color + "\" fill-opacity=\"0.7\"/>\n";
      else
        o += "<circle class=\"mark\" cx=\"" + fmt(px(p.dep)) + "\" cy=\"" + fmt(py(p.ind)) +
             "\" r=\"4\" fill=\"" + st.color + "\" fill-opacity=\"0.7\"/>\n";
    }
  }

  if (series.size() > 1) {
    o += "<g class=\"legend\">\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
      const Style st = kStyles[si % std::size(kStyles)];
      const double y = kTop + 12 + 16.0 * static_cast<double>(si);
      const double x = kLeft + pw - 120;
      if (st.square)
        o += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y - 4) + "\" width=\"8\" height=\"8\" fill=\"" +
             st.color + "\"/>\n";
      else
        o += "<circle cx=\"" + fmt(x + 4) + "\" cy=\"" + fmt(y) + "\" r=\"4\" fill=\"" + st.color + "\"/>\n";
      o += "<text x=\"" + fmt(x + 14) + "\" y=\"" + fmt(y + 4) + "\">" + escape(series[si].label) +
           "</text>\n";
    }
    o += "</g>\n";
  }
  o += "</svg>\n";
  return o;
}

inline std::vector<ProjectionSeries> projection_series(const MetricsReport& report) {
  std::vector<ProjectionSeries> out;
  for (const auto& r : report.runs)
    if (!r.proj_coords.empty()) out.push_back({r.label, r.proj_coords});
  return out;
}

inline void plot_projections(const MetricsReport& report, const std::string& path) {
  const auto series = projection_series(report);
  if (series.empty()) throw Error(ErrorKind::InvalidArgument, "report has no projection coordinates");
  write_text_file(path, render_projections(series));
}

inline void plot_projections(const SpreadReport& spread, const std::string& path,
                             const std::string& label = "batch") {
  if (spread.proj_coords.empty()) throw Error(ErrorKind::InvalidArgument, "no projection coordinates");
  write_text_file(path, render_projections({{label, spread.proj_coords}}));
}

}  // namespace gass::io
