#pragma once

// Box-percentile plots (Esty & Banfield 2003) of replicated estimates. The
// glyph for a sample is symmetric about a vertical centre line; its half
// width at the height of the q-quantile is proportional to min(q, 1 - q), so
// it is widest at the median and pinches to a point at the extremes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cbem/errors.hpp"
#include "cbem/sim_harness.hpp"

namespace cbem {

struct QuantilePolygon {
  std::string parameter_name;
  std::vector<double> quantile_levels;
  std::vector<double> quantile_values;
  double median = 0.0;

  /// Relative half width min(q, 1 - q) at each level.
  std::vector<double> widths() const {
    std::vector<double> w;
    w.reserve(quantile_levels.size());
    for (double q : quantile_levels)
      w.push_back(std::min(q, 1.0 - q));
    return w;
  }
};

/// Quantiles at `resolution` evenly spaced levels i / (resolution - 1). An
/// even resolution does not hit 0.5 on that lattice, so the median level is
/// inserted as one extra point.
inline QuantilePolygon build_quantile_polygon(std::span<const double> estimates,
                                              std::size_t resolution,
                                              std::string parameter_name = {}) {
  if (estimates.empty())
    throw DomainError("box-percentile polygon of an empty list");
  if (resolution < 3)
    throw DomainError("polygon resolution must be >= 3");
  std::vector<double> sorted(estimates.begin(), estimates.end());
  std::sort(sorted.begin(), sorted.end());

  QuantilePolygon poly;
  poly.parameter_name = std::move(parameter_name);
  for (std::size_t i = 0; i < resolution; ++i)
    poly.quantile_levels.push_back(static_cast<double>(i) /
                                   static_cast<double>(resolution - 1));
  if (resolution % 2 == 0) {
    const auto at = std::lower_bound(poly.quantile_levels.begin(),
                                     poly.quantile_levels.end(), 0.5);
    poly.quantile_levels.insert(at, 0.5);
  }
  for (double q : poly.quantile_levels)
    poly.quantile_values.push_back(sorted_quantile(sorted, q));
  poly.median = sorted_quantile(sorted, 0.5);
  return poly;
}

struct SvgLayout {
  double width = 480.0;
  double height = 360.0;
  double margin = 48.0;
  /// Maximum glyph half width as a fraction of the slot width.
  double glyph_fill = 0.4;
};

/// Outline of one glyph in SVG coordinates: left edge from the 0-level
/// upward, then right edge back down. Values map onto a shared [0,1] axis.
inline std::vector<std::pair<double, double>>
glyph_outline(const QuantilePolygon &poly, double centre_x, double max_half,
              const SvgLayout &layout) {
  const double plot_h = layout.height - 2 * layout.margin;
  auto y_of = [&](double v) {
    return layout.margin + (1.0 - std::clamp(v, 0.0, 1.0)) * plot_h;
  };
  const auto w = poly.widths();
  std::vector<std::pair<double, double>> pts;
  pts.reserve(2 * w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    pts.emplace_back(centre_x - max_half * w[i] / 0.5,
                     y_of(poly.quantile_values[i]));
  for (std::size_t i = w.size(); i-- > 0;)
    pts.emplace_back(centre_x + max_half * w[i] / 0.5,
                     y_of(poly.quantile_values[i]));
  return pts;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string xml_escape(const std::string &s) {
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

} // namespace detail

inline std::string svg_document(std::span<const QuantilePolygon> polygons,
                                const SvgLayout &layout = {}) {
  if (polygons.empty())
    throw DomainError("render_svg needs at least one polygon");
  using detail::fmt;
  const double left = layout.margin;
  const double right = layout.width - layout.margin / 2;
  const double top = layout.margin;
  const double bottom = layout.height - layout.margin;
  const double slot = (right - left) / static_cast<double>(polygons.size());

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(layout.width)
     << "\" height=\"" << fmt(layout.height) << "\" viewBox=\"0 0 "
     << fmt(layout.width) << ' ' << fmt(layout.height) << "\">\n"
     << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // shared value axis
  os << "  <line class=\"axis\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(top)
     << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(bottom)
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    const double y = top + (1.0 - v) * (bottom - top);
    os << "  <line class=\"tick\" x1=\"" << fmt(left - 5) << "\" y1=\""
       << fmt(y) << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(y)
       << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(v).substr(0, 4)
       << "</text>\n";
  }
  os << "  <text x=\"" << fmt(layout.margin / 3) << "\" y=\""
     << fmt((top + bottom) / 2) << "\" font-size=\"12\" text-anchor=\"middle\""
     << " transform=\"rotate(-90 " << fmt(layout.margin / 3) << ' '
     << fmt((top + bottom) / 2) << ")\">estimate</text>\n";

  for (std::size_t g = 0; g < polygons.size(); ++g) {
    const auto &poly = polygons[g];
    const double cx = left + slot * (static_cast<double>(g) + 0.5);
    const double half = slot * layout.glyph_fill;
    const auto [lo, hi] = std::minmax_element(poly.quantile_values.begin(),
                                              poly.quantile_values.end());
    if (*lo == *hi) {
      const double y = top + (1.0 - std::clamp(*lo, 0.0, 1.0)) * (bottom - top);
      os << "  <line class=\"glyph\" x1=\"" << fmt(cx - half) << "\" y1=\""
         << fmt(y) << "\" x2=\"" << fmt(cx + half) << "\" y2=\"" << fmt(y)
         << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    } else {
      os << "  <polygon class=\"glyph\" points=\"";
      bool first = true;
      for (const auto &[x, y] : glyph_outline(poly, cx, half, layout)) {
        os << (first ? "" : " ") << fmt(x) << ',' << fmt(y);
        first = false;
      }
      os << "\" fill=\"#b0c4de\" stroke=\"black\"/>\n";
      const double my =
          top + (1.0 - std::clamp(poly.median, 0.0, 1.0)) * (bottom - top);
      os << "  <line class=\"median\" x1=\"" << fmt(cx - half) << "\" y1=\""
         << fmt(my) << "\" x2=\"" << fmt(cx + half) << "\" y2=\"" << fmt(my)
         << "\" stroke=\"black\"/>\n";
    }
    os << "  <text x=\"" << fmt(cx) << "\" y=\"" << fmt(bottom + 20)
       << "\" font-size=\"12\" text-anchor=\"middle\">"
       << detail::xml_escape(poly.parameter_name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void render_svg(std::span<const QuantilePolygon> polygons,
                       const std::filesystem::path &output_path,
                       const SvgLayout &layout = {}) {
  const std::string doc = svg_document(polygons, layout);
  std::ofstream out(output_path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot open " + output_path.string() +
                                 " for writing");
  out << doc;
  if (!out)
    throw std::ios_base::failure("failed writing " + output_path.string());
}

/// Two-column CSV: header "level,value", one row per quantile level.
/// Numbers use the shortest round-trip representation.
inline std::string polygon_csv(const QuantilePolygon &poly) {
  auto shortest = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  std::string out = "level,value\n";
  for (std::size_t i = 0; i < poly.quantile_levels.size(); ++i)
    out += shortest(poly.quantile_levels[i]) + ',' +
           shortest(poly.quantile_values[i]) + '\n';
  return out;
}

inline void write_polygon_csv(const QuantilePolygon &poly,
                              const std::filesystem::path &output_path) {
  std::ofstream out(output_path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot open " + output_path.string() +
                                 " for writing");
  out << polygon_csv(poly);
  if (!out)
    throw std::ios_base::failure("failed writing " + output_path.string());
}

} // namespace cbem
