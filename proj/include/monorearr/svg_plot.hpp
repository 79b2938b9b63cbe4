#pragma once

// Minimal standalone SVG line plots (no display or plotting dependency).

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "monorearr/energy.hpp"
#include "monorearr/func_core.hpp"
#include "monorearr/rearrange.hpp"

namespace monorearr::plot {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

inline void write_svg(std::ostream& os, const std::vector<Series>& series, const std::string& title) {
  constexpr double W = 720.0, H = 420.0, L = 60.0, R = 150.0, T = 40.0, B = 40.0;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - 15 << "\" font-size=\"11\">" << xmin << "</text>\n";
  os << "<text x=\"" << W - R - 30 << "\" y=\"" << H - 15 << "\" font-size=\"11\">" << xmax << "</text>\n";
  os << "<text x=\"4\" y=\"" << py(ymax - pad) << "\" font-size=\"11\">" << ymax - pad << "</text>\n";
  os << "<text x=\"4\" y=\"" << py(ymin + pad) << "\" font-size=\"11\">" << ymin + pad << "</text>\n";
  double legend_y = T + 10.0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.points) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << legend_y << "\" font-size=\"12\" fill=\"" << s.color << "\">"
       << s.name << "</text>\n";
    legend_y += 18.0;
  }
  os << "</svg>\n";
}

inline Series function_series(const PiecewiseAffine& u, std::string name, std::string color) {
  Series s{std::move(name), std::move(color), {}};
  for (std::size_t i = 0; i < u.breakpoints().size(); ++i) s.points.emplace_back(u.breakpoints()[i], u.values()[i]);
  return s;
}

/// n T' as a step function over the report bands (0 on flat bands).
inline Series product_series(const InequalityReport& r, std::string name, std::string color) {
  Series s{std::move(name), std::move(color), {}};
  for (const auto& b : r.bands) {
    const double y = b.count.is_infinite() ? 0.0 : static_cast<double>(b.count.value()) * b.t_slope;
    s.points.emplace_back(b.span.a, y);
    s.points.emplace_back(b.span.b, y);
  }
  return s;
}

}  // namespace monorearr::plot
