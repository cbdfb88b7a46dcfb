#include "plinf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace plinf {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

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

}  // namespace

void write_loglog_svg(std::ostream& out, const std::string& title, const std::string& xlabel,
                      const std::vector<PlotSeries>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  x0 = std::floor(x0);
  y0 = std::floor(y0);
  x1 = std::max(std::ceil(x1), x0 + 1.0);
  y1 = std::max(std::ceil(y1), y0 + 1.0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double lx) { return kLeft + (lx - x0) / (x1 - x0) * pw; };
  auto py = [&](double ly) { return kTop + (y1 - ly) / (y1 - y0) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(kLeft) << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (double e = x0; e <= x1 + 1e-9; e += 1.0) {
    out << "<line x1=\"" << fixed(px(e)) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(px(e)) << "\" y2=\""
        << fixed(kTop + ph) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fixed(px(e)) << "\" y=\"" << fixed(kTop + ph + 16) << "\" text-anchor=\"middle\">1e"
        << static_cast<int>(e) << "</text>\n";
  }
  for (double e = y0; e <= y1 + 1e-9; e += 1.0) {
    out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(py(e)) << "\" x2=\"" << fixed(kLeft + pw) << "\" y2=\""
        << fixed(py(e)) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(e) + 4) << "\" text-anchor=\"end\">1e"
        << static_cast<int>(e) << "</text>\n";
  }
  out << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(pw) << "\" height=\""
      << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 10) << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double cx = px(std::log10(s.x[i]));
      const double cy = py(std::log10(s.y[i]));
      pts += fixed(cx) + "," + fixed(cy) + " ";
      out << "<circle cx=\"" << fixed(cx) << "\" cy=\"" << fixed(cy) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!pts.empty()) {
      out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << fixed(kLeft + pw + 12) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << fixed(kLeft + pw + 32)
        << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fixed(kLeft + pw + 38) << "\" y=\"" << fixed(ly) << "\">" << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace plinf
