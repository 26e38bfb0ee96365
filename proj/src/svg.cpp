#include "iae/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace iae::svg {

namespace {

constexpr int kMargin = 40;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

std::string color_ramp(double t) {
  // blue (cold) to red (hot)
  t = std::clamp(t, 0.0, 1.0);
  const int r = int(std::lround(255.0 * t));
  const int b = int(std::lround(255.0 * (1.0 - t)));
  const int g = int(std::lround(80.0 + 60.0 * (1.0 - std::abs(2.0 * t - 1.0))));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b"};

std::string header(const PlotOptions& opt) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
     << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width << " "
     << opt.height << "\">\n";
  os << "<rect width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    os << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"14\">" << opt.title << "</text>\n";
  return os.str();
}

} // namespace

std::string scatter(const std::vector<double>& xy, int n,
                    const std::vector<double>& color_values, const PlotOptions& opt) {
  if (xy.size() != std::size_t(n) * 2)
    throw std::invalid_argument("svg::scatter: xy must be n x 2");
  Range rx, ry, rc;
  for (int i = 0; i < n; ++i) {
    rx.include(xy[std::size_t(i) * 2]);
    ry.include(xy[std::size_t(i) * 2 + 1]);
  }
  rx.pad();
  ry.pad();
  const bool colored = color_values.size() == std::size_t(n);
  if (colored)
    for (double v : color_values) rc.include(v);

  const double w = opt.width - 2 * kMargin, h = opt.height - 2 * kMargin;
  std::ostringstream os;
  os << header(opt);
  for (int i = 0; i < n; ++i) {
    const double px = kMargin + w * (xy[std::size_t(i) * 2] - rx.lo) / (rx.hi - rx.lo);
    const double py = opt.height - kMargin -
                      h * (xy[std::size_t(i) * 2 + 1] - ry.lo) / (ry.hi - ry.lo);
    std::string fill = "#1f77b4";
    if (colored && rc.hi > rc.lo)
      fill = color_ramp((color_values[i] - rc.lo) / (rc.hi - rc.lo));
    os << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\""
       << fmt(opt.point_radius) << "\" fill=\"" << fill << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string line_plot(const std::vector<double>& x, const std::vector<Series>& series,
                      const PlotOptions& opt) {
  Range rx, ry;
  for (double v : x) rx.include(v);
  for (const Series& s : series) {
    if (s.y.size() != x.size())
      throw std::invalid_argument("svg::line_plot: series length mismatch");
    for (double v : s.y) ry.include(opt.log_y ? std::log10(std::max(v, 1e-300)) : v);
  }
  rx.pad();
  ry.pad();

  const double w = opt.width - 2 * kMargin, h = opt.height - 2 * kMargin;
  std::ostringstream os;
  os << header(opt);
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << fmt(w)
     << "\" height=\"" << fmt(h) << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    os << "<polyline fill=\"none\" stroke=\""
       << kSeriesColors[si % std::size(kSeriesColors)] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double yv = opt.log_y ? std::log10(std::max(series[si].y[i], 1e-300))
                                  : series[si].y[i];
      const double px = kMargin + w * (x[i] - rx.lo) / (rx.hi - rx.lo);
      const double py = opt.height - kMargin - h * (yv - ry.lo) / (ry.hi - ry.lo);
      if (i) os << ' ';
      os << fmt(px) << ',' << fmt(py);
    }
    os << "\"/>\n";
    os << "<text x=\"" << opt.width - kMargin + 4 << "\" y=\""
       << kMargin + 16 * int(si) << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
       << kSeriesColors[si % std::size(kSeriesColors)] << "\">" << series[si].name
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& content, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
}

} // namespace iae::svg
