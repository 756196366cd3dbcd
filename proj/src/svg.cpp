// SPDX-License-Identifier: Apache-2.0
#include "flowlab/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "flowlab/io.hpp"

namespace flowlab {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void append_series(std::vector<double>& xs, std::vector<double>& ys, const Vec& x, const Vec& y) {
  require(x.size() == y.size(), "plot series: x and y lengths differ");
  require(x.size() >= 1, "plot series: empty");
  xs.assign(x.data(), x.data() + x.size());
  ys.assign(y.data(), y.data() + y.size());
}

}  // namespace

SvgPlot::SvgPlot(double width, double height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {
  require(width > 0 && height > 0, "plot dimensions must be positive");
}

void SvgPlot::line(const Vec& xs, const Vec& ys, const std::string& color, double stroke) {
  Series s;
  s.is_line = true;
  s.color = color;
  s.size = stroke;
  append_series(s.xs, s.ys, xs, ys);
  series_.push_back(std::move(s));
}

void SvgPlot::scatter(const Vec& xs, const Vec& ys, const std::string& color, double radius) {
  Series s;
  s.is_line = false;
  s.color = color;
  s.size = radius;
  append_series(s.xs, s.ys, xs, ys);
  series_.push_back(std::move(s));
}

std::string SvgPlot::render() const {
  require(!series_.empty(), "plot has no series");
  double xlo = series_[0].xs[0], xhi = xlo, ylo = series_[0].ys[0], yhi = ylo;
  for (const Series& s : series_)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      xlo = std::min(xlo, s.xs[i]);
      xhi = std::max(xhi, s.xs[i]);
      ylo = std::min(ylo, s.ys[i]);
      yhi = std::max(yhi, s.ys[i]);
    }
  const double xpad = (xhi - xlo) > 0 ? 0.05 * (xhi - xlo) : 1.0;
  const double ypad = (yhi - ylo) > 0 ? 0.05 * (yhi - ylo) : 1.0;
  xlo -= xpad;
  xhi += xpad;
  ylo -= ypad;
  yhi += ypad;
  const double margin = 40.0;
  const double pw = width_ - 2 * margin;
  const double ph = height_ - 2 * margin;
  const auto px = [&](double x) { return margin + (x - xlo) / (xhi - xlo) * pw; };
  const auto py = [&](double y) { return margin + (yhi - y) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
     << num(height_) << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n";
  os << "<rect x=\"" << num(margin) << "\" y=\"" << num(margin) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"white\" stroke=\"#888\"/>\n";
  if (!title_.empty())
    os << "<text x=\"" << num(width_ / 2) << "\" y=\"" << num(margin - 12)
       << "\" text-anchor=\"middle\" font-size=\"14\">" << title_ << "</text>\n";
  for (const Series& s : series_) {
    if (s.is_line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << num(s.size)
         << "\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (i) os << ' ';
        os << num(px(s.xs[i])) << ',' << num(py(s.ys[i]));
      }
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        os << "<circle cx=\"" << num(px(s.xs[i])) << "\" cy=\"" << num(py(s.ys[i])) << "\" r=\""
           << num(s.size) << "\" fill=\"" << s.color << "\" fill-opacity=\"0.7\"/>\n";
    }
  }
  // Corner labels give the data range without a full axis system.
  os << "<text x=\"" << num(margin) << "\" y=\"" << num(height_ - margin + 16)
     << "\" font-size=\"11\">" << num(xlo + xpad) << "</text>\n";
  os << "<text x=\"" << num(width_ - margin) << "\" y=\"" << num(height_ - margin + 16)
     << "\" text-anchor=\"end\" font-size=\"11\">" << num(xhi - xpad) << "</text>\n";
  os << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(height_ - margin)
     << "\" text-anchor=\"end\" font-size=\"11\">" << num(ylo + ypad) << "</text>\n";
  os << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(margin + 10)
     << "\" text-anchor=\"end\" font-size=\"11\">" << num(yhi - ypad) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void save_svg(const SvgPlot& plot, const std::string& path) { write_file(path, plot.render()); }

}  // namespace flowlab
