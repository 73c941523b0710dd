#include "artifacts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace subeq::app {
namespace {

constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::ofstream open(const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(lo < hi)) {
    const double pad = std::abs(lo) > 0 ? 0.05 * std::abs(lo) : 1.0;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

// viridis at five stops, linearly blended
std::string color(double t) {
  static const std::array<std::array<double, 3>, 5> stops = {
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 4;
  const int i = std::min(static_cast<int>(t), 3);
  const double s = t - i;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + s * (stops[i + 1][0] - stops[i][0])),
                static_cast<int>(stops[i][1] + s * (stops[i + 1][1] - stops[i][1])),
                static_cast<int>(stops[i][2] + s * (stops[i + 1][2] - stops[i][2])));
  return buf;
}

void header(std::ofstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" "
     << "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
}

}  // namespace

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("csv header and columns differ");
  std::ofstream os = open(file);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << num(columns[c][r], "%.17g");
    os << "\n";
  }
}

void svg_line_plot(const std::filesystem::path& file, const std::string& title, const std::string& xlabel,
                   const std::string& ylabel, const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::tie(x0, x1) = padded(x0, x1);
  std::tie(y0, y1) = padded(y0, y1);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return kTop + (1 - (y - y0) / (y1 - y0)) * ph; };

  std::ofstream os = open(file);
  header(os, title);
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + t * (x1 - x0) / 4, yv = y0 + t * (y1 - y0) / 4;
    os << "<text x=\"" << num(X(xv)) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">" << num(xv, "%.4g")
       << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">" << num(yv, "%.4g")
       << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << num(Y(yv)) << "\" y2=\"" << num(Y(yv))
       << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << escape(xlabel)
     << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel)
     << "</text>\n";
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* c = palette[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << num(X(s.x[i])) << "," << num(Y(s.y[i])) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + pw - 8 << "\" y=\"" << kTop + 14 + 14 * k << "\" text-anchor=\"end\" fill=\"" << c
       << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
}

void svg_heatmap(const std::filesystem::path& file, const std::string& title, int nx, int ny,
                 const std::vector<double>& values, double x0, double x1, double y0, double y1) {
  if (static_cast<std::size_t>(nx) * ny != values.size()) throw std::invalid_argument("heatmap shape mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  std::tie(lo, hi) = padded(lo, hi);
  const double side = std::min(kW - kLeft - kRight - 60, kH - kTop - kBottom);
  const double cw = side / nx, ch = side / ny;

  std::ofstream os = open(file);
  header(os, title);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double v = values[static_cast<std::size_t>(iy) * nx + ix];
      if (!std::isfinite(v)) continue;
      os << "<rect x=\"" << num(kLeft + ix * cw) << "\" y=\"" << num(kTop + (ny - 1 - iy) * ch) << "\" width=\""
         << num(cw + 0.3) << "\" height=\"" << num(ch + 0.3) << "\" fill=\"" << color((v - lo) / (hi - lo)) << "\"/>\n";
    }
  os << "<text x=\"" << kLeft << "\" y=\"" << kTop + side + 16 << "\">" << num(x0, "%.4g") << "</text>\n";
  os << "<text x=\"" << num(kLeft + side) << "\" y=\"" << kTop + side + 16 << "\" text-anchor=\"end\">"
     << num(x1, "%.4g") << "</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(kTop + side) << "\" text-anchor=\"end\">" << num(y0, "%.4g")
     << "</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << num(y1, "%.4g") << "</text>\n";
  // color bar
  const double bx = kLeft + side + 20;
  for (int i = 0; i < 50; ++i)
    os << "<rect x=\"" << num(bx) << "\" y=\"" << num(kTop + side * (1 - (i + 1) / 50.0)) << "\" width=\"14\" height=\""
       << num(side / 50 + 0.3) << "\" fill=\"" << color(i / 49.0) << "\"/>\n";
  os << "<text x=\"" << num(bx + 18) << "\" y=\"" << kTop + 10 << "\">" << num(hi, "%.4g") << "</text>\n";
  os << "<text x=\"" << num(bx + 18) << "\" y=\"" << num(kTop + side) << "\">" << num(lo, "%.4g") << "</text>\n";
  os << "</svg>\n";
}

}  // namespace subeq::app
