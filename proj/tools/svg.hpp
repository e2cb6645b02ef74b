#pragma once

// Minimal self-contained SVG plotting for the CLI: a loss curve and a
// histogram, no external assets.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace dppl_cli {

inline std::string svg_header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void write_line_plot(const std::string& path, std::span<const double> ys,
                            const std::string& title) {
  const int W = 640, H = 400, ML = 60, MR = 20, MT = 40, MB = 40;
  double lo = 1e300, hi = -1e300;
  for (double y : ys) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (!(hi > lo)) {
    hi = lo + 1.0;
    lo -= 1.0;
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  std::ofstream out(path);
  out << svg_header(W, H);
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << title << "</text>\n";
  // axes
  out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", hi);
  out << "<text x=\"" << ML - 6 << "\" y=\"" << MT + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", lo);
  out << "<text x=\"" << ML - 6 << "\" y=\"" << H - MB
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";
  out << "<text x=\"" << (W + ML - MR) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration</text>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
  const size_t n = ys.size();
  for (size_t i = 0; i < n; ++i) {
    double x = ML + (double(i) / double(std::max<size_t>(1, n - 1))) * (W - ML - MR);
    double y = (H - MB) - (ys[i] - lo) / (hi - lo) * (H - MT - MB);
    out << x << "," << y << " ";
  }
  out << "\"/>\n</svg>\n";
}

inline void write_histogram(const std::string& path, std::span<const double> xs,
                            const std::string& title, int bins = 40) {
  const int W = 640, H = 400, ML = 60, MR = 20, MT = 40, MB = 40;
  double lo = 1e300, hi = -1e300;
  for (double x : xs) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(hi > lo)) {
    hi = lo + 1.0;
    lo -= 1.0;
  }
  std::vector<int> count(size_t(bins), 0);
  for (double x : xs) {
    int b = int((x - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++count[size_t(b)];
  }
  int peak = std::max(1, *std::max_element(count.begin(), count.end()));

  std::ofstream out(path);
  out << svg_header(W, H);
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", lo);
  out << "<text x=\"" << ML << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", hi);
  out << "<text x=\"" << W - MR << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";
  double bw = double(W - ML - MR) / bins;
  for (int b = 0; b < bins; ++b) {
    double frac = double(count[size_t(b)]) / peak;
    double bh = frac * (H - MT - MB);
    out << "<rect x=\"" << ML + b * bw << "\" y=\"" << (H - MB) - bh << "\" width=\"" << bw * 0.92
        << "\" height=\"" << bh << "\" fill=\"#4a9e4a\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace dppl_cli
