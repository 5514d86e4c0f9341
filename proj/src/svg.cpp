#include "nondecomp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace nondecomp {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// round the raw span to 1/2/5 * 10^k tick spacing
double nice_step(double span, int target_ticks) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double nice = 10.0;
  if (frac <= 1.0) nice = 1.0;
  else if (frac <= 2.0) nice = 2.0;
  else if (frac <= 5.0) nice = 5.0;
  return nice * mag;
}

}  // namespace

std::string render_line_plot(const std::string& title,
                             const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series, int width,
                             int height) {
  const double ml = 64, mr = 16, mt = 36, mb = 46;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min, y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!std::isfinite(x_min)) {  // no data at all
    x_min = 0; x_max = 1; y_min = 0; y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) { y_max += 0.5; y_min -= 0.5; }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) {
    return mt + ph - (y - y_min) / (y_max - y_min) * ph;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width
      << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << escape(title) << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";

  const double xs = nice_step(x_max - x_min, 6);
  for (double t = std::ceil(x_min / xs) * xs; t <= x_max + 1e-9 * xs; t += xs) {
    out << "<line x1=\"" << px(t) << "\" y1=\"" << mt + ph << "\" x2=\""
        << px(t) << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(t) << "\" y=\"" << mt + ph + 17
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(t) << "</text>\n";
  }
  const double ys = nice_step(y_max - y_min, 5);
  for (double t = std::ceil(y_min / ys) * ys; t <= y_max + 1e-9 * ys; t += ys) {
    out << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(t) << "\" x2=\"" << ml
        << "\" y2=\"" << py(t) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 7 << "\" y=\"" << py(t) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(t) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 14 "
      << mt + ph / 2 << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
    std::ostringstream points;
    bool open = false;
    auto flush = [&]() {
      if (open) {
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";
      }
      points.str("");
      open = false;
    };
    const auto& sr = series[s];
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) {
        flush();
        continue;
      }
      points << fmt(px(sr.x[i])) << ',' << fmt(py(sr.y[i])) << ' ';
      open = true;
    }
    flush();
    // legend
    const double ly = mt + 14 + 16 * static_cast<double>(s);
    out << "<line x1=\"" << ml + pw - 110 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw - 90 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw - 84 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(sr.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace nondecomp
