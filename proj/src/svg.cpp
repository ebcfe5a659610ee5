#include "kws/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kws/error.hpp"

namespace kws {

namespace {

constexpr int kWidth = 860, kHeight = 520;
constexpr int kLeft = 70, kRight = 690, kTop = 50, kBottom = 460;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

std::string fmt(double v, const char* format = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// tick spacing of the form {1,2,5} * 10^k giving 4-8 ticks
double nice_step(double span) {
  if (span <= 0.0) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

void write_svg_plot(const PlotSpec& spec, const std::filesystem::path& path) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const PlotSeries& s : spec.series) {
    if (s.xs.size() != s.ys.size()) throw ParamError("plot series x/y size mismatch");
    for (size_t i = 0; i < s.xs.size(); ++i) {
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  }
  if (xmin > xmax) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) {
    xmax = xmin + 1.0;
  }
  if (ymax == ymin) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  const auto sx = [&](double x) {
    return kLeft + (x - xmin) / (xmax - xmin) * (kRight - kLeft);
  };
  const auto sy = [&](double y) {
    return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(spec.title) << "</text>\n";

  // axes
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";

  const double xstep = nice_step(xmax - xmin);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep) {
    const double px = sx(x);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << kBottom << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << kBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(x, "%g") << "</text>\n";
  }
  const double ystep = nice_step(ymax - ymin);
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9; y += ystep) {
    const double py = sy(y);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py) << "\" x2=\"" << kRight << "\" y2=\""
        << fmt(py) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(y, "%g")
        << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 40
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape_xml(spec.xlabel) << "</text>\n";
  out << "<text x=\"20\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 20 " << (kTop + kBottom) / 2 << ")\">"
      << escape_xml(spec.ylabel) << "</text>\n";

  // series
  for (size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& series = spec.series[s];
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (!series.points_only && series.xs.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < series.xs.size(); ++i) {
        if (i) out << " ";
        out << fmt(sx(series.xs[i])) << "," << fmt(sy(series.ys[i]));
      }
      out << "\"/>\n";
    }
    if (series.points_only) {
      for (size_t i = 0; i < series.xs.size(); ++i)
        out << "<circle cx=\"" << fmt(sx(series.xs[i])) << "\" cy=\"" << fmt(sy(series.ys[i]))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    // legend
    const int ly = kTop + 18 * static_cast<int>(s);
    out << "<line x1=\"" << kRight + 14 << "\" y1=\"" << ly << "\" x2=\"" << kRight + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kRight + 40 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(series.name)
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kws
