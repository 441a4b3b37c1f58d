#include "isac/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "isac/text.hpp"

namespace isac {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

/// Short deterministic tick label.
std::string tick_label(double v) {
  double a = std::abs(v);
  if (v != 0 && (a >= 1e4 || a < 1e-3)) {
    std::ostringstream os;
    int e = static_cast<int>(std::floor(std::log10(a)));
    double mant = v / std::pow(10.0, e);
    os << fmt_fixed(mant, 2) << "e" << e;
    return os.str();
  }
  return fmt_fixed(v, a >= 100 ? 0 : 3);
}

}  // namespace

void write_line_chart(std::span<const Series> series, const ChartOptions& opt,
                      const std::filesystem::path& file) {
  if (series.empty()) throw std::invalid_argument("chart has no series");
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const Series& s : series) {
    if (s.points.empty())
      throw std::invalid_argument("series '" + s.label + "' has no points");
    for (auto [x, y] : s.points) {
      if (opt.log_y && !(y > 0))
        throw std::invalid_argument("log-scale chart needs positive values");
      double yy = opt.log_y ? std::log10(y) : y;
      if (first) {
        xmin = xmax = x;
        ymin = ymax = yy;
        first = false;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, yy);
        ymax = std::max(ymax, yy);
      }
    }
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  // A little headroom so lines do not hug the frame.
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double y) {
    double yy = opt.log_y ? std::log10(y) : y;
    return kHeight - kBottom -
           (yy - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
  };
  auto coord = [&](double v) { return fmt_fixed(v, 2); };

  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << esc(opt.title) << "</text>\n";

  // Frame and grid lines with tick labels.
  out << "<g stroke=\"#cccccc\" stroke-width=\"1\" font-family=\"sans-serif\""
         " font-size=\"11\" fill=\"#333333\">\n";
  const int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    double fx = xmin + (xmax - xmin) * i / (kTicks - 1);
    double gx = px(fx);
    out << "<line x1=\"" << coord(gx) << "\" y1=\"" << coord(kTop)
        << "\" x2=\"" << coord(gx) << "\" y2=\"" << coord(kHeight - kBottom)
        << "\"/>\n";
    out << "<text x=\"" << coord(gx) << "\" y=\""
        << coord(kHeight - kBottom + 16)
        << "\" text-anchor=\"middle\" stroke=\"none\">" << tick_label(fx)
        << "</text>\n";
    double fy = ymin + (ymax - ymin) * i / (kTicks - 1);
    double gy = kHeight - kBottom -
                (fy - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
    out << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(gy)
        << "\" x2=\"" << coord(kWidth - kRight) << "\" y2=\"" << coord(gy)
        << "\"/>\n";
    double label_v = opt.log_y ? std::pow(10.0, fy) : fy;
    out << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(gy + 4)
        << "\" text-anchor=\"end\" stroke=\"none\">" << tick_label(label_v)
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop)
      << "\" width=\"" << coord(kWidth - kLeft - kRight) << "\" height=\""
      << coord(kHeight - kTop - kBottom)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // Axis titles.
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << esc(opt.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << kHeight / 2 << ")\">" << esc(opt.y_label) << "</text>\n";

  // Data polylines with point markers.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[si].points.size(); ++i) {
      auto [x, y] = series[si].points[i];
      out << (i ? " " : "") << coord(px(x)) << "," << coord(py(y));
    }
    out << "\"/>\n";
    for (auto [x, y] : series[si].points)
      out << "<circle cx=\"" << coord(px(x)) << "\" cy=\"" << coord(py(y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }

  // Legend, top-right inside the frame.
  double lx = kWidth - kRight - 150, ly = kTop + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % std::size(kPalette)];
    out << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly)
        << "\" x2=\"" << coord(lx + 22) << "\" y2=\"" << coord(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << coord(lx + 28) << "\" y=\"" << coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << esc(series[si].label) << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace isac
