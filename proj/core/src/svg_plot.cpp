#include "odefit/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "odefit/number_format.hpp"

namespace odefit {
namespace {

constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

}  // namespace

std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const double left = 80, right = 170, top = 40, bottom = 50;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;

  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0.0);
  };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };

  Range xr, yr;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(ty(s.y[i]));
    }
  }
  if (xr.empty()) xr = {0.0, 1.0};
  if (yr.empty()) yr = {0.0, 1.0};
  if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
  if (spec.log_y) {
    yr.lo = std::floor(yr.lo);
    yr.hi = std::max(std::ceil(yr.hi), yr.lo + 1.0);
  } else if (yr.hi == yr.lo) {
    yr.hi = yr.lo + 1.0;
  }

  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return top + (1.0 - (v - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << escape(spec.title) << "</text>\n";
  svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
      << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // y ticks: decades on a log axis, five divisions otherwise
  const int ydiv = spec.log_y ? static_cast<int>(yr.hi - yr.lo) : 5;
  const int ystep = std::max(1, ydiv / 10);
  for (int k = 0; k <= ydiv; k += ystep) {
    const double v = yr.lo + (yr.hi - yr.lo) * k / ydiv;
    const double y = py(v);
    svg << "<line x1=\"" << fixed(left) << "\" x2=\"" << fixed(left + pw) << "\" y1=\"" << fixed(y)
        << "\" y2=\"" << fixed(y) << "\" stroke=\"#ddd\"/>\n";
    const std::string label =
        spec.log_y ? "1e" + std::to_string(static_cast<int>(std::lround(v))) : format_double(v);
    svg << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(y + 4)
        << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double v = xr.lo + (xr.hi - xr.lo) * k / 5.0;
    svg << "<text x=\"" << fixed(px(v)) << "\" y=\"" << fixed(top + ph + 18)
        << "\" text-anchor=\"middle\">" << format_double(std::round(v * 100.0) / 100.0)
        << "</text>\n";
  }
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(spec.height - 10.0)
      << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << fixed(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kColors[s % kColors.size()];
    const std::size_t n = std::min(ser.x.size(), ser.y.size());
    std::ostringstream path;
    bool pen_down = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!usable(ser.x[i], ser.y[i])) {
        pen_down = false;
        continue;
      }
      path << (pen_down ? " L" : " M") << fixed(px(ser.x[i])) << ' ' << fixed(py(ty(ser.y[i])));
      pen_down = true;
    }
    const std::string d = path.str();
    if (!d.empty()) {
      svg << "<path d=\"" << d.substr(1) << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = top + 16.0 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << fixed(left + pw + 12) << "\" x2=\"" << fixed(left + pw + 36)
        << "\" y1=\"" << fixed(ly) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed(left + pw + 42) << "\" y=\"" << fixed(ly + 4) << "\">"
        << escape(ser.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace odefit
