#include "lift/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lift/errors.hpp"

namespace lift {

namespace {

struct Layout {
  double width, height, left, bottom, top;
  double y_of(double v, double vmin, double vmax) const {
    const double span = vmax - vmin;
    const double frac = span > 0 ? (v - vmin) / span : 0.5;
    return bottom - frac * (bottom - top);
  }
};

void chart_header(std::ofstream& out, const Layout& lay, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << lay.width << "\" height=\""
      << lay.height << "\">\n";
  out << "<text x=\"" << lay.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
}

}  // namespace

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<double>& values, const std::string& value_name) {
  if (labels.size() != values.size()) throw LengthMismatch("labels/values size mismatch");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);

  const Layout lay{std::max(320.0, 40.0 + 18.0 * values.size()), 320.0, 40.0, 270.0, 40.0};
  double vmin = 0.0, vmax = 0.0;
  for (const double v : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (vmax == vmin) vmax = vmin + 1.0;

  chart_header(out, lay, title + " (" + value_name + ")");
  const double zero_y = lay.y_of(0.0, vmin, vmax);
  out << "<line x1=\"" << lay.left << "\" y1=\"" << zero_y << "\" x2=\"" << lay.width - 10
      << "\" y2=\"" << zero_y << "\" stroke=\"black\"/>\n";

  const double bar_w = 14.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = lay.left + 4.0 + 18.0 * static_cast<double>(i);
    const double y = lay.y_of(values[i], vmin, vmax);
    const double top = std::min(y, zero_y);
    const double h = std::abs(zero_y - y);
    out << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << bar_w << "\" height=\""
        << h << "\" fill=\"steelblue\"/>\n";
    out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << lay.bottom + 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\">" << labels[i]
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_grouped_bar_chart_svg(const std::string& path, const std::string& title,
                                 const std::vector<std::string>& labels,
                                 const std::vector<double>& series_a, const std::string& name_a,
                                 const std::vector<double>& series_b,
                                 const std::string& name_b) {
  if (labels.size() != series_a.size() || labels.size() != series_b.size()) {
    throw LengthMismatch("labels/series size mismatch");
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);

  const Layout lay{std::max(360.0, 40.0 + 26.0 * labels.size()), 320.0, 40.0, 270.0, 40.0};
  double vmin = 0.0, vmax = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    vmin = std::min({vmin, series_a[i], series_b[i]});
    vmax = std::max({vmax, series_a[i], series_b[i]});
  }
  if (vmax == vmin) vmax = vmin + 1.0;

  chart_header(out, lay, title + " (" + name_a + " vs " + name_b + ")");
  const double zero_y = lay.y_of(0.0, vmin, vmax);
  out << "<line x1=\"" << lay.left << "\" y1=\"" << zero_y << "\" x2=\"" << lay.width - 10
      << "\" y2=\"" << zero_y << "\" stroke=\"black\"/>\n";

  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = lay.left + 4.0 + 26.0 * static_cast<double>(i);
    for (int s = 0; s < 2; ++s) {
      const double v = s == 0 ? series_a[i] : series_b[i];
      const double y = lay.y_of(v, vmin, vmax);
      out << "<rect x=\"" << x + 10.0 * s << "\" y=\"" << std::min(y, zero_y)
          << "\" width=\"9\" height=\"" << std::abs(zero_y - y) << "\" fill=\""
          << (s == 0 ? "steelblue" : "indianred") << "\"/>\n";
    }
    out << "<text x=\"" << x + 10 << "\" y=\"" << lay.bottom + 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\">" << labels[i]
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lift
