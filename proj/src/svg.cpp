#include "deconvkit/svg.hpp"
#include "deconvkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace deconvkit {

namespace {

constexpr double width = 720.0;
constexpr double height = 480.0;
constexpr double left = 70.0;
constexpr double right = 20.0;
constexpr double top = 40.0;
constexpr double bottom = 50.0;

const char* palette[] = { "#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd" };

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
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

struct Frame
{
  double x0, x1, y0, y1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void header(std::ostringstream& os, const std::string& title)
{
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"16\">" << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, bool x_ticks, const std::string& xl, const std::string& yl)
{
  const double bx = f.px(f.x0), ex = f.px(f.x1), by = f.py(f.y0), ey = f.py(f.y1);
  os << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << fmt(bx) << "\" y1=\"" << fmt(by) << "\" x2=\"" << fmt(ex) << "\" y2=\"" << fmt(by) << "\"/>\n";
  os << "<line x1=\"" << fmt(bx) << "\" y1=\"" << fmt(by) << "\" x2=\"" << fmt(bx) << "\" y2=\"" << fmt(ey) << "\"/>\n";
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    os << "<text x=\"" << fmt(bx - 6) << "\" y=\"" << fmt(f.py(yv) + 4) << "\" text-anchor=\"end\">"
       << tick_label(yv) << "</text>\n";
    if (x_ticks) {
      const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
      os << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(by + 16) << "\" text-anchor=\"middle\">"
         << tick_label(xv) << "</text>\n";
    }
  }
  if (!xl.empty())
    os << "<text x=\"" << fmt((bx + ex) / 2) << "\" y=\"" << fmt(height - 10) << "\" text-anchor=\"middle\">"
       << escape(xl) << "</text>\n";
  if (!yl.empty())
    os << "<text x=\"16\" y=\"" << fmt((by + ey) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << fmt((by + ey) / 2) << ")\">" << escape(yl) << "</text>\n";
  os << "</g>\n";
}

} // namespace

std::string svg_line_plot(const std::vector<Curve>& curves,
                          const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label)
{
  if (curves.empty())
    throw ParameterError("nothing to plot");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = -x0;
  for (const auto& c : curves) {
    if (c.x.size() != c.y.size())
      throw LengthMismatchError("curve '" + c.label + "' has mismatched x and y");
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i]))
        continue;
      x0 = std::min(x0, c.x[i]);
      x1 = std::max(x1, c.x[i]);
      y0 = std::min(y0, c.y[i]);
      y1 = std::max(y1, c.y[i]);
    }
  }
  if (!(x1 > x0)) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  if (!(y1 > y0))
    y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);
  const Frame f{ x0, x1, y0, y1 };

  std::ostringstream os;
  header(os, title);
  axes(os, f, true, x_label, y_label);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* color = palette[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i]))
        continue;
      os << (first ? "" : " ") << fmt(f.px(c.x[i])) << ',' << fmt(f.py(c.y[i]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 8 + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << fmt(width - 170) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(width - 146) << "\" y2=\""
       << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(width - 140) << "\" y=\"" << fmt(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(c.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_box_plot(const std::vector<std::pair<std::string, BoxData>>& boxes, const std::string& title)
{
  if (boxes.empty())
    throw ParameterError("nothing to plot");
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& [name, b] : boxes) {
    for (double v : { b.lower_whisker, b.upper_whisker, b.box.q1, b.box.q3 })
      if (std::isfinite(v)) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
  }
  if (!std::isfinite(y0)) {
    y0 = 0.0;
    y1 = 1.0;
  }
  y0 = std::min(y0, 0.0);
  if (!(y1 > y0))
    y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);
  const Frame f{ 0.0, static_cast<double>(boxes.size()), y0, y1 };

  std::ostringstream os;
  header(os, title);
  axes(os, f, false, "", "10 x ISE");
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const auto& [name, b] = boxes[k];
    const double cx = f.px(static_cast<double>(k) + 0.5);
    const double half = 0.2 * (f.px(1.0) - f.px(0.0));
    const char* color = palette[(k + 1) % 6];
    os << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(height - bottom + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(name) << "</text>\n";
    if (!std::isfinite(b.box.median))
      continue;
    os << "<g stroke=\"" << color << "\" stroke-width=\"1.5\" fill=\"none\">\n";
    os << "<rect x=\"" << fmt(cx - half) << "\" y=\"" << fmt(f.py(b.box.q3)) << "\" width=\"" << fmt(2 * half)
       << "\" height=\"" << fmt(f.py(b.box.q1) - f.py(b.box.q3)) << "\"/>\n";
    os << "<line x1=\"" << fmt(cx - half) << "\" y1=\"" << fmt(f.py(b.box.median)) << "\" x2=\"" << fmt(cx + half)
       << "\" y2=\"" << fmt(f.py(b.box.median)) << "\" stroke-width=\"2.5\"/>\n";
    os << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(f.py(b.box.q3)) << "\" x2=\"" << fmt(cx) << "\" y2=\""
       << fmt(f.py(b.upper_whisker)) << "\"/>\n";
    os << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(f.py(b.box.q1)) << "\" x2=\"" << fmt(cx) << "\" y2=\""
       << fmt(f.py(b.lower_whisker)) << "\"/>\n";
    for (double w : { b.lower_whisker, b.upper_whisker })
      os << "<line x1=\"" << fmt(cx - half / 2) << "\" y1=\"" << fmt(f.py(w)) << "\" x2=\"" << fmt(cx + half / 2)
         << "\" y2=\"" << fmt(f.py(w)) << "\"/>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace deconvkit
