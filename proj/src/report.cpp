#include "wkam/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>

#include "wkam/io.hpp"

namespace wkam {

Check check_le(std::string name, double value, double bound) {
  return Check{std::move(name), value, bound, value <= bound};
}

Check check_ge(std::string name, double value, double bound) {
  return Check{std::move(name), value, bound, value >= bound};
}

Check check_lt(std::string name, double value, double bound) {
  return Check{std::move(name), value, bound, value < bound};
}

void write_summary_ndjson(const std::string& path, const std::vector<Check>& checks) {
  TextFile f(path);
  for (const auto& c : checks) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["value"] = c.value;
    j["bound"] = c.bound;
    j["pass"] = c.pass;
    f << j.dump() << "\n";
  }
  f.close();
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string tick_label(double v, bool log) {
  if (log) return fmt(std::pow(10.0, v), "%.3g");
  return fmt(v, "%.4g");
}

}  // namespace

void write_svg(const std::string& path, const SvgPlot& plot) {
  constexpr double W = 640, H = 420, left = 70, right = 160, top = 40, bottom = 50;
  auto tx = [&](double v) { return plot.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    if (plot.logx && !(x > 0.0)) return false;
    if (plot.logy && !(y > 0.0)) return false;
    return true;
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.03 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;

  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (y1 - v) / (y1 - y0) * ph; };

  TextFile f(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W, "%.0f") << "\" height=\""
    << fmt(H, "%.0f") << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(plot.title) << "</text>\n";
  f << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\""
    << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double vx = x0 + (x1 - x0) * i / 5.0, vy = y0 + (y1 - y0) * i / 5.0;
    f << "<line x1=\"" << fmt(px(vx)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(vx))
      << "\" y2=\"" << fmt(top + ph + 4) << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << fmt(px(vx)) << "\" y=\"" << fmt(top + ph + 16) << "\" text-anchor=\"middle\">"
      << tick_label(vx, plot.logx) << "</text>\n";
    f << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py(vy)) << "\" x2=\"" << fmt(left)
      << "\" y2=\"" << fmt(py(vy)) << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(vy) + 4) << "\" text-anchor=\"end\">"
      << tick_label(vy, plot.logy) << "</text>\n";
  }
  f << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(H - 10)
    << "\" text-anchor=\"middle\">" << escape_xml(plot.xlabel) << "</text>\n";
  f << "<text x=\"16\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fmt(top + ph / 2) << ")\">" << escape_xml(plot.ylabel) << "</text>\n";

  double legend_y = top + 10;
  for (const auto& s : plot.series) {
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!usable(s.x[i], s.y[i])) continue;
        f << "<circle cx=\"" << fmt(px(tx(s.x[i]))) << "\" cy=\"" << fmt(py(ty(s.y[i])))
          << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
      }
    } else {
      std::string pts;
      auto flush = [&] {
        if (!pts.empty())
          f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"" << pts
            << "\"/>\n";
        pts.clear();
      };
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!usable(s.x[i], s.y[i])) {
          flush();
          continue;
        }
        pts += fmt(px(tx(s.x[i]))) + "," + fmt(py(ty(s.y[i]))) + " ";
      }
      flush();
    }
    f << "<line x1=\"" << fmt(W - right + 10) << "\" y1=\"" << fmt(legend_y) << "\" x2=\""
      << fmt(W - right + 30) << "\" y2=\"" << fmt(legend_y) << "\" stroke=\"" << s.color
      << "\" stroke-width=\"2\"/>\n";
    f << "<text x=\"" << fmt(W - right + 34) << "\" y=\"" << fmt(legend_y + 4) << "\">"
      << escape_xml(s.label) << "</text>\n";
    legend_y += 16;
  }
  f << "</svg>\n";
  f.close();
}

}  // namespace wkam
