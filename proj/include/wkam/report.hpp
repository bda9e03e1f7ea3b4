#pragma once

// Study checks, the summary.ndjson writer and a small SVG line-plot writer.

#include <string>
#include <vector>

namespace wkam {

/// One pass/fail record: `value` compared against `bound`.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

Check check_le(std::string name, double value, double bound);
Check check_ge(std::string name, double value, double bound);
Check check_lt(std::string name, double value, double bound);

/// One JSON object per line: name, value, bound, pass.
void write_summary_ndjson(const std::string& path, const std::vector<Check>& checks);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool markers = false;  // dots instead of a polyline
};

struct SvgPlot {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<SvgSeries> series;
};

/// Axes with tick labels, one polyline or dot set per series and a legend.
/// Non-finite points (and nonpositive ones on log axes) are skipped.
void write_svg(const std::string& path, const SvgPlot& plot);

}  // namespace wkam
