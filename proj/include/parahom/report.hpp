#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parahom {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG 1.1 log-log line plot. Points with a nonpositive coordinate
/// are left out.
void write_loglog_svg(std::ostream& os, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace parahom
