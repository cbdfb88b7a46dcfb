#ifndef PLINF_SVG_HPP_
#define PLINF_SVG_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace plinf {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static log-log line chart. Points with a nonpositive coordinate are
/// skipped; axes span whole decades around the data.
void write_loglog_svg(std::ostream& out, const std::string& title, const std::string& xlabel,
                      const std::vector<PlotSeries>& series);

}  // namespace plinf

#endif  // PLINF_SVG_HPP_
