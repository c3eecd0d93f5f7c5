#ifndef PHASELAB_PLOT_HPP
#define PHASELAB_PLOT_HPP

#include <string>
#include <vector>

namespace phaselab::plot {

struct Series {
    std::string name;
    std::vector<double> values; // one per category; NaN entries are skipped
};

/// Render a categorical line chart (EER curves over perturbation settings) as
/// a static SVG file. Deterministic output for identical inputs.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<std::string>& categories,
                      const std::vector<Series>& series,
                      const std::string& y_label);

} // namespace phaselab::plot

#endif
