#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtcd/image_io.hpp"
#include "mtcd/report/embedding.hpp"

namespace mtcd::report {

/// Draws ASCII text with a built-in 5x7 font; lowercase renders as uppercase
/// and unknown characters as blanks. Returns the x after the last glyph.
int draw_text(RgbImage& img, int x, int y, const std::string& text, std::array<std::uint8_t, 3> color,
              int scale = 1);

struct BarGroup {
    std::string label;
    std::vector<std::optional<double>> values;  // one per series, missing bars are skipped
};

/// Grouped bar chart with values in [0, y_max].
RgbImage bar_chart(const std::string& title, const std::vector<std::string>& series,
                   const std::vector<BarGroup>& groups, double y_max);

/// Scatter plot coloured by integer label (indexes into class_names).
RgbImage scatter_plot(const std::string& title, const std::vector<Point2>& points, const std::vector<int>& labels,
                      const std::vector<std::string>& class_names);

} // namespace mtcd::report
