#pragma once

#include "deconvkit/simbench.hpp"

#include <string>
#include <vector>

namespace deconvkit {

struct Curve
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart on a fixed 720 x 480 viewport. Output depends only on the input.
std::string svg_line_plot(const std::vector<Curve>& curves,
                          const std::string& title,
                          const std::string& x_label = "y",
                          const std::string& y_label = "density");

/// One box per entry, whiskers at the 1.5 IQR fences, outliers left out.
std::string svg_box_plot(const std::vector<std::pair<std::string, BoxData>>& boxes, const std::string& title);

} // namespace deconvkit
