#ifndef LIFT_SVG_HPP_
#define LIFT_SVG_HPP_

#include <string>
#include <vector>

namespace lift {

// Minimal SVG bar chart; values may be negative.
void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<double>& values,
                         const std::string& value_name = "value");

// Grouped two-series bar chart (e.g. pipeline vs. baseline MAE).
void write_grouped_bar_chart_svg(const std::string& path, const std::string& title,
                                 const std::vector<std::string>& labels,
                                 const std::vector<double>& series_a,
                                 const std::string& name_a,
                                 const std::vector<double>& series_b,
                                 const std::string& name_b);

}  // namespace lift

#endif  // LIFT_SVG_HPP_
