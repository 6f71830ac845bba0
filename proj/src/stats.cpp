#include "lift/stats.hpp"

#include <algorithm>
#include <cmath>

#include "lift/errors.hpp"

namespace lift {

double quantile(const Eigen::VectorXd& values, double p) {
  if (values.size() == 0) throw EmptySequence("quantile of empty vector");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Eigen::VectorXd compute_stats(const Eigen::VectorXd& values) {
  const auto n = values.size();
  if (n == 0) throw EmptySequence("compute_stats on empty vector");

  const double sum = values.sum();
  const double mean = sum / static_cast<double>(n);
  const Eigen::ArrayXd centered = values.array() - mean;

  Eigen::VectorXd out(kNumStats);
  out[0] = mean;
  out[1] = quantile(values, 0.5);
  out[2] = values.minCoeff();
  out[3] = values.maxCoeff();
  out[4] = centered.square().mean();
  out[5] = centered.pow(3).mean();
  out[6] = centered.pow(4).mean();
  out[7] = centered.pow(5).mean();
  out[8] = sum;
  out[9] = quantile(values, 0.75) - quantile(values, 0.25);
  return out;
}

const std::vector<std::string>& stat_names() {
  static const std::vector<std::string> names = {
      "mean", "median", "min",     "max", "variance",
      "mom3", "mom4",   "mom5",    "sum", "iqr"};
  return names;
}

}  // namespace lift
