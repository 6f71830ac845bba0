#ifndef LIFT_STATS_HPP_
#define LIFT_STATS_HPP_

#include <Eigen/Core>
#include <string>
#include <vector>

namespace lift {

inline constexpr int kNumStats = 10;

// Fixed-size summary of a variable-length stream, in the order:
// mean, median, min, max, variance, 3rd/4th/5th central moment, sum, IQR.
// Variance and moments are population quantities (divide by n); quantiles
// use linear interpolation at index h = (n-1)p.
Eigen::VectorXd compute_stats(const Eigen::VectorXd& values);

// Linear-interpolation quantile, p in [0,1].
double quantile(const Eigen::VectorXd& values, double p);

const std::vector<std::string>& stat_names();

}  // namespace lift

#endif  // LIFT_STATS_HPP_
