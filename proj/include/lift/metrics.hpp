#ifndef LIFT_METRICS_HPP_
#define LIFT_METRICS_HPP_

#include <Eigen/Core>
#include <map>
#include <string>

#include "lift/dataset.hpp"

namespace lift {

double mae(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// ICC(3,1): two-way mixed, single measure, consistency form with k=2 raters
// (true and predicted). Returns 0 when the data is fully degenerate
// (BMS = EMS = 0).
double icc31(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// PSPI = AU4 + max(AU6, AU7) + max(AU9, AU10) + AU43.
// AU order in the array: AU4, AU6, AU7, AU9, AU10, AU43.
int pspi(const AuIntensities& au);
int pspi(const std::map<std::string, int>& au);

}  // namespace lift

#endif  // LIFT_METRICS_HPP_
