#include "lift/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lift/errors.hpp"

namespace lift {

double mae(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw LengthMismatch("mae: vectors of different length");
  }
  if (y_true.size() == 0) throw LengthMismatch("mae: empty vectors");
  return (y_true - y_pred).array().abs().mean();
}

double icc31(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw LengthMismatch("icc31: vectors of different length");
  }
  const auto n = y_true.size();
  if (n < 2) throw TooFewTargets("icc31 needs at least 2 targets");

  constexpr double k = 2.0;
  const double grand = (y_true.sum() + y_pred.sum()) / (k * static_cast<double>(n));
  const Eigen::ArrayXd row_mean = (y_true.array() + y_pred.array()) / k;
  const double m1 = y_true.mean();
  const double m2 = y_pred.mean();

  const double ss_rows = k * (row_mean - grand).square().sum();
  const double ss_cols =
      static_cast<double>(n) * ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand));
  const double ss_total = (y_true.array() - grand).square().sum() +
                          (y_pred.array() - grand).square().sum();
  const double ss_err = ss_total - ss_rows - ss_cols;

  const double bms = ss_rows / static_cast<double>(n - 1);
  const double ems = ss_err / static_cast<double>((n - 1) * (static_cast<int>(k) - 1));
  const double denom = bms + (k - 1.0) * ems;
  if (denom == 0.0) return 0.0;  // all values identical
  return (bms - ems) / denom;
}

int pspi(const AuIntensities& au) {
  for (int k = 0; k < 5; ++k) {
    if (au[k] < 0 || au[k] > 5) throw RangeViolation("AU intensity out of [0,5]");
  }
  if (au[5] != 0 && au[5] != 1) throw RangeViolation("AU43 must be 0 or 1");
  return au[0] + std::max(au[1], au[2]) + std::max(au[3], au[4]) + au[5];
}

int pspi(const std::map<std::string, int>& au) {
  static const char* names[6] = {"AU4", "AU6", "AU7", "AU9", "AU10", "AU43"};
  AuIntensities arr{};
  for (int k = 0; k < 6; ++k) {
    const auto it = au.find(names[k]);
    if (it == au.end()) throw MissingAU(std::string("missing ") + names[k]);
    arr[k] = it->second;
  }
  return pspi(arr);
}

}  // namespace lift
