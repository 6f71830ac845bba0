#ifndef LIFT_TESTS_ORACLES_HPP_
#define LIFT_TESTS_ORACLES_HPP_

// Independent reference implementations used to check the library. Each
// oracle is written with the most direct formulation available (dense
// inverses, scalar loops, explicit ANOVA tables) so that agreement with the
// optimized library code is meaningful.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lift/gp.hpp"
#include "lift/mlp.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Reference statistics (scalar loops over a sorted copy).

inline double ref_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

inline std::vector<double> ref_stats(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  double mn = v[0], mx = v[0];
  for (double x : v) {
    sum += x;
    mn = std::min(mn, x);
    mx = std::max(mx, x);
  }
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, m5 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    m5 += d * d * d * d * d;
  }
  return {mean,
          ref_quantile(v, 0.5),
          mn,
          mx,
          m2 / n,
          m3 / n,
          m4 / n,
          m5 / n,
          sum,
          ref_quantile(v, 0.75) - ref_quantile(v, 0.25)};
}

// ---------------------------------------------------------------------------
// Two-way ANOVA ICC oracle for an arbitrary number of raters. Builds the
// full ANOVA table from raw sums of squares, then applies
// ICC(3,1) = (BMS - EMS) / (BMS + (k-1) EMS).

inline double ref_icc31(const std::vector<std::vector<double>>& raters) {
  const std::size_t k = raters.size();
  const std::size_t n = raters[0].size();
  double grand = 0.0;
  for (const auto& r : raters)
    for (double x : r) grand += x;
  grand /= static_cast<double>(n * k);

  double ss_targets = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (const auto& r : raters) m += r[i];
    m /= static_cast<double>(k);
    ss_targets += static_cast<double>(k) * (m - grand) * (m - grand);
  }
  double ss_raters = 0.0;
  for (const auto& r : raters) {
    double m = 0.0;
    for (double x : r) m += x;
    m /= static_cast<double>(n);
    ss_raters += static_cast<double>(n) * (m - grand) * (m - grand);
  }
  double ss_total = 0.0;
  for (const auto& r : raters)
    for (double x : r) ss_total += (x - grand) * (x - grand);
  const double ss_err = ss_total - ss_targets - ss_raters;

  const double bms = ss_targets / static_cast<double>(n - 1);
  const double ems = ss_err / static_cast<double>((n - 1) * (k - 1));
  const double denom = bms + static_cast<double>(k - 1) * ems;
  if (denom == 0.0) return 0.0;
  return (bms - ems) / denom;
}

// ---------------------------------------------------------------------------
// Dense GP oracle. Scalar-loop kernel, explicit dense inverse via
// full-pivoting LU, log-determinant from an LDLT factorization.

inline Eigen::MatrixXd ref_gram(const Eigen::MatrixXd& S, const lift::GpHyperparams& hp) {
  const Eigen::Index n = S.rows();
  const Eigen::VectorXd len = hp.length_scales();
  const double sf2 = hp.signal_std() * hp.signal_std();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (Eigen::Index d = 0; d < S.cols(); ++d) {
        const double r = (S(i, d) - S(j, d)) / len[d];
        d2 += r * r;
      }
      K(i, j) = sf2 * std::exp(-d2);
    }
  }
  return K;
}

// Matches the library's baseline jitter of 1e-10 on the noisy diagonal.
inline Eigen::MatrixXd ref_ky(const Eigen::MatrixXd& S, const lift::GpHyperparams& hp) {
  Eigen::MatrixXd ky = ref_gram(S, hp);
  const double nv = hp.noise_std() * hp.noise_std();
  ky.diagonal().array() += nv + 1e-10;
  return ky;
}

inline double ref_log_marginal(const lift::GpHyperparams& hp, const Eigen::MatrixXd& S,
                               const Eigen::VectorXd& Y) {
  const Eigen::MatrixXd ky = ref_ky(S, hp);
  const Eigen::MatrixXd inv = Eigen::FullPivLU<Eigen::MatrixXd>(ky).inverse();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(ky);
  const double log_det = ldlt.vectorD().array().log().sum();
  const double quad = Y.dot(inv * Y);
  const double n = static_cast<double>(S.rows());
  return -0.5 * quad - 0.5 * log_det - 0.5 * n * std::log(2.0 * M_PI);
}

// Predictive mean/variance at s_star given raw training data, replicating
// the library's feature standardization and target centering externally.
struct RefPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

inline RefPrediction ref_predict(const lift::GpHyperparams& hp, const Eigen::MatrixXd& S,
                                 const Eigen::VectorXd& Y, const Eigen::VectorXd& s_star) {
  const Eigen::MatrixXd inv = Eigen::FullPivLU<Eigen::MatrixXd>(ref_ky(S, hp)).inverse();
  const Eigen::Index n = S.rows();
  const Eigen::VectorXd len = hp.length_scales();
  const double sf2 = hp.signal_std() * hp.signal_std();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (Eigen::Index d = 0; d < S.cols(); ++d) {
      const double r = (S(i, d) - s_star[d]) / len[d];
      d2 += r * r;
    }
    k_star[i] = sf2 * std::exp(-d2);
  }
  RefPrediction out;
  out.mean = k_star.dot(inv * Y);
  out.variance = sf2 - k_star.dot(inv * k_star);
  return out;
}

// ---------------------------------------------------------------------------
// Naive MLP forward pass: scalar loops over the layer weights, replicating
// the injection placements from first principles.

inline Eigen::VectorXd ref_mlp_forward(const lift::MlpModel& model,
                                       const Eigen::VectorXd& x_norm,
                                       const Eigen::VectorXd& personal) {
  std::vector<double> a(x_norm.data(), x_norm.data() + x_norm.size());
  if (model.cfg.injection == lift::Injection::Input) {
    for (Eigen::Index i = 0; i < personal.size(); ++i) a.push_back(personal[i]);
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    if (model.cfg.injection == lift::Injection::ThirdLayer &&
        static_cast<int>(l) == lift::MlpModel::kInjectionLayer) {
      for (Eigen::Index i = 0; i < personal.size(); ++i) a.push_back(personal[i]);
    }
    const Eigen::MatrixXd& w = model.weights[l];
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double acc = model.biases[l][r];
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] = std::max(acc, 0.0);
    }
    a = std::move(next);
  }
  Eigen::VectorXd out(model.head_weight.rows());
  for (Eigen::Index r = 0; r < model.head_weight.rows(); ++r) {
    double acc = model.head_bias[r];
    for (Eigen::Index c = 0; c < model.head_weight.cols(); ++c) {
      acc += model.head_weight(r, c) * a[static_cast<std::size_t>(c)];
    }
    out[r] = acc;
  }
  return out;
}

}  // namespace oracles

#endif  // LIFT_TESTS_ORACLES_HPP_
