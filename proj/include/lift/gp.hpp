#ifndef LIFT_GP_HPP_
#define LIFT_GP_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lift {

// Kernel hyperparameters stored in log-space so optimization is
// unconstrained while the raw values stay strictly positive.
struct GpHyperparams {
  Eigen::VectorXd log_length_scales;
  double log_signal_std = 0.0;
  double log_noise_std = 0.0;

  Eigen::VectorXd length_scales() const { return log_length_scales.array().exp(); }
  double signal_std() const;
  double noise_std() const;
  int dim() const { return static_cast<int>(log_length_scales.size()); }

  static GpHyperparams from_values(const Eigen::VectorXd& length_scales,
                                   double signal_std, double noise_std);
};

struct GpOptConfig {
  int iterations = 150;
  double learning_rate = 0.05;
  int restarts = 3;
  double restart_spread = 1.0;  // stddev of log-space perturbations
  std::uint64_t seed = 0;
};

struct GpModel {
  Eigen::MatrixXd train_features;  // n x D, standardized
  Eigen::VectorXd train_targets;   // n, centered by y_offset
  double y_offset = 0.0;           // training-target mean, added back at predict
  GpHyperparams hyperparams;
  Eigen::VectorXd col_mean;  // feature standardization (train statistics)
  Eigen::VectorXd col_std;
  std::vector<std::string> feature_names;
  // Cached factorization of K + sigma_v^2 I (plus jitter).
  Eigen::MatrixXd chol_lower;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
};

// sigma_f^2 * exp(-sum_d (s_d - s'_d)^2 / l_d^2)
double rbf_ard(const Eigen::VectorXd& s, const Eigen::VectorXd& s_prime,
               const GpHyperparams& hp);

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& S, const GpHyperparams& hp);

// Standard Gaussian log-evidence -1/2 y'Ky^-1 y - 1/2 log|Ky| - n/2 log 2pi,
// via Cholesky with escalating diagonal jitter (1e-10 up to 1e-4).
double log_marginal(const GpHyperparams& hp, const Eigen::MatrixXd& S,
                    const Eigen::VectorXd& Y);

// Objective and analytic gradient with respect to the log hyperparameters,
// packed as [log l_1..log l_D, log sigma_f, log sigma_v].
double log_marginal_with_grad(const GpHyperparams& hp, const Eigen::MatrixXd& S,
                              const Eigen::VectorXd& Y, Eigen::VectorXd& grad);

GpHyperparams default_init(const Eigen::MatrixXd& S, const Eigen::VectorXd& Y);

// Standardizes features per column, centers the targets, then maximizes the
// log-marginal with Adam in log-space over multiple seeded restarts, keeping
// the best iterate seen (never worse than the restart's init).
GpModel fit_gp(const Eigen::MatrixXd& S_raw, const Eigen::VectorXd& Y,
               const GpHyperparams& init, const GpOptConfig& opt,
               const std::vector<std::string>& feature_names = {});
GpModel fit_gp(const Eigen::MatrixXd& S_raw, const Eigen::VectorXd& Y,
               const GpOptConfig& opt,
               const std::vector<std::string>& feature_names = {});

// Predictive mean and (nonnegative) latent variance at a raw feature vector.
std::pair<double, double> predict(const GpModel& model, const Eigen::VectorXd& s_raw);

// -ln(l_d) per feature; higher means more relevant.
Eigen::VectorXd relevance(const GpModel& model);

std::string gp_to_json(const GpModel& model);
GpModel gp_from_json(const std::string& text);  // refactorizes on load
void save_gp(const GpModel& model, const std::string& path);
GpModel load_gp(const std::string& path);

}  // namespace lift

#endif  // LIFT_GP_HPP_
