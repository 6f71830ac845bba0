#include "lift/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lift/errors.hpp"
#include "lift/rng.hpp"

namespace lift {

using json = nlohmann::json;

double GpHyperparams::signal_std() const { return std::exp(log_signal_std); }
double GpHyperparams::noise_std() const { return std::exp(log_noise_std); }

GpHyperparams GpHyperparams::from_values(const Eigen::VectorXd& length_scales,
                                         double signal_std, double noise_std) {
  if ((length_scales.array() <= 0.0).any() || signal_std <= 0.0 || noise_std <= 0.0) {
    throw BadConfig("GP hyperparameters must be strictly positive");
  }
  GpHyperparams hp;
  hp.log_length_scales = length_scales.array().log();
  hp.log_signal_std = std::log(signal_std);
  hp.log_noise_std = std::log(noise_std);
  return hp;
}

double rbf_ard(const Eigen::VectorXd& s, const Eigen::VectorXd& s_prime,
               const GpHyperparams& hp) {
  if (s.size() != s_prime.size() || s.size() != hp.dim()) {
    throw DimensionMismatch("rbf_ard: dimension mismatch");
  }
  const Eigen::ArrayXd inv_sq = (-2.0 * hp.log_length_scales.array()).exp();
  const double d2 = ((s - s_prime).array().square() * inv_sq).sum();
  const double sf2 = std::exp(2.0 * hp.log_signal_std);
  return sf2 * std::exp(-d2);
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& S, const GpHyperparams& hp) {
  if (S.cols() != hp.dim()) throw DimensionMismatch("gram_matrix: dimension mismatch");
  const auto n = S.rows();
  const Eigen::ArrayXd inv_len = (-hp.log_length_scales.array()).exp();
  const Eigen::MatrixXd scaled =
      (S.array().rowwise() * inv_len.transpose()).matrix();
  const Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                       2.0 * scaled * scaled.transpose();
  d2 = d2.cwiseMax(0.0);  // guard tiny negatives from cancellation
  const double sf2 = std::exp(2.0 * hp.log_signal_std);
  Eigen::MatrixXd K = sf2 * (-d2.array()).exp().matrix();
  // Enforce exact symmetry.
  K = 0.5 * (K + K.transpose()).eval();
  return K;
}

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

// Cholesky of K + sigma_v^2 I + jitter I, escalating jitter tenfold on
// failure. Returns the lower factor and the jitter used.
std::pair<Eigen::MatrixXd, double> chol_with_jitter(const Eigen::MatrixXd& K,
                                                    double noise_var) {
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd ky = K;
    ky.diagonal().array() += noise_var + jitter;
    const Eigen::LLT<Eigen::MatrixXd> llt(ky);
    if (llt.info() == Eigen::Success) {
      return {Eigen::MatrixXd(llt.matrixL()), jitter};
    }
  }
  throw NotPositiveDefinite("kernel matrix not positive definite after max jitter");
}

double log_marginal_impl(const GpHyperparams& hp, const Eigen::MatrixXd& S,
                         const Eigen::VectorXd& Y, Eigen::VectorXd* grad,
                         Eigen::MatrixXd* chol_out = nullptr,
                         Eigen::VectorXd* alpha_out = nullptr, double* jitter_out = nullptr) {
  const auto n = S.rows();
  if (n < 1) throw BadConfig("log_marginal needs at least one point");
  if (Y.size() != n) throw DimensionMismatch("log_marginal: |Y| != rows(S)");

  const Eigen::MatrixXd K = gram_matrix(S, hp);
  const double noise_var = std::exp(2.0 * hp.log_noise_std);
  auto [L, jitter] = chol_with_jitter(K, noise_var);

  // alpha = (K + sigma_v^2 I)^-1 Y via two triangular solves.
  Eigen::VectorXd alpha = L.triangularView<Eigen::Lower>().solve(Y);
  const double quad = alpha.squaredNorm();  // Y' Ky^-1 Y
  L.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);

  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double value = -0.5 * quad - 0.5 * log_det -
                       0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);

  if (grad != nullptr) {
    // W = Ky^-1, computed from the factor.
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
    L.triangularView<Eigen::Lower>().solveInPlace(W);
    L.triangularView<Eigen::Lower>().transpose().solveInPlace(W);

    const int d = hp.dim();
    grad->resize(d + 2);
    const Eigen::ArrayXd inv_len_sq = (-2.0 * hp.log_length_scales.array()).exp();
    for (int j = 0; j < d; ++j) {
      // dK/d(log l_j) = K .* (2 r_j^2 / l_j^2)
      const Eigen::VectorXd col = S.col(j);
      Eigen::MatrixXd r2 = col.replicate(1, n) - col.transpose().replicate(n, 1);
      r2 = r2.cwiseProduct(r2);
      const Eigen::MatrixXd G = (K.array() * (2.0 * inv_len_sq[j]) * r2.array()).matrix();
      (*grad)[j] = 0.5 * (alpha.dot(G * alpha) - (W.cwiseProduct(G)).sum());
    }
    // dKy/d(log sigma_f) = 2K, dKy/d(log sigma_v) = 2 sigma_v^2 I
    (*grad)[d] = 0.5 * (alpha.dot(K * alpha) - (W.cwiseProduct(K)).sum()) * 2.0;
    (*grad)[d + 1] = noise_var * (alpha.squaredNorm() - W.trace());
  }

  if (chol_out != nullptr) *chol_out = std::move(L);
  if (alpha_out != nullptr) *alpha_out = std::move(alpha);
  if (jitter_out != nullptr) *jitter_out = jitter;
  return value;
}

GpHyperparams unpack_theta(const Eigen::VectorXd& theta) {
  GpHyperparams hp;
  const auto d = theta.size() - 2;
  hp.log_length_scales = theta.head(d);
  hp.log_signal_std = theta[d];
  hp.log_noise_std = theta[d + 1];
  return hp;
}

Eigen::VectorXd pack_theta(const GpHyperparams& hp) {
  Eigen::VectorXd theta(hp.dim() + 2);
  theta.head(hp.dim()) = hp.log_length_scales;
  theta[hp.dim()] = hp.log_signal_std;
  theta[hp.dim() + 1] = hp.log_noise_std;
  return theta;
}

}  // namespace

double log_marginal(const GpHyperparams& hp, const Eigen::MatrixXd& S,
                    const Eigen::VectorXd& Y) {
  return log_marginal_impl(hp, S, Y, nullptr);
}

double log_marginal_with_grad(const GpHyperparams& hp, const Eigen::MatrixXd& S,
                              const Eigen::VectorXd& Y, Eigen::VectorXd& grad) {
  return log_marginal_impl(hp, S, Y, &grad);
}

GpHyperparams default_init(const Eigen::MatrixXd& S, const Eigen::VectorXd& Y) {
  const double y_std = std::sqrt((Y.array() - Y.mean()).square().mean());
  const double sf = y_std > 0.0 ? y_std : 1.0;
  GpHyperparams hp;
  hp.log_length_scales = Eigen::VectorXd::Zero(S.cols());  // l = 1
  hp.log_signal_std = std::log(sf);
  hp.log_noise_std = std::log(0.1 * sf);
  return hp;
}

GpModel fit_gp(const Eigen::MatrixXd& S_raw, const Eigen::VectorXd& Y,
               const GpOptConfig& opt, const std::vector<std::string>& feature_names) {
  // Standardize first so the default init sees the final feature scale.
  return fit_gp(S_raw, Y, GpHyperparams{}, opt, feature_names);
}

GpModel fit_gp(const Eigen::MatrixXd& S_raw, const Eigen::VectorXd& Y,
               const GpHyperparams& init, const GpOptConfig& opt,
               const std::vector<std::string>& feature_names) {
  const auto n = S_raw.rows();
  const auto d = S_raw.cols();
  if (n < 2) throw BadConfig("fit_gp needs at least 2 points");
  if (Y.size() != n) throw DimensionMismatch("fit_gp: |Y| != rows(S)");

  GpModel model;
  model.col_mean = S_raw.colwise().mean().transpose();
  Eigen::RowVectorXd stddev =
      (S_raw.rowwise() - model.col_mean.transpose()).array().square().colwise().mean().sqrt().matrix();
  for (Eigen::Index c = 0; c < stddev.size(); ++c) {
    if (stddev[c] <= 0.0) stddev[c] = 1.0;
  }
  model.col_std = stddev.transpose();
  model.train_features =
      ((S_raw.rowwise() - model.col_mean.transpose()).array().rowwise() /
       stddev.array())
          .matrix();
  model.y_offset = Y.mean();
  model.train_targets = Y.array() - model.y_offset;
  model.feature_names = feature_names;
  if (model.feature_names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) model.feature_names.push_back("f" + std::to_string(j));
  }

  const GpHyperparams start =
      init.dim() == d ? init : default_init(model.train_features, model.train_targets);

  Eigen::VectorXd best_theta;
  double best_value = -std::numeric_limits<double>::infinity();

  Rng restart_rng(derive_seed(opt.seed, "gp-restarts"));
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Eigen::VectorXd theta = pack_theta(start);
    if (r > 0) {
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta[i] += opt.restart_spread * restart_rng.normal();
      }
    }

    // Adam ascent with monotone acceptance: track the best iterate seen,
    // starting from the restart's own init.
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    Eigen::VectorXd grad;
    double value;
    try {
      value =
          log_marginal_with_grad(unpack_theta(theta), model.train_features, model.train_targets, grad);
    } catch (const NotPositiveDefinite&) {
      continue;
    }
    if (!std::isfinite(value)) {
      if (r == 0) throw NonFiniteObjective("log-marginal not finite at init");
      continue;
    }
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }

    for (int it = 1; it <= opt.iterations; ++it) {
      m = beta1 * m + (1.0 - beta1) * grad;
      v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
      const double c1 = 1.0 - std::pow(beta1, it);
      const double c2 = 1.0 - std::pow(beta2, it);
      theta.array() += opt.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);

      try {
        value = log_marginal_with_grad(unpack_theta(theta), model.train_features,
                                       model.train_targets, grad);
      } catch (const NotPositiveDefinite&) {
        break;
      }
      if (!std::isfinite(value)) break;
      if (value > best_value) {
        best_value = value;
        best_theta = theta;
      }
    }
  }

  if (best_theta.size() == 0) {
    throw NonFiniteObjective("no GP restart produced a finite objective");
  }

  model.hyperparams = unpack_theta(best_theta);
  log_marginal_impl(model.hyperparams, model.train_features, model.train_targets, nullptr,
                    &model.chol_lower, &model.alpha, &model.jitter);
  return model;
}

std::pair<double, double> predict(const GpModel& model, const Eigen::VectorXd& s_raw) {
  const auto d = model.train_features.cols();
  if (s_raw.size() != d) throw DimensionMismatch("predict: feature dimension mismatch");
  const Eigen::VectorXd s =
      ((s_raw - model.col_mean).array() / model.col_std.array()).matrix();

  const auto n = model.train_features.rows();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k_star[i] = rbf_ard(model.train_features.row(i).transpose(), s, model.hyperparams);
  }
  const double mean = model.y_offset + k_star.dot(model.alpha);

  const Eigen::VectorXd w = model.chol_lower.triangularView<Eigen::Lower>().solve(k_star);
  const double k_ss = std::exp(2.0 * model.hyperparams.log_signal_std);
  double variance = k_ss - w.squaredNorm();
  if (variance < 0.0) variance = 0.0;  // rounding guard
  return {mean, variance};
}

Eigen::VectorXd relevance(const GpModel& model) {
  return -model.hyperparams.log_length_scales;
}

std::string gp_to_json(const GpModel& model) {
  json j;
  j["hyperparams"] = {
      {"log_length_scales",
       std::vector<double>(model.hyperparams.log_length_scales.data(),
                           model.hyperparams.log_length_scales.data() +
                               model.hyperparams.log_length_scales.size())},
      {"log_signal_std", model.hyperparams.log_signal_std},
      {"log_noise_std", model.hyperparams.log_noise_std}};
  j["standardization"] = {
      {"mean", std::vector<double>(model.col_mean.data(),
                                   model.col_mean.data() + model.col_mean.size())},
      {"std", std::vector<double>(model.col_std.data(),
                                  model.col_std.data() + model.col_std.size())}};
  json s = json::array();
  for (Eigen::Index i = 0; i < model.train_features.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.train_features.cols(); ++c) {
      row.push_back(model.train_features(i, c));
    }
    s.push_back(std::move(row));
  }
  j["S"] = std::move(s);
  j["Y"] = std::vector<double>(model.train_targets.data(),
                               model.train_targets.data() + model.train_targets.size());
  j["y_offset"] = model.y_offset;
  j["feature_names"] = model.feature_names;
  return j.dump(2);
}

GpModel gp_from_json(const std::string& text) {
  const json j = json::parse(text);
  GpModel model;
  const auto lls = j.at("hyperparams").at("log_length_scales").get<std::vector<double>>();
  model.hyperparams.log_length_scales =
      Eigen::Map<const Eigen::VectorXd>(lls.data(), static_cast<Eigen::Index>(lls.size()));
  model.hyperparams.log_signal_std = j.at("hyperparams").at("log_signal_std").get<double>();
  model.hyperparams.log_noise_std = j.at("hyperparams").at("log_noise_std").get<double>();

  const auto mean = j.at("standardization").at("mean").get<std::vector<double>>();
  const auto stddev = j.at("standardization").at("std").get<std::vector<double>>();
  model.col_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  model.col_std = Eigen::Map<const Eigen::VectorXd>(stddev.data(), stddev.size());

  const json& s = j.at("S");
  const auto n = s.size();
  const auto d = n == 0 ? 0 : s.at(0).size();
  model.train_features.resize(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) model.train_features(i, c) = s.at(i).at(c).get<double>();
  }
  const auto y = j.at("Y").get<std::vector<double>>();
  model.train_targets = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  model.y_offset = j.at("y_offset").get<double>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();

  // Factorization is recomputed rather than stored; predictions agree even
  // if the factor bits differ across platforms.
  log_marginal_impl(model.hyperparams, model.train_features, model.train_targets, nullptr,
                    &model.chol_lower, &model.alpha, &model.jitter);
  return model;
}

void save_gp(const GpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << gp_to_json(model);
}

GpModel load_gp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return gp_from_json(ss.str());
}

}  // namespace lift
