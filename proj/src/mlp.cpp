#include "lift/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lift/errors.hpp"
#include "lift/rng.hpp"

namespace lift {

using json = nlohmann::json;

std::string to_string(Injection inj) {
  switch (inj) {
    case Injection::None: return "none";
    case Injection::Input: return "input";
    case Injection::ThirdLayer: return "third-layer";
  }
  return "";
}

std::string to_string(Tasks t) { return t == Tasks::VasOpi ? "vas+opi" : "vas"; }

Injection injection_from_string(const std::string& s) {
  if (s == "none") return Injection::None;
  if (s == "input") return Injection::Input;
  if (s == "third-layer") return Injection::ThirdLayer;
  throw BadConfig("unknown injection: " + s);
}

Tasks tasks_from_string(const std::string& s) {
  if (s == "vas") return Tasks::Vas;
  if (s == "vas+opi") return Tasks::VasOpi;
  throw BadConfig("unknown tasks: " + s);
}

void MlpConfig::validate() const {
  if (hidden_sizes.empty()) throw BadConfig("need at least one hidden layer");
  for (const int h : hidden_sizes) {
    if (h <= 0) throw BadConfig("hidden sizes must be positive");
  }
  if (injection == Injection::ThirdLayer &&
      hidden_sizes.size() <= MlpModel::kInjectionLayer) {
    throw BadConfig("third-layer injection needs at least 4 hidden layers");
  }
  if (epochs <= 0 || batch_size <= 0) throw BadConfig("epochs and batch size must be positive");
  if (learning_rate <= 0) throw BadConfig("learning rate must be positive");
  if (landmark_dim <= 0) throw BadConfig("landmark dim must be positive");
  if (injection != Injection::None && personal_dim <= 0) {
    throw BadConfig("personal dim must be positive when injecting");
  }
}

namespace {

// Input width consumed by hidden layer l.
int layer_in_dim(const MlpConfig& cfg, int l) {
  int in = (l == 0) ? cfg.landmark_dim + (cfg.injection == Injection::Input ? cfg.personal_dim : 0)
                    : cfg.hidden_sizes[l - 1];
  if (cfg.injection == Injection::ThirdLayer && l == MlpModel::kInjectionLayer) {
    in += cfg.personal_dim;
  }
  return in;
}

Eigen::MatrixXd glorot_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
  }
  return w;
}

}  // namespace

MlpModel init_model(const MlpConfig& cfg) {
  cfg.validate();
  MlpModel model;
  model.cfg = cfg;
  model.feat_mean = Eigen::VectorXd::Zero(cfg.landmark_dim);
  model.feat_std = Eigen::VectorXd::Ones(cfg.landmark_dim);

  Rng rng(derive_seed(cfg.seed, "mlp-init"));
  const int num_hidden = static_cast<int>(cfg.hidden_sizes.size());
  for (int l = 0; l < num_hidden; ++l) {
    const int in = layer_in_dim(cfg, l);
    const int out = cfg.hidden_sizes[l];
    model.weights.push_back(glorot_uniform(out, in, rng));
    model.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  model.head_weight = glorot_uniform(cfg.num_tasks(), cfg.hidden_sizes.back(), rng);
  model.head_bias = Eigen::VectorXd::Zero(cfg.num_tasks());
  return model;
}

ForwardTrace forward_batch(const MlpModel& model, const Eigen::MatrixXd& x_norm,
                           const Eigen::MatrixXd& personal) {
  const MlpConfig& cfg = model.cfg;
  const auto n = x_norm.rows();
  if (x_norm.cols() != cfg.landmark_dim) {
    throw ShapeMismatch("input has wrong landmark dimension");
  }
  if (cfg.injection != Injection::None) {
    if (personal.rows() != n || personal.cols() != cfg.personal_dim) {
      throw ShapeMismatch("personal matrix has wrong shape");
    }
  } else if (personal.size() != 0) {
    throw ShapeMismatch("personal features supplied but injection is none");
  }

  ForwardTrace trace;
  const int num_hidden = static_cast<int>(cfg.hidden_sizes.size());
  trace.inputs.resize(num_hidden);
  trace.pre.resize(num_hidden);
  trace.post.resize(num_hidden);

  Eigen::MatrixXd a;
  if (cfg.injection == Injection::Input) {
    a.resize(n, cfg.landmark_dim + cfg.personal_dim);
    a << x_norm, personal;
  } else {
    a = x_norm;
  }

  for (int l = 0; l < num_hidden; ++l) {
    if (cfg.injection == Injection::ThirdLayer && l == MlpModel::kInjectionLayer) {
      Eigen::MatrixXd cat(n, a.cols() + cfg.personal_dim);
      cat << a, personal;
      a = std::move(cat);
    }
    trace.inputs[l] = a;
    trace.pre[l] = (a * model.weights[l].transpose()).rowwise() + model.biases[l].transpose();
    trace.post[l] = trace.pre[l].cwiseMax(0.0);
    a = trace.post[l];
  }
  trace.outputs = (a * model.head_weight.transpose()).rowwise() + model.head_bias.transpose();
  return trace;
}

ForwardResult forward(const MlpModel& model, const Eigen::VectorXd& landmarks,
                      const std::optional<Eigen::VectorXd>& personal) {
  const MlpConfig& cfg = model.cfg;
  if (landmarks.size() != cfg.landmark_dim) throw ShapeMismatch("bad landmark vector size");
  if ((cfg.injection != Injection::None) != personal.has_value()) {
    throw ShapeMismatch("personal vector must be present iff injection is configured");
  }

  Eigen::MatrixXd x(1, cfg.landmark_dim);
  x.row(0) = ((landmarks - model.feat_mean).array() / model.feat_std.array()).matrix();
  Eigen::MatrixXd p;
  if (personal) {
    if (personal->size() != cfg.personal_dim) throw ShapeMismatch("bad personal vector size");
    p = personal->transpose();
  }
  const ForwardTrace trace = forward_batch(model, x, p);

  ForwardResult res;
  res.vas = trace.outputs(0, 0);
  if (cfg.tasks == Tasks::VasOpi) res.opi = trace.outputs(0, 1);
  for (const auto& post : trace.post) res.activations.push_back(post.row(0).transpose());
  return res;
}

double compute_loss(const MlpModel& model, const Eigen::MatrixXd& x_norm,
                    const Eigen::MatrixXd& personal, const Eigen::MatrixXd& targets) {
  const ForwardTrace trace = forward_batch(model, x_norm, personal);
  return (trace.outputs - targets).array().square().rowwise().sum().mean();
}

double loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& x_norm,
                          const Eigen::MatrixXd& personal,
                          const Eigen::MatrixXd& targets, MlpGradients& grads) {
  const MlpConfig& cfg = model.cfg;
  const auto n = x_norm.rows();
  const ForwardTrace trace = forward_batch(model, x_norm, personal);
  if (targets.rows() != n || targets.cols() != cfg.num_tasks()) {
    throw ShapeMismatch("target matrix has wrong shape");
  }

  const Eigen::MatrixXd err = trace.outputs - targets;
  const double loss = err.array().square().rowwise().sum().mean();
  const Eigen::MatrixXd d_out = (2.0 / static_cast<double>(n)) * err;

  const int num_hidden = static_cast<int>(cfg.hidden_sizes.size());
  grads.d_weights.resize(num_hidden);
  grads.d_biases.resize(num_hidden);
  grads.d_head_weight = d_out.transpose() * trace.post.back();
  grads.d_head_bias = d_out.colwise().sum().transpose();

  Eigen::MatrixXd g = d_out * model.head_weight;  // gradient w.r.t. post[last]
  for (int l = num_hidden - 1; l >= 0; --l) {
    g = ((trace.pre[l].array() > 0.0).cast<double>() * g.array()).matrix();
    grads.d_weights[l] = g.transpose() * trace.inputs[l];
    grads.d_biases[l] = g.colwise().sum().transpose();
    if (l > 0) {
      g = g * model.weights[l];
      if (cfg.injection == Injection::ThirdLayer && l == MlpModel::kInjectionLayer) {
        g = g.leftCols(cfg.hidden_sizes[l - 1]).eval();
      }
    }
  }
  return loss;
}

namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  Eigen::MatrixXd m_hw, v_hw;
  Eigen::VectorXd m_hb, v_hb;
  long step = 0;

  explicit AdamState(const MlpModel& model) {
    for (const auto& w : model.weights) {
      m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : model.biases) {
      m_b.push_back(Eigen::VectorXd::Zero(b.size()));
      v_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    m_hw = Eigen::MatrixXd::Zero(model.head_weight.rows(), model.head_weight.cols());
    v_hw = m_hw;
    m_hb = Eigen::VectorXd::Zero(model.head_bias.size());
    v_hb = m_hb;
  }

  template <typename T>
  void update(T& param, const T& grad, T& m, T& v, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }

  void apply(MlpModel& model, const MlpGradients& grads, double lr) {
    ++step;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      update(model.weights[l], grads.d_weights[l], m_w[l], v_w[l], lr);
      update(model.biases[l], grads.d_biases[l], m_b[l], v_b[l], lr);
    }
    update(model.head_weight, grads.d_head_weight, m_hw, v_hw, lr);
    update(model.head_bias, grads.d_head_bias, m_hb, v_hb, lr);
  }
};

}  // namespace

std::pair<MlpModel, std::vector<double>> train(
    MlpModel model, const std::vector<SequenceRecord>& train_sequences,
    const std::map<std::string, PersonProfile>& profiles, const MlpConfig& cfg,
    const PersonalFeatureSet& features) {
  if (train_sequences.empty()) throw EmptyTrainingSet("no training sequences");
  cfg.validate();
  model.cfg = cfg;
  if (cfg.injection != Injection::None && features.dim() != cfg.personal_dim) {
    throw ShapeMismatch("personal feature set width does not match personal_dim");
  }

  // Multi-instance labeling: every frame inherits its sequence labels.
  std::size_t total = 0;
  for (const auto& seq : train_sequences) total += seq.frames.size();
  const auto n = static_cast<Eigen::Index>(total);

  Eigen::MatrixXd x_raw(n, cfg.landmark_dim);
  Eigen::MatrixXd personal;
  if (cfg.injection != Injection::None) personal.resize(n, cfg.personal_dim);
  Eigen::MatrixXd targets(n, cfg.num_tasks());

  Eigen::Index row = 0;
  for (const auto& seq : train_sequences) {
    Eigen::VectorXd pvec;
    if (cfg.injection != Injection::None) {
      const auto it = profiles.find(seq.person_id);
      if (it == profiles.end()) throw MissingProfile("no profile for " + seq.person_id);
      pvec = encode_personal(it->second, features);
    }
    for (const auto& frame : seq.frames) {
      x_raw.row(row) = frame.landmarks.transpose();
      if (cfg.injection != Injection::None) personal.row(row) = pvec.transpose();
      targets(row, 0) = static_cast<double>(seq.vas);
      if (cfg.tasks == Tasks::VasOpi) targets(row, 1) = static_cast<double>(seq.opi);
      ++row;
    }
  }

  // Z-score statistics from the training frames; zero-variance dims keep
  // stddev 1 so they pass through unchanged.
  model.feat_mean = x_raw.colwise().mean().transpose();
  const Eigen::RowVectorXd var =
      (x_raw.rowwise() - model.feat_mean.transpose()).array().square().colwise().mean();
  model.feat_std = var.transpose().array().sqrt();
  for (Eigen::Index i = 0; i < model.feat_std.size(); ++i) {
    if (model.feat_std[i] <= 0.0) model.feat_std[i] = 1.0;
  }
  const Eigen::MatrixXd x_norm =
      ((x_raw.rowwise() - model.feat_mean.transpose()).array().rowwise() /
       model.feat_std.transpose().array())
          .matrix();

  AdamState adam(model);
  MlpGradients grads;
  Rng shuffle_rng(derive_seed(cfg.seed, "mlp-shuffle"));
  std::vector<Eigen::Index> order(total);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> loss_history;
  loss_history.reserve(cfg.epochs);
  const bool injected = cfg.injection != Injection::None;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_sq_err = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd xb(bs, cfg.landmark_dim);
      Eigen::MatrixXd pb;
      if (injected) pb.resize(bs, cfg.personal_dim);
      Eigen::MatrixXd yb(bs, cfg.num_tasks());
      for (Eigen::Index i = 0; i < bs; ++i) {
        const Eigen::Index src = order[start + i];
        xb.row(i) = x_norm.row(src);
        if (injected) pb.row(i) = personal.row(src);
        yb.row(i) = targets.row(src);
      }
      const double batch_loss = loss_and_gradients(model, xb, pb, yb, grads);
      adam.apply(model, grads, cfg.learning_rate);
      epoch_sq_err += batch_loss * static_cast<double>(bs);
    }
    loss_history.push_back(epoch_sq_err / static_cast<double>(n));
  }

  return {std::move(model), std::move(loss_history)};
}

FramePredictions predict_frames(const MlpModel& model, const SequenceRecord& sequence,
                                const PersonProfile& profile,
                                const PersonalFeatureSet& features) {
  const MlpConfig& cfg = model.cfg;
  const auto n = static_cast<Eigen::Index>(sequence.frames.size());

  Eigen::MatrixXd x_norm(n, cfg.landmark_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& lm = sequence.frames[i].landmarks;
    if (lm.size() != cfg.landmark_dim) throw ShapeMismatch("bad landmark dimension");
    x_norm.row(i) = ((lm - model.feat_mean).array() / model.feat_std.array()).transpose();
  }
  Eigen::MatrixXd personal;
  if (cfg.injection != Injection::None) {
    const Eigen::VectorXd pvec = encode_personal(profile, features);
    if (pvec.size() != cfg.personal_dim) throw ShapeMismatch("personal width mismatch");
    personal = pvec.transpose().replicate(n, 1);
  }

  const ForwardTrace trace = forward_batch(model, x_norm, personal);
  FramePredictions preds;
  preds.sequence_id = sequence.sequence_id;
  preds.vas_frames = trace.outputs.col(0);
  if (cfg.tasks == Tasks::VasOpi) preds.opi_frames = trace.outputs.col(1);
  return preds;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  const auto cols = rows == 0 ? 0 : j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace

std::string mlp_to_json(const MlpModel& model) {
  json j;
  j["config"] = {{"hidden_sizes", model.cfg.hidden_sizes},
                 {"injection", to_string(model.cfg.injection)},
                 {"tasks", to_string(model.cfg.tasks)},
                 {"epochs", model.cfg.epochs},
                 {"batch_size", model.cfg.batch_size},
                 {"learning_rate", model.cfg.learning_rate},
                 {"landmark_dim", model.cfg.landmark_dim},
                 {"personal_dim", model.cfg.personal_dim},
                 {"seed", model.cfg.seed}};
  j["normalization"] = {{"mean", vector_to_json(model.feat_mean)},
                        {"std", vector_to_json(model.feat_std)}};
  json layers = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    layers.push_back({{"weights", matrix_to_json(model.weights[l])},
                      {"bias", vector_to_json(model.biases[l])}});
  }
  j["layers"] = std::move(layers);
  j["heads"] = {{"weights", matrix_to_json(model.head_weight)},
                {"bias", vector_to_json(model.head_bias)}};
  return j.dump(2);
}

MlpModel mlp_from_json(const std::string& text) {
  const json j = json::parse(text);
  MlpModel model;
  const json& c = j.at("config");
  model.cfg.hidden_sizes = c.at("hidden_sizes").get<std::vector<int>>();
  model.cfg.injection = injection_from_string(c.at("injection").get<std::string>());
  model.cfg.tasks = tasks_from_string(c.at("tasks").get<std::string>());
  model.cfg.epochs = c.at("epochs").get<int>();
  model.cfg.batch_size = c.at("batch_size").get<int>();
  model.cfg.learning_rate = c.at("learning_rate").get<double>();
  model.cfg.landmark_dim = c.at("landmark_dim").get<int>();
  model.cfg.personal_dim = c.at("personal_dim").get<int>();
  model.cfg.seed = c.at("seed").get<std::uint64_t>();

  model.feat_mean = vector_from_json(j.at("normalization").at("mean"));
  model.feat_std = vector_from_json(j.at("normalization").at("std"));
  for (const auto& layer : j.at("layers")) {
    model.weights.push_back(matrix_from_json(layer.at("weights")));
    model.biases.push_back(vector_from_json(layer.at("bias")));
  }
  model.head_weight = matrix_from_json(j.at("heads").at("weights"));
  model.head_bias = vector_from_json(j.at("heads").at("bias"));
  return model;
}

void save_mlp(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << mlp_to_json(model);
}

MlpModel load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return mlp_from_json(ss.str());
}

}  // namespace lift
