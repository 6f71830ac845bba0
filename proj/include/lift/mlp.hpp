#ifndef LIFT_MLP_HPP_
#define LIFT_MLP_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lift/dataset.hpp"

namespace lift {

enum class Injection { None, Input, ThirdLayer };
enum class Tasks { Vas, VasOpi };

std::string to_string(Injection inj);
std::string to_string(Tasks t);
Injection injection_from_string(const std::string& s);
Tasks tasks_from_string(const std::string& s);

struct MlpConfig {
  std::vector<int> hidden_sizes{300, 100, 10, 100};
  Injection injection = Injection::None;
  Tasks tasks = Tasks::Vas;
  int epochs = 100;
  int batch_size = 300;
  double learning_rate = 1e-3;
  int landmark_dim = kLandmarkDim;
  int personal_dim = 8;  // width of the injected personal vector
  std::uint64_t seed = 0;

  int num_tasks() const { return tasks == Tasks::VasOpi ? 2 : 1; }
  void validate() const;
};

struct MlpModel {
  MlpConfig cfg;
  // Per-dimension Z-score statistics fitted on training frames. Personal
  // features are already in {0,1} and are not normalized.
  Eigen::VectorXd feat_mean;
  Eigen::VectorXd feat_std;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: out x in
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd head_weight;  // tasks x last hidden width
  Eigen::VectorXd head_bias;

  int input_dim() const {
    return cfg.landmark_dim + (cfg.injection == Injection::Input ? cfg.personal_dim : 0);
  }
  // Index of the hidden layer whose input gets the mid-network concat.
  static constexpr int kInjectionLayer = 3;
};

struct ForwardResult {
  double vas = 0.0;
  std::optional<double> opi;
  std::vector<Eigen::VectorXd> activations;  // post-activation per hidden layer
};

struct FramePredictions {
  std::string sequence_id;
  Eigen::VectorXd vas_frames;
  std::optional<Eigen::VectorXd> opi_frames;
};

// Batched forward bookkeeping, reused by training and attribution.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> inputs;  // what each hidden layer consumed
  std::vector<Eigen::MatrixXd> pre;     // pre-activation
  std::vector<Eigen::MatrixXd> post;    // post-ReLU
  Eigen::MatrixXd outputs;              // n x tasks
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
  Eigen::MatrixXd d_head_weight;
  Eigen::VectorXd d_head_bias;
};

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
MlpModel init_model(const MlpConfig& cfg);

// Single-frame pass on raw landmarks; normalizes internally.
ForwardResult forward(const MlpModel& model, const Eigen::VectorXd& landmarks,
                      const std::optional<Eigen::VectorXd>& personal);

// Batched pass in normalized input space. X is n x landmark_dim, personal is
// n x personal_dim (ignored when injection is None).
ForwardTrace forward_batch(const MlpModel& model, const Eigen::MatrixXd& x_norm,
                           const Eigen::MatrixXd& personal);

// MSE summed over tasks, averaged over frames.
double compute_loss(const MlpModel& model, const Eigen::MatrixXd& x_norm,
                    const Eigen::MatrixXd& personal, const Eigen::MatrixXd& targets);
double loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& x_norm,
                          const Eigen::MatrixXd& personal,
                          const Eigen::MatrixXd& targets, MlpGradients& grads);

// Frame-level training with sequence labels broadcast to frames. Adam,
// shuffled mini-batches, fixed epoch count; fully deterministic per seed.
std::pair<MlpModel, std::vector<double>> train(
    MlpModel model, const std::vector<SequenceRecord>& train_sequences,
    const std::map<std::string, PersonProfile>& profiles, const MlpConfig& cfg,
    const PersonalFeatureSet& features = {});

FramePredictions predict_frames(const MlpModel& model, const SequenceRecord& sequence,
                                const PersonProfile& profile,
                                const PersonalFeatureSet& features = {});

std::string mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const std::string& text);
void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

}  // namespace lift

#endif  // LIFT_MLP_HPP_
