#ifndef LIFT_PIPELINE_HPP_
#define LIFT_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lift/dataset.hpp"
#include "lift/gp.hpp"
#include "lift/mlp.hpp"
#include "lift/synth.hpp"

namespace lift {

enum class GpInput { Vas, VasOpi };

std::string to_string(GpInput g);
GpInput gp_input_from_string(const std::string& s);

struct ExperimentConfig {
  std::optional<std::string> dataset_path;
  std::optional<SynthConfig> synth;  // used when no dataset_path
  Injection s1_personal = Injection::ThirdLayer;
  Tasks s1_labels = Tasks::VasOpi;
  GpInput s2_input = GpInput::Vas;
  int folds = 5;
  std::uint64_t seed = 0;
  MlpConfig mlp;  // injection/tasks/personal_dim/seed set per run
  GpOptConfig gp;
  PersonalFeatureSet personal_features;

  void validate() const;
};

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

struct SequenceResult {
  std::string sequence_id;
  std::string person_id;
  double y_true = 0.0;
  double y_mean = 0.0;  // GP predictive mean, clamped to [0,10]
  double y_std = 0.0;   // GP predictive standard deviation
  double nnmv = 0.0;    // mean-voting baseline, clamped to [0,10]
};

struct SubjectResult {
  std::string person_id;
  double mae = 0.0;
  double nnmv_mae = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  double wall_clock_sec = 0.0;
  double mae = 0.0;
  double icc = 0.0;
  double nnmv_mae = 0.0;
  double nnmv_icc = 0.0;
  std::vector<SubjectResult> per_subject;
  std::vector<SequenceResult> per_sequence;  // one row per sequence
  std::vector<std::string> ard_feature_names;
  Eigen::VectorXd ard_relevance;  // mean of -ln(l) across folds
  std::string frame_pred_hash;    // stage-1 outputs shared by GP and NN-MV
};

std::string report_to_json(const ExperimentReport& report);
void save_report(const ExperimentReport& report, const std::string& dir,
                 const std::string& suffix = "");

// Optionally collects the per-fold stage-1 models (for later attribution).
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                                std::vector<MlpModel>* fold_models = nullptr);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// The nine (personal x labels x gp-input) settings with shared data,
// folds and seed.
std::vector<ExperimentConfig> matrix_settings(const ExperimentConfig& base);
std::vector<ExperimentReport> run_matrix(const ExperimentConfig& base);
void write_matrix_summary_csv(const std::vector<ExperimentReport>& reports,
                              const std::string& path);

enum class AblationTarget { Complexion, Age, Gender, OpiLabel };

AblationTarget ablation_target_from_string(const std::string& s);

// MAE with the feature removed minus MAE with it present, identical seeds.
double ablate_personal_feature(const Dataset& dataset, const ExperimentConfig& base_cfg,
                               AblationTarget target);

// Resolves cfg.dataset_path / cfg.synth into a dataset.
Dataset resolve_dataset(const ExperimentConfig& cfg);

int effective_thread_count(int folds);  // honors LIFT_THREADS

}  // namespace lift

#endif  // LIFT_PIPELINE_HPP_
