#ifndef LIFT_DEEPLIFT_HPP_
#define LIFT_DEEPLIFT_HPP_

#include <Eigen/Core>
#include <string>
#include <vector>

#include "lift/dataset.hpp"
#include "lift/mlp.hpp"

namespace lift {

enum class Head { Vas, Opi };

std::string to_string(Head h);
Head head_from_string(const std::string& s);

struct ContributionVector {
  Eigen::VectorXd scores;     // one per external input dimension
  double delta_output = 0.0;  // attributed head output minus its reference
};

struct AttributionReport {
  Head head = Head::Vas;
  std::vector<std::string> person_ids;
  Eigen::VectorXd mean_score;   // per landmark, mean over persons
  Eigen::VectorXd std_score;    // per landmark, std over persons
  Eigen::MatrixXd per_person;   // persons x landmarks, each row sums to 100
};

// Head output at the zero reference input (normalized space; personal
// features zeroed as well).
double reference_output(const MlpModel& model, Head head);

// DeepLIFT with the Rescale rule for ReLU. `input` lives in the model's
// normalized input space and, when the model injects personal features,
// carries them in its trailing personal_dim entries. Satisfies
// summation-to-delta: sum(scores) == delta_output.
ContributionVector contributions(const MlpModel& model, const Eigen::VectorXd& input,
                                 Head head);

// Per person: Z-score that person's frames, attribute each frame, take
// absolute scores, fold (x,y) per landmark, average over frames, then
// normalize each person's 66 scores to sum to 100.
AttributionReport attribute_dataset(const MlpModel& model, const Dataset& dataset,
                                    Head head, const PersonalFeatureSet& features = {});

std::string attribution_to_json(const AttributionReport& report);
void write_attribution_csv(const AttributionReport& report, const std::string& path);
void save_attribution(const AttributionReport& report, const std::string& json_path);

}  // namespace lift

#endif  // LIFT_DEEPLIFT_HPP_
