#ifndef LIFT_DATASET_HPP_
#define LIFT_DATASET_HPP_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lift {

inline constexpr int kNumLandmarks = 66;
inline constexpr int kLandmarkDim = 2 * kNumLandmarks;  // concatenated (x,y)

enum class Complexion { PaleFair, FairOlive, OliveDark };
enum class AgeBin { Young, MiddleAged, Elderly };
enum class Gender { Male, Female };

std::string to_string(Complexion c);
std::string to_string(AgeBin a);
std::string to_string(Gender g);
Complexion complexion_from_string(const std::string& s);
AgeBin age_bin_from_string(const std::string& s);
Gender gender_from_string(const std::string& s);

// AU intensity vector in the order AU4, AU6, AU7, AU9, AU10, AU43.
using AuIntensities = std::array<int, 6>;

struct FrameSample {
  std::string person_id;
  std::string sequence_id;
  int frame_index = 0;
  Eigen::VectorXd landmarks;  // 132 values: x0,y0,...,x65,y65 in pixels
  std::optional<AuIntensities> au_intensities;
};

struct SequenceRecord {
  std::string sequence_id;
  std::string person_id;
  std::vector<FrameSample> frames;
  int vas = 0;  // 0..10
  int opi = 0;  // 0..5
};

struct PersonProfile {
  std::string person_id;
  Complexion complexion = Complexion::PaleFair;
  AgeBin age_bin = AgeBin::Young;
  Gender gender = Gender::Male;
};

struct Dataset {
  std::vector<SequenceRecord> sequences;
  std::map<std::string, PersonProfile> profiles;

  // Person ids in first-appearance order over `sequences`.
  std::vector<std::string> person_ids() const;
  std::size_t frame_count() const;
  // Checks every structural invariant; throws on the first violation.
  void validate() const;
};

struct FoldPlan {
  std::vector<std::vector<std::string>> folds;  // disjoint person-id sets
  std::uint64_t seed = 0;
};

// Which of the three categorical groups enter the personal-feature vector.
// Dropping groups supports the ablation experiments.
struct PersonalFeatureSet {
  bool complexion = true;
  bool age = true;
  bool gender = true;
  int dim() const { return (complexion ? 3 : 0) + (age ? 3 : 0) + (gender ? 2 : 0); }
};

// One-hot encoding: complexion (3) ++ age_bin (3) ++ gender (2).
Eigen::VectorXd encode_personal(const PersonProfile& profile);
Eigen::VectorXd encode_personal(const PersonProfile& profile,
                                const PersonalFeatureSet& features);

Dataset load_dataset(const std::string& dir);
void save_dataset(const Dataset& ds, const std::string& dir);

// Seeded shuffle then partition; remainder persons go one each to the
// earliest folds.
FoldPlan split_folds(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace lift

#endif  // LIFT_DATASET_HPP_
