#include "lift/deeplift.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lift/errors.hpp"

namespace lift {

using json = nlohmann::json;

namespace {
constexpr double kDeltaThreshold = 1e-12;
}

std::string to_string(Head h) { return h == Head::Vas ? "vas" : "opi"; }

Head head_from_string(const std::string& s) {
  if (s == "vas") return Head::Vas;
  if (s == "opi") return Head::Opi;
  throw BadConfig("unknown head: " + s);
}

namespace {

int head_index(const MlpModel& model, Head head) {
  if (head == Head::Opi && model.cfg.tasks != Tasks::VasOpi) {
    throw IncompatibleConfig("model has no OPI head");
  }
  return head == Head::Vas ? 0 : 1;
}

ForwardTrace trace_normalized(const MlpModel& model, const Eigen::VectorXd& landmarks_norm,
                              const Eigen::VectorXd& personal) {
  Eigen::MatrixXd x(1, landmarks_norm.size());
  x.row(0) = landmarks_norm.transpose();
  Eigen::MatrixXd p;
  if (model.cfg.injection != Injection::None) p = personal.transpose();
  return forward_batch(model, x, p);
}

}  // namespace

double reference_output(const MlpModel& model, Head head) {
  const int h = head_index(model, head);
  const Eigen::VectorXd zero_lm = Eigen::VectorXd::Zero(model.cfg.landmark_dim);
  const Eigen::VectorXd zero_p = Eigen::VectorXd::Zero(model.cfg.personal_dim);
  return trace_normalized(model, zero_lm, zero_p).outputs(0, h);
}

ContributionVector contributions(const MlpModel& model, const Eigen::VectorXd& input,
                                 Head head) {
  const MlpConfig& cfg = model.cfg;
  const int h = head_index(model, head);
  const bool injected = cfg.injection != Injection::None;
  const int expected = cfg.landmark_dim + (injected ? cfg.personal_dim : 0);
  if (input.size() != expected) {
    throw ShapeMismatch("contributions input must have " + std::to_string(expected) +
                        " entries");
  }

  const Eigen::VectorXd landmarks = input.head(cfg.landmark_dim);
  const Eigen::VectorXd personal =
      injected ? Eigen::VectorXd(input.tail(cfg.personal_dim)) : Eigen::VectorXd();

  const ForwardTrace tx = trace_normalized(model, landmarks, personal);
  const ForwardTrace t0 = trace_normalized(
      model, Eigen::VectorXd::Zero(cfg.landmark_dim),
      injected ? Eigen::VectorXd::Zero(cfg.personal_dim).eval() : Eigen::VectorXd());

  const int num_hidden = static_cast<int>(cfg.hidden_sizes.size());

  // Multiplier from the last hidden layer to the chosen head is the head's
  // weight row; walk backwards applying the Rescale rule at each ReLU.
  Eigen::VectorXd m = model.head_weight.row(h).transpose();
  Eigen::VectorXd personal_mult;

  for (int l = num_hidden - 1; l >= 0; --l) {
    const Eigen::VectorXd d_pre = (tx.pre[l] - t0.pre[l]).row(0).transpose();
    const Eigen::VectorXd d_post = (tx.post[l] - t0.post[l]).row(0).transpose();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m[i] = std::abs(d_pre[i]) > kDeltaThreshold ? m[i] * d_post[i] / d_pre[i] : 0.0;
    }
    m = (model.weights[l].transpose() * m).eval();
    if (cfg.injection == Injection::ThirdLayer && l == MlpModel::kInjectionLayer) {
      personal_mult = m.tail(cfg.personal_dim);
      m = m.head(cfg.hidden_sizes[l - 1]).eval();
    }
  }

  ContributionVector cv;
  cv.scores.resize(expected);
  // Reference input is the zero vector, so delta-input equals the input.
  if (cfg.injection == Injection::Input) {
    cv.scores = m.cwiseProduct(input);
  } else {
    cv.scores.head(cfg.landmark_dim) = m.cwiseProduct(landmarks);
    if (cfg.injection == Injection::ThirdLayer) {
      cv.scores.tail(cfg.personal_dim) = personal_mult.cwiseProduct(personal);
    }
  }
  cv.delta_output = tx.outputs(0, h) - t0.outputs(0, h);
  return cv;
}

AttributionReport attribute_dataset(const MlpModel& model, const Dataset& dataset,
                                    Head head, const PersonalFeatureSet& features) {
  if (dataset.sequences.empty()) throw EmptyDataset("no sequences to attribute");
  const MlpConfig& cfg = model.cfg;
  const bool injected = cfg.injection != Injection::None;
  if (injected && features.dim() != cfg.personal_dim) {
    throw ShapeMismatch("personal feature set width does not match model");
  }

  AttributionReport report;
  report.head = head;
  report.person_ids = dataset.person_ids();
  const auto num_persons = static_cast<Eigen::Index>(report.person_ids.size());
  report.per_person.resize(num_persons, kNumLandmarks);

  for (Eigen::Index pi = 0; pi < num_persons; ++pi) {
    const std::string& pid = report.person_ids[pi];

    std::vector<const FrameSample*> frames;
    for (const auto& seq : dataset.sequences) {
      if (seq.person_id != pid) continue;
      for (const auto& f : seq.frames) frames.push_back(&f);
    }

    // Per-person Z-scores over that person's frames.
    Eigen::MatrixXd x(frames.size(), cfg.landmark_dim);
    for (std::size_t i = 0; i < frames.size(); ++i) x.row(i) = frames[i]->landmarks.transpose();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::RowVectorXd stddev =
        (x.rowwise() - mean).array().square().colwise().mean().sqrt().matrix();
    for (Eigen::Index c = 0; c < stddev.size(); ++c) {
      if (stddev[c] <= 0.0) stddev[c] = 1.0;
    }

    Eigen::VectorXd pvec;
    if (injected) pvec = encode_personal(dataset.profiles.at(pid), features);

    Eigen::VectorXd landmark_score = Eigen::VectorXd::Zero(kNumLandmarks);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      Eigen::VectorXd in(cfg.landmark_dim + (injected ? cfg.personal_dim : 0));
      in.head(cfg.landmark_dim) =
          ((x.row(i) - mean).array() / stddev.array()).transpose();
      if (injected) in.tail(cfg.personal_dim) = pvec;
      const ContributionVector cv = contributions(model, in, head);
      for (int j = 0; j < kNumLandmarks; ++j) {
        landmark_score[j] += std::abs(cv.scores[2 * j]) + std::abs(cv.scores[2 * j + 1]);
      }
    }
    landmark_score /= static_cast<double>(frames.size());
    const double total = landmark_score.sum();
    if (total > 0.0) landmark_score *= 100.0 / total;
    report.per_person.row(pi) = landmark_score.transpose();
  }

  report.mean_score = report.per_person.colwise().mean().transpose();
  report.std_score =
      (report.per_person.rowwise() - report.mean_score.transpose())
          .array()
          .square()
          .colwise()
          .mean()
          .sqrt()
          .matrix()
          .transpose();
  return report;
}

std::string attribution_to_json(const AttributionReport& report) {
  json j;
  j["head"] = to_string(report.head);
  j["person_ids"] = report.person_ids;
  j["mean_score"] = std::vector<double>(report.mean_score.data(),
                                        report.mean_score.data() + report.mean_score.size());
  j["std_score"] = std::vector<double>(report.std_score.data(),
                                       report.std_score.data() + report.std_score.size());
  json pp = json::array();
  for (Eigen::Index i = 0; i < report.per_person.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < report.per_person.cols(); ++c) {
      row.push_back(report.per_person(i, c));
    }
    pp.push_back(std::move(row));
  }
  j["per_person"] = std::move(pp);
  return j.dump(2);
}

void write_attribution_csv(const AttributionReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "landmark_id,mean_score,std_score";
  for (const auto& pid : report.person_ids) out << ',' << pid;
  out << '\n';
  for (int j = 0; j < kNumLandmarks; ++j) {
    out << j << ',' << report.mean_score[j] << ',' << report.std_score[j];
    for (Eigen::Index p = 0; p < report.per_person.rows(); ++p) {
      out << ',' << report.per_person(p, j);
    }
    out << '\n';
  }
}

void save_attribution(const AttributionReport& report, const std::string& json_path) {
  std::ofstream out(json_path);
  if (!out) throw ValidationError("cannot write " + json_path);
  out << attribution_to_json(report);
}

}  // namespace lift
