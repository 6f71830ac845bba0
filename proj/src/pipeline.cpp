#include "lift/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <semaphore>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lift/errors.hpp"
#include "lift/metrics.hpp"
#include "lift/rng.hpp"
#include "lift/stats.hpp"

namespace lift {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(GpInput g) { return g == GpInput::VasOpi ? "vas+opi" : "vas"; }

GpInput gp_input_from_string(const std::string& s) {
  if (s == "vas") return GpInput::Vas;
  if (s == "vas+opi") return GpInput::VasOpi;
  throw BadConfig("unknown gp input: " + s);
}

AblationTarget ablation_target_from_string(const std::string& s) {
  if (s == "complexion") return AblationTarget::Complexion;
  if (s == "age") return AblationTarget::Age;
  if (s == "gender") return AblationTarget::Gender;
  if (s == "opi-label") return AblationTarget::OpiLabel;
  throw BadConfig("unknown ablation target: " + s);
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw BadConfig("folds must be at least 2");
  if (s2_input == GpInput::VasOpi && s1_labels != Tasks::VasOpi) {
    throw ConfigConflict("s2_input=vas+opi requires s1_labels=vas+opi");
  }
  if (s1_personal != Injection::None && personal_features.dim() == 0) {
    throw IncompatibleConfig("injection configured but no personal features enabled");
  }
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_update(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_update(std::uint64_t& h, const Eigen::VectorXd& v) {
  fnv_update(h, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double clamp_vas(double v) { return std::clamp(v, 0.0, 10.0); }

std::vector<std::string> gp_feature_names(GpInput input) {
  std::vector<std::string> names;
  for (const auto& s : stat_names()) names.push_back("vas_" + s);
  if (input == GpInput::VasOpi) {
    for (const auto& s : stat_names()) names.push_back("opi_" + s);
  }
  return names;
}

struct FoldOutput {
  std::vector<std::size_t> test_indices;  // indices into dataset.sequences
  std::vector<double> y_mean, y_std, nnmv;
  Eigen::VectorXd ard;
  std::uint64_t frame_hash = kFnvOffset;
  MlpModel model;
};

FoldOutput run_fold(const ExperimentConfig& cfg, const Dataset& ds, const FoldPlan& plan,
                    int fold) {
  const std::set<std::string> test_persons(plan.folds[fold].begin(), plan.folds[fold].end());

  std::vector<SequenceRecord> train_seqs;
  std::vector<std::size_t> test_indices;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    if (test_persons.count(ds.sequences[i].person_id)) {
      test_indices.push_back(i);
    } else {
      train_seqs.push_back(ds.sequences[i]);
    }
  }
  if (train_seqs.empty()) throw EmptyTrainingSet("fold has no training sequences");

  MlpConfig mlp_cfg = cfg.mlp;
  mlp_cfg.injection = cfg.s1_personal;
  mlp_cfg.tasks = cfg.s1_labels;
  mlp_cfg.personal_dim = cfg.personal_features.dim();
  mlp_cfg.seed = derive_seed(cfg.seed, "mlp", static_cast<std::uint64_t>(fold));

  FoldOutput out;
  auto [model, history] = train(init_model(mlp_cfg), train_seqs, ds.profiles, mlp_cfg,
                                cfg.personal_features);
  out.model = model;
  out.test_indices = std::move(test_indices);

  const int stat_dim = cfg.s2_input == GpInput::VasOpi ? 2 * kNumStats : kNumStats;
  const auto make_stats = [&](const FramePredictions& preds) {
    Eigen::VectorXd s(stat_dim);
    s.head(kNumStats) = compute_stats(preds.vas_frames);
    if (cfg.s2_input == GpInput::VasOpi) s.tail(kNumStats) = compute_stats(*preds.opi_frames);
    return s;
  };

  // Stage-1 predictions drive both the GP features and the mean-voting
  // baseline; the hash witnesses that they are the same tensor.
  Eigen::MatrixXd s_train(static_cast<Eigen::Index>(train_seqs.size()), stat_dim);
  Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_seqs.size()));
  for (std::size_t i = 0; i < train_seqs.size(); ++i) {
    const auto& seq = train_seqs[i];
    const FramePredictions preds =
        predict_frames(model, seq, ds.profiles.at(seq.person_id), cfg.personal_features);
    fnv_update(out.frame_hash, preds.vas_frames);
    if (preds.opi_frames) fnv_update(out.frame_hash, *preds.opi_frames);
    s_train.row(static_cast<Eigen::Index>(i)) = make_stats(preds).transpose();
    y_train[static_cast<Eigen::Index>(i)] = seq.vas;
  }

  std::vector<Eigen::VectorXd> s_test;
  for (const std::size_t idx : out.test_indices) {
    const auto& seq = ds.sequences[idx];
    const FramePredictions preds =
        predict_frames(model, seq, ds.profiles.at(seq.person_id), cfg.personal_features);
    fnv_update(out.frame_hash, preds.vas_frames);
    if (preds.opi_frames) fnv_update(out.frame_hash, *preds.opi_frames);
    s_test.push_back(make_stats(preds));
    out.nnmv.push_back(clamp_vas(preds.vas_frames.mean()));
  }

  GpOptConfig gp_cfg = cfg.gp;
  gp_cfg.seed = derive_seed(cfg.seed, "gp", static_cast<std::uint64_t>(fold));
  const GpModel gp = fit_gp(s_train, y_train, gp_cfg, gp_feature_names(cfg.s2_input));

  for (const auto& s : s_test) {
    const auto [mean, var] = predict(gp, s);
    out.y_mean.push_back(clamp_vas(mean));
    out.y_std.push_back(std::sqrt(var));
  }
  out.ard = relevance(gp);
  return out;
}

}  // namespace

int effective_thread_count(int folds) {
  int threads = 0;
  if (const char* env = std::getenv("LIFT_THREADS")) {
    threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  return std::clamp(threads, 1, std::max(1, folds));
}

Dataset resolve_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_path) return load_dataset(*cfg.dataset_path);
  if (cfg.synth) return generate_synthetic(*cfg.synth);
  SynthConfig synth;
  synth.seed = cfg.seed;
  return generate_synthetic(synth);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const Dataset ds = resolve_dataset(cfg);
  return run_experiment(cfg, ds);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                                std::vector<MlpModel>* fold_models) {
  cfg.validate();
  dataset.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const FoldPlan plan = split_folds(dataset, cfg.folds, cfg.seed);

  std::vector<FoldOutput> outputs(cfg.folds);
  const int threads = effective_thread_count(cfg.folds);
  if (threads <= 1) {
    for (int f = 0; f < cfg.folds; ++f) outputs[f] = run_fold(cfg, dataset, plan, f);
  } else {
    // Folds are independent; a semaphore caps concurrency and fold-indexed
    // assembly keeps the result order-independent.
    std::counting_semaphore<64> sem(threads);
    std::vector<std::future<FoldOutput>> futures;
    for (int f = 0; f < cfg.folds; ++f) {
      futures.push_back(std::async(std::launch::async, [&, f] {
        sem.acquire();
        try {
          FoldOutput out = run_fold(cfg, dataset, plan, f);
          sem.release();
          return out;
        } catch (...) {
          sem.release();
          throw;
        }
      }));
    }
    for (int f = 0; f < cfg.folds; ++f) outputs[f] = futures[f].get();
  }

  ExperimentReport report;
  report.config = cfg;
  report.seed = cfg.seed;

  // Each sequence is held out exactly once; rows are kept in dataset order.
  std::vector<SequenceResult> rows(dataset.sequences.size());
  std::vector<bool> covered(dataset.sequences.size(), false);
  std::uint64_t combined_hash = kFnvOffset;
  Eigen::VectorXd ard_sum;
  for (int f = 0; f < cfg.folds; ++f) {
    const FoldOutput& out = outputs[f];
    for (std::size_t i = 0; i < out.test_indices.size(); ++i) {
      const std::size_t idx = out.test_indices[i];
      if (covered[idx]) throw ComputeError("sequence covered twice across folds");
      covered[idx] = true;
      const auto& seq = dataset.sequences[idx];
      rows[idx] = SequenceResult{seq.sequence_id, seq.person_id,
                                 static_cast<double>(seq.vas), out.y_mean[i], out.y_std[i],
                                 out.nnmv[i]};
    }
    fnv_update(combined_hash, &out.frame_hash, sizeof(out.frame_hash));
    if (ard_sum.size() == 0) {
      ard_sum = out.ard;
    } else {
      ard_sum += out.ard;
    }
    if (fold_models != nullptr) fold_models->push_back(out.model);
  }
  for (const bool c : covered) {
    if (!c) throw ComputeError("sequence missing from held-out predictions");
  }
  report.per_sequence = std::move(rows);

  const auto n = static_cast<Eigen::Index>(report.per_sequence.size());
  Eigen::VectorXd y_true(n), y_mean(n), y_nnmv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y_true[i] = report.per_sequence[i].y_true;
    y_mean[i] = report.per_sequence[i].y_mean;
    y_nnmv[i] = report.per_sequence[i].nnmv;
  }
  report.mae = mae(y_true, y_mean);
  report.icc = icc31(y_true, y_mean);
  report.nnmv_mae = mae(y_true, y_nnmv);
  report.nnmv_icc = icc31(y_true, y_nnmv);

  for (const auto& pid : dataset.person_ids()) {
    std::vector<double> t, m, b;
    for (const auto& row : report.per_sequence) {
      if (row.person_id != pid) continue;
      t.push_back(row.y_true);
      m.push_back(row.y_mean);
      b.push_back(row.nnmv);
    }
    const auto sz = static_cast<Eigen::Index>(t.size());
    const Eigen::Map<Eigen::VectorXd> vt(t.data(), sz), vm(m.data(), sz), vb(b.data(), sz);
    report.per_subject.push_back(SubjectResult{pid, mae(vt, vm), mae(vt, vb)});
  }

  report.ard_feature_names = gp_feature_names(cfg.s2_input);
  report.ard_relevance = ard_sum / static_cast<double>(cfg.folds);

  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(combined_hash));
  report.frame_pred_hash = hex;

  report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::vector<ExperimentConfig> matrix_settings(const ExperimentConfig& base) {
  static const Injection personals[] = {Injection::None, Injection::ThirdLayer,
                                        Injection::Input};
  static const std::pair<Tasks, GpInput> rows[] = {
      {Tasks::VasOpi, GpInput::VasOpi}, {Tasks::VasOpi, GpInput::Vas},
      {Tasks::Vas, GpInput::Vas}};
  std::vector<ExperimentConfig> settings;
  for (const Injection p : personals) {
    for (const auto& [labels, gp_input] : rows) {
      ExperimentConfig cfg = base;
      cfg.s1_personal = p;
      cfg.s1_labels = labels;
      cfg.s2_input = gp_input;
      settings.push_back(std::move(cfg));
    }
  }
  return settings;
}

std::vector<ExperimentReport> run_matrix(const ExperimentConfig& base) {
  const Dataset ds = resolve_dataset(base);
  std::vector<ExperimentReport> reports;
  for (const auto& cfg : matrix_settings(base)) {
    reports.push_back(run_experiment(cfg, ds));
  }
  return reports;
}

void write_matrix_summary_csv(const std::vector<ExperimentReport>& reports,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "s1_personal,s1_nn_labels,s2_gp_input,two_stage,nn_mv,rnn,hcrf\n";
  for (const auto& r : reports) {
    out << to_string(r.config.s1_personal) << ',' << to_string(r.config.s1_labels) << ','
        << to_string(r.config.s2_input) << ',' << fmt2(r.mae) << " (" << fmt2(r.icc) << "),"
        << fmt2(r.nnmv_mae) << " (" << fmt2(r.nnmv_icc) << "),n/a,n/a\n";
  }
}

double ablate_personal_feature(const Dataset& dataset, const ExperimentConfig& base_cfg,
                               AblationTarget target) {
  ExperimentConfig with_cfg = base_cfg;
  ExperimentConfig without_cfg = base_cfg;

  switch (target) {
    case AblationTarget::Complexion:
    case AblationTarget::Age:
    case AblationTarget::Gender: {
      if (base_cfg.s1_personal == Injection::None) {
        throw IncompatibleConfig("personal-feature ablation requires injection");
      }
      PersonalFeatureSet& f = without_cfg.personal_features;
      if (target == AblationTarget::Complexion) f.complexion = false;
      if (target == AblationTarget::Age) f.age = false;
      if (target == AblationTarget::Gender) f.gender = false;
      if (f.dim() == 0) {
        throw IncompatibleConfig("cannot ablate the only enabled personal feature");
      }
      break;
    }
    case AblationTarget::OpiLabel: {
      if (base_cfg.s1_labels != Tasks::VasOpi) {
        throw IncompatibleConfig("OPI-label ablation requires s1_labels=vas+opi");
      }
      if (base_cfg.s2_input == GpInput::VasOpi) {
        throw IncompatibleConfig("OPI-label ablation requires s2_input=vas");
      }
      without_cfg.s1_labels = Tasks::Vas;
      break;
    }
  }

  const double mae_with = run_experiment(with_cfg, dataset).mae;
  const double mae_without = run_experiment(without_cfg, dataset).mae;
  return mae_without - mae_with;
}

namespace {

json synth_to_json(const SynthConfig& s) {
  return {{"persons", s.persons},
          {"sequences_per_person", s.sequences_per_person},
          {"frames_min", s.frames_min},
          {"frames_max", s.frames_max},
          {"landmark_noise", s.landmark_noise},
          {"motion_noise", s.motion_noise},
          {"observer_noise", s.observer_noise},
          {"base_jitter", s.base_jitter},
          {"expressiveness_jitter", s.expressiveness_jitter},
          {"active_fraction_min", s.active_fraction_min},
          {"active_fraction_max", s.active_fraction_max},
          {"seed", s.seed}};
}

SynthConfig synth_from_json(const json& j) {
  SynthConfig s;
  s.persons = j.value("persons", s.persons);
  s.sequences_per_person = j.value("sequences_per_person", s.sequences_per_person);
  s.frames_min = j.value("frames_min", s.frames_min);
  s.frames_max = j.value("frames_max", s.frames_max);
  s.landmark_noise = j.value("landmark_noise", s.landmark_noise);
  s.motion_noise = j.value("motion_noise", s.motion_noise);
  s.observer_noise = j.value("observer_noise", s.observer_noise);
  s.base_jitter = j.value("base_jitter", s.base_jitter);
  s.expressiveness_jitter = j.value("expressiveness_jitter", s.expressiveness_jitter);
  s.active_fraction_min = j.value("active_fraction_min", s.active_fraction_min);
  s.active_fraction_max = j.value("active_fraction_max", s.active_fraction_max);
  s.seed = j.value("seed", s.seed);
  return s;
}

json features_to_json(const PersonalFeatureSet& f) {
  json arr = json::array();
  if (f.complexion) arr.push_back("complexion");
  if (f.age) arr.push_back("age");
  if (f.gender) arr.push_back("gender");
  return arr;
}

PersonalFeatureSet features_from_json(const json& arr) {
  PersonalFeatureSet f{false, false, false};
  for (const auto& item : arr) {
    const auto s = item.get<std::string>();
    if (s == "complexion") f.complexion = true;
    else if (s == "age") f.age = true;
    else if (s == "gender") f.gender = true;
    else throw BadConfig("unknown personal feature: " + s);
  }
  return f;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.dataset_path) j["dataset"] = {{"path", *cfg.dataset_path}};
  if (cfg.synth) j["synth"] = synth_to_json(*cfg.synth);
  j["s1_personal"] = to_string(cfg.s1_personal);
  j["s1_labels"] = to_string(cfg.s1_labels);
  j["s2_input"] = to_string(cfg.s2_input);
  j["folds"] = cfg.folds;
  j["seed"] = cfg.seed;
  j["mlp"] = {{"hidden_sizes", cfg.mlp.hidden_sizes},
              {"epochs", cfg.mlp.epochs},
              {"batch_size", cfg.mlp.batch_size},
              {"learning_rate", cfg.mlp.learning_rate}};
  j["gp"] = {{"iterations", cfg.gp.iterations},
             {"learning_rate", cfg.gp.learning_rate},
             {"restarts", cfg.gp.restarts},
             {"restart_spread", cfg.gp.restart_spread}};
  j["personal_features"] = features_to_json(cfg.personal_features);
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw BadConfig(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset_path = j.at("dataset").at("path").get<std::string>();
  if (j.contains("synth")) cfg.synth = synth_from_json(j.at("synth"));
  if (j.contains("s1_personal")) {
    cfg.s1_personal = injection_from_string(j.at("s1_personal").get<std::string>());
  }
  if (j.contains("s1_labels")) cfg.s1_labels = tasks_from_string(j.at("s1_labels").get<std::string>());
  if (j.contains("s2_input")) cfg.s2_input = gp_input_from_string(j.at("s2_input").get<std::string>());
  cfg.folds = j.value("folds", cfg.folds);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("mlp")) {
    const json& m = j.at("mlp");
    if (m.contains("hidden_sizes")) cfg.mlp.hidden_sizes = m.at("hidden_sizes").get<std::vector<int>>();
    cfg.mlp.epochs = m.value("epochs", cfg.mlp.epochs);
    cfg.mlp.batch_size = m.value("batch_size", cfg.mlp.batch_size);
    cfg.mlp.learning_rate = m.value("learning_rate", cfg.mlp.learning_rate);
  }
  if (j.contains("gp")) {
    const json& g = j.at("gp");
    cfg.gp.iterations = g.value("iterations", cfg.gp.iterations);
    cfg.gp.learning_rate = g.value("learning_rate", cfg.gp.learning_rate);
    cfg.gp.restarts = g.value("restarts", cfg.gp.restarts);
    cfg.gp.restart_spread = g.value("restart_spread", cfg.gp.restart_spread);
  }
  if (j.contains("personal_features")) {
    cfg.personal_features = features_from_json(j.at("personal_features"));
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_config_from_json(ss.str());
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["config"] = json::parse(experiment_config_to_json(report.config));
  j["seed"] = report.seed;
  j["wall_clock_sec"] = report.wall_clock_sec;
  j["mae"] = report.mae;
  j["icc"] = report.icc;
  j["nnmv"] = {{"mae", report.nnmv_mae}, {"icc", report.nnmv_icc}};
  json subj = json::array();
  for (const auto& s : report.per_subject) {
    subj.push_back({{"person_id", s.person_id}, {"mae", s.mae}, {"nnmv_mae", s.nnmv_mae}});
  }
  j["per_subject"] = std::move(subj);
  json seqs = json::array();
  for (const auto& s : report.per_sequence) {
    seqs.push_back({{"sequence_id", s.sequence_id},
                    {"person_id", s.person_id},
                    {"y_true", s.y_true},
                    {"y_mean", s.y_mean},
                    {"y_std", s.y_std},
                    {"nnmv_mean", s.nnmv}});
  }
  j["per_sequence"] = std::move(seqs);
  json ard;
  for (std::size_t i = 0; i < report.ard_feature_names.size(); ++i) {
    ard[report.ard_feature_names[i]] = report.ard_relevance[static_cast<Eigen::Index>(i)];
  }
  j["ard_relevance"] = std::move(ard);
  j["frame_pred_hash"] = report.frame_pred_hash;
  return j.dump(2);
}

void save_report(const ExperimentReport& report, const std::string& dir,
                 const std::string& suffix) {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / ("report" + suffix + ".json"));
    out << report_to_json(report);
  }
  {
    std::ofstream out(fs::path(dir) / ("per_subject_mae" + suffix + ".csv"));
    out << "person_id,mae,nnmv_mae\n";
    for (const auto& s : report.per_subject) {
      out << s.person_id << ',' << s.mae << ',' << s.nnmv_mae << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / ("per_sequence" + suffix + ".csv"));
    out << "sequence_id,y_true,y_mean,y_std\n";
    for (const auto& s : report.per_sequence) {
      out << s.sequence_id << ',' << s.y_true << ',' << s.y_mean << ',' << s.y_std << '\n';
    }
  }
}

}  // namespace lift
