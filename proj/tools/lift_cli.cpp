// Command-line front end for the two-stage pain-estimation pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lift/dataset.hpp"
#include "lift/deeplift.hpp"
#include "lift/errors.hpp"
#include "lift/pipeline.hpp"
#include "lift/svg.hpp"
#include "lift/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

lift::SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lift::BadConfig("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw lift::BadConfig(std::string("config is not valid JSON: ") + e.what());
  }
  // Reuse the experiment-config parser for the synth block.
  json wrapper;
  wrapper["synth"] = j.contains("synth") ? j.at("synth") : j;
  return *lift::experiment_config_from_json(wrapper.dump()).synth;
}

int cmd_synth(const std::string& config_path, std::uint64_t seed, bool seed_set,
              const std::string& out_dir) {
  lift::SynthConfig cfg;
  if (!config_path.empty()) cfg = load_synth_config(config_path);
  if (seed_set) cfg.seed = seed;
  const lift::Dataset ds = lift::generate_synthetic(cfg);
  lift::save_dataset(ds, out_dir);
  std::cout << "wrote dataset with " << ds.sequences.size() << " sequences ("
            << ds.frame_count() << " frames) to " << out_dir << "\n";
  return 0;
}

lift::ExperimentConfig load_run_config(const std::string& config_path, std::uint64_t seed,
                                       bool seed_set) {
  lift::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = lift::load_experiment_config(config_path);
  if (seed_set) {
    cfg.seed = seed;
    if (cfg.synth) cfg.synth->seed = seed;
  }
  return cfg;
}

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
            const std::string& out_dir, bool save_models) {
  const lift::ExperimentConfig cfg = load_run_config(config_path, seed, seed_set);
  cfg.validate();
  const lift::Dataset ds = lift::resolve_dataset(cfg);
  std::vector<lift::MlpModel> models;
  const lift::ExperimentReport report =
      lift::run_experiment(cfg, ds, save_models ? &models : nullptr);
  lift::save_report(report, out_dir);
  if (save_models) {
    fs::create_directories(fs::path(out_dir) / "models");
    for (std::size_t f = 0; f < models.size(); ++f) {
      lift::save_mlp(models[f],
                     (fs::path(out_dir) / "models" / ("mlp_fold" + std::to_string(f) + ".json"))
                         .string());
    }
  }
  std::cout << "mae=" << report.mae << " icc=" << report.icc << " nnmv_mae=" << report.nnmv_mae
            << " nnmv_icc=" << report.nnmv_icc << "\n";
  return 0;
}

int cmd_matrix(const std::string& config_path, std::uint64_t seed, bool seed_set,
               const std::string& out_dir) {
  const lift::ExperimentConfig base = load_run_config(config_path, seed, seed_set);
  base.validate();
  const auto reports = lift::run_matrix(base);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    lift::save_report(reports[i], out_dir, "_" + std::to_string(i));
  }
  lift::write_matrix_summary_csv(reports, (fs::path(out_dir) / "summary.csv").string());
  std::cout << "wrote " << reports.size() << " reports and summary.csv to " << out_dir << "\n";
  return 0;
}

int cmd_attribute(const std::string& model_path, const std::string& data_dir,
                  const std::string& head_name, const std::string& out_dir) {
  const lift::MlpModel model = lift::load_mlp(model_path);
  const lift::Dataset ds = lift::load_dataset(data_dir);
  const lift::AttributionReport report =
      lift::attribute_dataset(model, ds, lift::head_from_string(head_name));
  fs::create_directories(out_dir);
  lift::save_attribution(report, (fs::path(out_dir) / "attribution.json").string());
  lift::write_attribution_csv(report, (fs::path(out_dir) / "attribution.csv").string());
  std::cout << "wrote attribution.json and attribution.csv to " << out_dir << "\n";
  return 0;
}

int cmd_ablate(const std::string& config_path, std::uint64_t seed, bool seed_set,
               const std::string& feature, int num_seeds, const std::string& out_path) {
  lift::ExperimentConfig cfg = load_run_config(config_path, seed, seed_set);
  cfg.validate();
  const lift::AblationTarget target = lift::ablation_target_from_string(feature);

  double sum = 0.0;
  json deltas = json::array();
  for (int s = 0; s < num_seeds; ++s) {
    lift::ExperimentConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
    if (run_cfg.synth) run_cfg.synth->seed = run_cfg.seed;
    const lift::Dataset ds = lift::resolve_dataset(run_cfg);
    const double delta = lift::ablate_personal_feature(ds, run_cfg, target);
    deltas.push_back(delta);
    sum += delta;
  }
  const double mean_delta = sum / num_seeds;
  std::cout << "ablate " << feature << ": mean MAE delta = " << mean_delta << "\n";
  if (!out_path.empty()) {
    json j{{"feature", feature}, {"mean_delta", mean_delta}, {"deltas", deltas}};
    std::ofstream out(out_path);
    out << j.dump(2);
  }
  return 0;
}

int cmd_plot(const std::string& report_path, const std::string& attribution_path,
             const std::string& out_dir) {
  if (report_path.empty() && attribution_path.empty()) {
    throw lift::BadConfig("plot needs --report and/or --attribution");
  }
  fs::create_directories(out_dir);
  if (!report_path.empty()) {
    std::ifstream in(report_path);
    if (!in) throw lift::BadConfig("cannot open " + report_path);
    const json j = json::parse(in);

    std::vector<std::string> persons;
    std::vector<double> mae_pipeline, mae_nnmv;
    for (const auto& row : j.at("per_subject")) {
      persons.push_back(row.at("person_id").get<std::string>());
      mae_pipeline.push_back(row.at("mae").get<double>());
      mae_nnmv.push_back(row.at("nnmv_mae").get<double>());
    }
    lift::write_grouped_bar_chart_svg((fs::path(out_dir) / "per_subject_mae.svg").string(),
                                      "Per-subject MAE", persons, mae_pipeline, "two-stage",
                                      mae_nnmv, "nn-mv");

    std::vector<std::string> feats;
    std::vector<double> rel;
    for (const auto& [name, value] : j.at("ard_relevance").items()) {
      feats.push_back(name);
      rel.push_back(value.get<double>());
    }
    lift::write_bar_chart_svg((fs::path(out_dir) / "ard_relevance.svg").string(),
                              "Statistic relevance", feats, rel, "-ln(length scale)");
  }
  if (!attribution_path.empty()) {
    std::ifstream in(attribution_path);
    if (!in) throw lift::BadConfig("cannot open " + attribution_path);
    const json j = json::parse(in);
    std::vector<std::string> labels;
    std::vector<double> mean_scores;
    const auto& means = j.at("mean_score");
    for (std::size_t i = 0; i < means.size(); ++i) {
      labels.push_back(std::to_string(i));
      mean_scores.push_back(means.at(i).get<double>());
    }
    lift::write_bar_chart_svg((fs::path(out_dir) / "attribution_mean.svg").string(),
                              "Mean landmark importance", labels, mean_scores, "score");
  }
  std::cout << "wrote charts to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage personalized pain-score estimation pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", model_path, data_dir, head_name = "vas";
  std::string feature, report_path, attribution_path, ablation_out;
  std::uint64_t seed = 0;
  bool save_models = false;
  int num_seeds = 1;

  auto add_common = [&](CLI::App* sub, bool with_config = true) {
    if (with_config) sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--out", out_dir, "output directory");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth);
  CLI::App* run = app.add_subcommand("run", "run a single experiment");
  add_common(run);
  run->add_flag("--save-models", save_models, "save per-fold stage-1 models");
  CLI::App* matrix = app.add_subcommand("matrix", "run the full setting matrix");
  add_common(matrix);
  CLI::App* attribute = app.add_subcommand("attribute", "landmark attribution for a saved model");
  attribute->add_option("--model", model_path, "saved stage-1 model JSON")->required();
  attribute->add_option("--data", data_dir, "dataset directory")->required();
  attribute->add_option("--head", head_name, "vas or opi");
  attribute->add_option("--out", out_dir, "output directory");
  CLI::App* ablate = app.add_subcommand("ablate", "personal-feature ablation");
  add_common(ablate);
  ablate->add_option("--feature", feature, "complexion|age|gender|opi-label")->required();
  ablate->add_option("--seeds", num_seeds, "number of master seeds to average");
  ablate->add_option("--out-file", ablation_out, "optional JSON output path");
  CLI::App* plot = app.add_subcommand("plot", "SVG charts from a report");
  plot->add_option("--report", report_path, "report.json from run/matrix");
  plot->add_option("--attribution", attribution_path, "attribution.json");
  plot->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  bool seed_set = false;
  for (CLI::App* sub : {synth, run, matrix, ablate}) {
    if (sub->count("--seed") > 0) seed_set = true;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, seed, seed_set, out_dir);
    if (run->parsed()) return cmd_run(config_path, seed, seed_set, out_dir, save_models);
    if (matrix->parsed()) return cmd_matrix(config_path, seed, seed_set, out_dir);
    if (attribute->parsed()) return cmd_attribute(model_path, data_dir, head_name, out_dir);
    if (ablate->parsed()) {
      return cmd_ablate(config_path, seed, seed_set, feature, num_seeds, ablation_out);
    }
    if (plot->parsed()) return cmd_plot(report_path, attribution_path, out_dir);
  } catch (const lift::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
