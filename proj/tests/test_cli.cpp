#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef LIFT_CLI_PATH
#error "LIFT_CLI_PATH must be defined by the build"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LIFT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lift_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_tiny_config(const fs::path& dir) {
  const fs::path path = dir / "config.json";
  std::ofstream out(path);
  out << R"({
  "synth": {"persons": 6, "sequences_per_person": 3, "frames_min": 4, "frames_max": 6, "seed": 4},
  "folds": 3,
  "seed": 4,
  "mlp": {"hidden_sizes": [8, 6, 4, 6], "epochs": 5, "batch_size": 32},
  "gp": {"iterations": 20, "restarts": 2}
})";
  return path;
}

}  // namespace

TEST_CASE("cli: synth is deterministic per seed") {
  const fs::path a = temp_dir("synth_a");
  const fs::path b = temp_dir("synth_b");
  REQUIRE(run_cli("synth --seed 5 --out " + a.string()) == 0);
  REQUIRE(run_cli("synth --seed 5 --out " + b.string()) == 0);
  for (const char* f : {"profiles.csv", "sequences.csv", "frames.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const fs::path c = temp_dir("synth_c");
  REQUIRE(run_cli("synth --seed 6 --out " + c.string()) == 0);
  CHECK(slurp(a / "frames.csv") != slurp(c / "frames.csv"));
}

TEST_CASE("cli: bad invocations exit nonzero") {
  CHECK(run_cli("") != 0);                                 // missing subcommand
  CHECK(run_cli("run --config /nonexistent.json") == 1);   // unreadable config
  CHECK(run_cli("plot --out /tmp/lift_cli_plot_none") == 1);  // nothing to plot
}

TEST_CASE("cli: run, attribute, plot, matrix, ablate") {
  const fs::path dir = temp_dir("flow");
  const fs::path cfg = write_tiny_config(dir);

  const fs::path run_out = dir / "run";
  REQUIRE(run_cli("run --config " + cfg.string() + " --save-models --out " +
                  run_out.string()) == 0);
  CHECK(fs::exists(run_out / "report.json"));
  CHECK(fs::exists(run_out / "per_subject_mae.csv"));
  CHECK(fs::exists(run_out / "per_sequence.csv"));
  REQUIRE(fs::exists(run_out / "models" / "mlp_fold0.json"));
  CHECK(fs::exists(run_out / "models" / "mlp_fold2.json"));

  const fs::path data = dir / "data";
  REQUIRE(run_cli("synth --seed 4 --out " + data.string()) == 0);
  const fs::path attr_out = dir / "attr";
  REQUIRE(run_cli("attribute --model " + (run_out / "models" / "mlp_fold0.json").string() +
                  " --data " + data.string() + " --head vas --out " +
                  attr_out.string()) == 0);
  CHECK(fs::exists(attr_out / "attribution.json"));
  CHECK(fs::exists(attr_out / "attribution.csv"));

  const fs::path plot_out = dir / "plots";
  REQUIRE(run_cli("plot --report " + (run_out / "report.json").string() +
                  " --attribution " + (attr_out / "attribution.json").string() +
                  " --out " + plot_out.string()) == 0);
  CHECK(fs::exists(plot_out / "per_subject_mae.svg"));
  CHECK(fs::exists(plot_out / "ard_relevance.svg"));
  CHECK(fs::exists(plot_out / "attribution_mean.svg"));

  const fs::path matrix_out = dir / "matrix";
  REQUIRE(run_cli("matrix --config " + cfg.string() + " --out " + matrix_out.string()) == 0);
  CHECK(fs::exists(matrix_out / "summary.csv"));
  for (int i = 0; i < 9; ++i) {
    CHECK(fs::exists(matrix_out / ("report_" + std::to_string(i) + ".json")));
  }

  const fs::path ablate_json = dir / "ablation.json";
  REQUIRE(run_cli("ablate --config " + cfg.string() +
                  " --feature gender --seeds 1 --out-file " + ablate_json.string()) == 0);
  CHECK(fs::exists(ablate_json));
  CHECK(slurp(ablate_json).find("mean_delta") != std::string::npos);
}
