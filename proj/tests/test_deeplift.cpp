#include <doctest.h>

#include <vector>

#include "lift/deeplift.hpp"
#include "lift/errors.hpp"
#include "lift/mlp.hpp"
#include "lift/rng.hpp"
#include "lift/synth.hpp"

using namespace lift;

namespace {

MlpModel random_net(Injection inj, Tasks tasks, std::uint64_t seed, double bias_span) {
  MlpConfig cfg;
  cfg.hidden_sizes = {4, 3, 2, 3};
  cfg.injection = inj;
  cfg.tasks = tasks;
  cfg.landmark_dim = 4;
  cfg.personal_dim = 3;
  cfg.seed = seed;
  MlpModel model = init_model(cfg);
  Rng rng(seed + 1);
  for (auto& b : model.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-bias_span, bias_span);
  for (Eigen::Index i = 0; i < model.head_bias.size(); ++i) {
    model.head_bias[i] = rng.uniform(-bias_span, bias_span);
  }
  return model;
}

}  // namespace

TEST_CASE("deeplift: linear network attributes exactly") {
  MlpConfig cfg;
  cfg.hidden_sizes = {2};
  cfg.landmark_dim = 2;
  cfg.tasks = Tasks::Vas;
  MlpModel model = init_model(cfg);
  model.weights[0] = Eigen::MatrixXd::Identity(2, 2);
  model.biases[0].setZero();
  model.head_weight.resize(1, 2);
  model.head_weight << 6, -2;
  model.head_bias.setZero();

  Eigen::VectorXd in(2);
  in << 1, 1;
  const ContributionVector cv = contributions(model, in, Head::Vas);
  CHECK(cv.scores[0] == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(cv.scores[1] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(cv.delta_output == doctest::Approx(4.0).epsilon(1e-12));

  // Both units land below the ReLU hinge: nothing propagates.
  in << -1, -1;
  const ContributionVector dead = contributions(model, in, Head::Vas);
  CHECK(dead.scores.cwiseAbs().maxCoeff() == 0.0);
  CHECK(dead.delta_output == 0.0);
}

TEST_CASE("deeplift: summation-to-delta on random networks") {
  Rng rng(314);
  for (int t = 0; t < 100; ++t) {
    const auto inj = static_cast<Injection>(t % 3);
    const auto tasks = (t % 2 == 0) ? Tasks::Vas : Tasks::VasOpi;
    const Head head = (tasks == Tasks::VasOpi && t % 4 == 1) ? Head::Opi : Head::Vas;
    const MlpModel model = random_net(inj, tasks, 1000 + t, 0.5);

    const int in_dim = 4 + (inj == Injection::None ? 0 : 3);
    Eigen::VectorXd in(in_dim);
    for (int i = 0; i < 4; ++i) in[i] = rng.uniform(-2, 2);
    for (int i = 4; i < in_dim; ++i) in[i] = rng.uniform_int(0, 1);

    const ContributionVector cv = contributions(model, in, head);
    CHECK(std::abs(cv.scores.sum() - cv.delta_output) < 1e-6);

    // The reported delta must be the actual head movement away from the
    // zero-input reference.
    const std::optional<Eigen::VectorXd> personal =
        inj == Injection::None ? std::nullopt
                               : std::optional<Eigen::VectorXd>(in.tail(3));
    const ForwardResult fr = forward(model, in.head(4), personal);
    const double out = head == Head::Vas ? fr.vas : *fr.opi;
    CHECK(cv.delta_output ==
          doctest::Approx(out - reference_output(model, head)).epsilon(1e-10));
  }
}

TEST_CASE("deeplift: always-active region reduces to the effective linear map") {
  // Biases large enough that every unit stays active for the input and the
  // reference, so the Rescale multipliers are exactly 1 and the attribution
  // must equal elementwise weight-times-delta-input.
  MlpConfig cfg;
  cfg.hidden_sizes = {3, 3};
  cfg.landmark_dim = 4;
  cfg.seed = 9;
  MlpModel model = init_model(cfg);
  for (auto& b : model.biases) b.setConstant(10.0);
  model.head_bias.setConstant(1.0);

  Eigen::VectorXd in(4);
  in << 0.3, -0.7, 1.1, 0.05;
  const ContributionVector cv = contributions(model, in, Head::Vas);

  const Eigen::RowVectorXd w_eff =
      model.head_weight.row(0) * model.weights[1] * model.weights[0];
  for (int i = 0; i < 4; ++i) {
    CHECK(cv.scores[i] == doctest::Approx(w_eff[i] * in[i]).epsilon(1e-12));
  }
  CHECK(cv.delta_output == doctest::Approx((w_eff * in)(0)).epsilon(1e-10));
}

TEST_CASE("deeplift: shape and head errors") {
  const MlpModel model = random_net(Injection::Input, Tasks::Vas, 5, 0.1);
  CHECK_THROWS_AS(contributions(model, Eigen::VectorXd::Zero(4), Head::Vas),
                  ShapeMismatch);
  CHECK_THROWS_AS(contributions(model, Eigen::VectorXd::Zero(7), Head::Opi),
                  IncompatibleConfig);
  CHECK_THROWS_AS(reference_output(model, Head::Opi), IncompatibleConfig);
}

TEST_CASE("deeplift: dataset attribution on a single-coordinate network") {
  // Network reads only input dimension 0, which folds into landmark 0.
  MlpConfig cfg;
  cfg.hidden_sizes = {1};
  cfg.landmark_dim = kLandmarkDim;
  MlpModel model = init_model(cfg);
  model.weights[0].setZero();
  model.weights[0](0, 0) = 1.0;
  model.biases[0].setZero();
  model.head_weight.setConstant(1.0);
  model.head_bias.setZero();

  SynthConfig scfg;
  scfg.persons = 3;
  scfg.sequences_per_person = 2;
  scfg.seed = 8;
  const Dataset ds = generate_synthetic(scfg);

  const AttributionReport report = attribute_dataset(model, ds, Head::Vas);
  REQUIRE(report.person_ids.size() == 3);
  REQUIRE(report.per_person.rows() == 3);
  REQUIRE(report.per_person.cols() == kNumLandmarks);
  for (Eigen::Index p = 0; p < 3; ++p) {
    CHECK(report.per_person.row(p).sum() == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(report.per_person(p, 0) == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(report.per_person.row(p).tail(kNumLandmarks - 1).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(report.mean_score[0] == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(report.std_score[0] == doctest::Approx(0.0));

  // A one-person dataset has no spread across persons at all.
  Dataset solo = ds;
  solo.sequences.erase(
      std::remove_if(solo.sequences.begin(), solo.sequences.end(),
                     [](const SequenceRecord& s) { return s.person_id != "p0"; }),
      solo.sequences.end());
  solo.profiles = {{"p0", ds.profiles.at("p0")}};
  const AttributionReport one = attribute_dataset(model, solo, Head::Vas);
  CHECK(one.std_score.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}
