#include "lift/synth.hpp"

#include <algorithm>
#include <cmath>

#include "lift/errors.hpp"
#include "lift/rng.hpp"

namespace lift {

namespace {

// Rest-face template: 66 points on a rough facial layout, pixel units.
Eigen::VectorXd template_face() {
  Eigen::VectorXd base(kLandmarkDim);
  for (int j = 0; j < kNumLandmarks; ++j) {
    const double t = 2.0 * M_PI * j / kNumLandmarks;
    // Outer ring for contour, inner ring for features.
    const double rx = (j < 33) ? 60.0 : 35.0;
    const double ry = (j < 33) ? 80.0 : 45.0;
    base[2 * j] = 120.0 + rx * std::cos(t);
    base[2 * j + 1] = 120.0 + ry * std::sin(t);
  }
  return base;
}

// Fixed unit deformation directions on the landmark subset that reacts to
// pain; zero elsewhere. Indices 20..39 stand in for the brow/mouth region.
Eigen::VectorXd deformation_pattern() {
  Eigen::VectorXd pattern = Eigen::VectorXd::Zero(kLandmarkDim);
  for (int j = 20; j < 40; ++j) {
    const double dx = std::sin(0.7 * j + 1.0);
    const double dy = std::cos(0.9 * j + 2.0);
    const double norm = std::hypot(dx, dy);
    pattern[2 * j] = dx / norm;
    pattern[2 * j + 1] = dy / norm;
  }
  return pattern;
}

}  // namespace

double age_expressiveness_factor(AgeBin age) {
  switch (age) {
    case AgeBin::Young: return 0.6;
    case AgeBin::MiddleAged: return 1.0;
    case AgeBin::Elderly: return 1.5;
  }
  return 1.0;
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  if (cfg.persons <= 0 || cfg.sequences_per_person <= 0) {
    throw BadConfig("persons and sequences_per_person must be positive");
  }
  if (cfg.frames_min <= 0 || cfg.frames_max < cfg.frames_min) {
    throw BadConfig("invalid frame-count range");
  }
  if (cfg.landmark_noise < 0 || cfg.motion_noise < 0 || cfg.observer_noise < 0 ||
      cfg.base_jitter < 0 || cfg.expressiveness_jitter < 0) {
    throw BadConfig("noise levels must be nonnegative");
  }
  if (cfg.active_fraction_min <= 0.0 || cfg.active_fraction_max > 1.0 ||
      cfg.active_fraction_min > cfg.active_fraction_max) {
    throw BadConfig("active fraction range must satisfy 0 < min <= max <= 1");
  }

  const Eigen::VectorXd tmpl = template_face();
  const Eigen::VectorXd pattern = deformation_pattern();

  Dataset ds;
  for (int p = 0; p < cfg.persons; ++p) {
    Rng rng(derive_seed(cfg.seed, "synth-person", static_cast<std::uint64_t>(p)));
    const std::string pid = "p" + std::to_string(p);

    PersonProfile profile;
    profile.person_id = pid;
    profile.complexion = static_cast<Complexion>(rng.uniform_int(0, 2));
    profile.age_bin = static_cast<AgeBin>(rng.uniform_int(0, 2));
    profile.gender = static_cast<Gender>(rng.uniform_int(0, 1));
    ds.profiles.emplace(pid, profile);

    Eigen::VectorXd base = tmpl;
    for (int i = 0; i < kLandmarkDim; ++i) base[i] += cfg.base_jitter * rng.normal();

    // Expressiveness is driven by the age bin only; complexion and gender
    // carry no signal in the generator.
    const double expressiveness = age_expressiveness_factor(profile.age_bin) *
                                  std::exp(cfg.expressiveness_jitter * rng.normal());

    for (int s = 0; s < cfg.sequences_per_person; ++s) {
      SequenceRecord seq;
      seq.person_id = pid;
      seq.sequence_id = pid + "_s" + std::to_string(s);
      seq.vas = rng.uniform_int(0, 10);
      const double opi_raw = 0.5 * seq.vas + cfg.observer_noise * rng.normal();
      seq.opi = static_cast<int>(std::lround(std::clamp(opi_raw, 0.0, 5.0)));

      const int num_frames = rng.uniform_int(cfg.frames_min, cfg.frames_max);
      const double frac = rng.uniform(cfg.active_fraction_min, cfg.active_fraction_max);
      const int active = std::clamp(static_cast<int>(std::lround(frac * num_frames)), 1,
                                    num_frames);
      const int onset = rng.uniform_int(0, num_frames - active);
      for (int f = 0; f < num_frames; ++f) {
        // sin^2 envelope over the active window (mean exactly 1/2 across the
        // window for any width >= 2); neutral outside it.
        const double env =
            (f >= onset && f < onset + active)
                ? std::pow(std::sin(M_PI * (f - onset + 0.5) / active), 2)
                : 0.0;
        FrameSample frame;
        frame.person_id = pid;
        frame.sequence_id = seq.sequence_id;
        frame.frame_index = f;
        frame.landmarks = base + expressiveness * seq.vas * env * pattern;
        if (cfg.motion_noise > 0) {
          // Rigid head motion: one translation shared by every landmark.
          const double dx = cfg.motion_noise * rng.normal();
          const double dy = cfg.motion_noise * rng.normal();
          for (int j = 0; j < kNumLandmarks; ++j) {
            frame.landmarks[2 * j] += dx;
            frame.landmarks[2 * j + 1] += dy;
          }
        }
        if (cfg.landmark_noise > 0) {
          for (int i = 0; i < kLandmarkDim; ++i) {
            frame.landmarks[i] += cfg.landmark_noise * rng.normal();
          }
        }
        seq.frames.push_back(std::move(frame));
      }
      ds.sequences.push_back(std::move(seq));
    }
  }

  ds.validate();
  return ds;
}

}  // namespace lift
