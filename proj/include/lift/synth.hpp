#ifndef LIFT_SYNTH_HPP_
#define LIFT_SYNTH_HPP_

#include <cstdint>

#include "lift/dataset.hpp"

namespace lift {

// Synthetic stand-in for the restricted clinical recordings. Each person
// gets a rest face and an expressiveness scalar driven by their age bin;
// frames deform a fixed landmark subset proportionally to the sequence's
// latent pain score under a smooth temporal envelope. The expression is
// active only inside a random window of the sequence; the remaining frames
// stay neutral, so averaging frame estimates dilutes the sequence estimate
// by a random amount while order statistics stay informative.
struct SynthConfig {
  int persons = 25;
  int sequences_per_person = 8;
  int frames_min = 5;
  int frames_max = 9;
  double landmark_noise = 0.0;        // per-coordinate Gaussian, pixels
  double motion_noise = 0.5;          // per-frame rigid translation, pixels
  double observer_noise = 0.5;        // noise on the observer rating
  double base_jitter = 0.0;           // per-person rest-face spread, pixels
  double expressiveness_jitter = 0.15;  // lognormal sigma on expressiveness
  double active_fraction_min = 0.3;   // expression window as share of frames
  double active_fraction_max = 1.0;
  std::uint64_t seed = 0;
};

Dataset generate_synthetic(const SynthConfig& cfg);

// Expressiveness multiplier per age bin; exposed so tests can reason about
// which personal feature carries signal.
double age_expressiveness_factor(AgeBin age);

}  // namespace lift

#endif  // LIFT_SYNTH_HPP_
