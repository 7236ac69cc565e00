#ifndef FASTTRACK_SCENARIO_HPP
#define FASTTRACK_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fasttrack/metrics.hpp"
#include "fasttrack/tracker.hpp"

namespace fasttrack {

enum class MotionModel { linear, sinusoidal, crossing };

std::string to_string(MotionModel m);
MotionModel motion_model_from_string(const std::string& s);

// Generative description of a synthetic tracking scene. `crossing` pairs
// objects up on a shared lane: they approach head-on and reverse at closest
// approach, so a constant-velocity prediction follows the wrong object while
// appearance stays informative.
struct ScenarioConfig {
    int num_objects = 4;
    int num_frames = 100;
    double arena_width = 800.0;
    double arena_height = 600.0;
    MotionModel motion = MotionModel::linear;
    double pos_noise_sigma = 1.0;
    double miss_prob = 0.0;
    double false_pos_rate = 0.0;  // Poisson mean per frame
    double conf_mean_hit = 0.9;
    double conf_mean_fp = 0.3;
    double conf_sigma = 0.05;
    int embed_dim = 256;
    double embed_noise_sigma = 0.1;
    std::uint64_t seed = 1;
    double box_width = 40.0;
    double box_height = 80.0;
};

void validate(const ScenarioConfig& cfg);

struct FrameObservations {
    int frame = 0;
    std::vector<Detection> detections;
    LabeledFrame ground_truth;
};

// Deterministic given the seed: per-identity unit prototype embeddings,
// per-frame jittered detections with misses, Poisson false positives with
// random embeddings.
std::vector<FrameObservations> generate_scenario(const ScenarioConfig& cfg);

}  // namespace fasttrack

#endif
