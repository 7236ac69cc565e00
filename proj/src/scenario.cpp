#include "fasttrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "fasttrack/rng.hpp"

namespace fasttrack {

namespace {

// Folds a coordinate back into [lo, hi].
double reflect(double p, double lo, double hi) {
    const double range = hi - lo;
    if (range <= 0.0) return lo;
    double q = std::fmod(p - lo, 2.0 * range);
    if (q < 0.0) q += 2.0 * range;
    return lo + (q <= range ? q : 2.0 * range - q);
}

double clamp(double v, double lo, double hi) { return std::max(lo, std::min(hi, v)); }

struct TrajectoryPoint {
    double cx = 0.0;
    double cy = 0.0;
};

class Trajectory {
  public:
    virtual ~Trajectory() = default;
    virtual TrajectoryPoint at(int t) const = 0;  // t is 0-based
};

class LinearTrajectory : public Trajectory {
  public:
    LinearTrajectory(double x0, double y0, double vx, double vy, double lo_x, double hi_x,
                     double lo_y, double hi_y)
        : x0_(x0), y0_(y0), vx_(vx), vy_(vy), lo_x_(lo_x), hi_x_(hi_x), lo_y_(lo_y), hi_y_(hi_y) {}

    TrajectoryPoint at(int t) const override {
        return {reflect(x0_ + vx_ * t, lo_x_, hi_x_), reflect(y0_ + vy_ * t, lo_y_, hi_y_)};
    }

  private:
    double x0_, y0_, vx_, vy_, lo_x_, hi_x_, lo_y_, hi_y_;
};

class SinusoidalTrajectory : public Trajectory {
  public:
    SinusoidalTrajectory(double x0, double vx, double base_y, double amplitude, double freq,
                         double phase, double lo_x, double hi_x, double lo_y, double hi_y)
        : x0_(x0), vx_(vx), base_y_(base_y), amplitude_(amplitude), freq_(freq), phase_(phase),
          lo_x_(lo_x), hi_x_(hi_x), lo_y_(lo_y), hi_y_(hi_y) {}

    TrajectoryPoint at(int t) const override {
        const double y =
            base_y_ + amplitude_ * std::sin(2.0 * std::numbers::pi * freq_ * t + phase_);
        return {reflect(x0_ + vx_ * t, lo_x_, hi_x_), clamp(y, lo_y_, hi_y_)};
    }

  private:
    double x0_, vx_, base_y_, amplitude_, freq_, phase_;
    double lo_x_, hi_x_, lo_y_, hi_y_;
};

// Approach along a shared lane, reverse at the turn frame.
class BounceTrajectory : public Trajectory {
  public:
    BounceTrajectory(double x0, double y, double speed, int turn_frame, double lo_x, double hi_x)
        : x0_(x0), y_(y), speed_(speed), turn_frame_(turn_frame), lo_x_(lo_x), hi_x_(hi_x) {}

    TrajectoryPoint at(int t) const override {
        const double advance = speed_ * std::min(t, turn_frame_);
        const double retreat = speed_ * std::max(0, t - turn_frame_);
        return {clamp(x0_ + advance - retreat, lo_x_, hi_x_), y_};
    }

  private:
    double x0_, y_, speed_;
    int turn_frame_;
    double lo_x_, hi_x_;
};

}  // namespace

std::string to_string(MotionModel m) {
    switch (m) {
        case MotionModel::linear: return "linear";
        case MotionModel::sinusoidal: return "sinusoidal";
        case MotionModel::crossing: return "crossing";
    }
    return "linear";
}

MotionModel motion_model_from_string(const std::string& s) {
    if (s == "linear") return MotionModel::linear;
    if (s == "sinusoidal") return MotionModel::sinusoidal;
    if (s == "crossing") return MotionModel::crossing;
    throw std::invalid_argument("unknown motion model '" + s +
                                "' (expected linear, sinusoidal or crossing)");
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.num_objects <= 0 || cfg.num_frames <= 0) {
        throw std::invalid_argument("scenario: object and frame counts must be positive");
    }
    if (cfg.arena_width <= 0.0 || cfg.arena_height <= 0.0) {
        throw std::invalid_argument("scenario: arena dimensions must be positive");
    }
    if (cfg.box_width <= 0.0 || cfg.box_height <= 0.0) {
        throw std::invalid_argument("scenario: box dimensions must be positive");
    }
    if (cfg.box_width >= cfg.arena_width || cfg.box_height >= cfg.arena_height) {
        throw std::invalid_argument("scenario: boxes must fit inside the arena");
    }
    if (cfg.miss_prob < 0.0 || cfg.miss_prob > 1.0) {
        throw std::invalid_argument("scenario: miss_prob must lie in [0, 1]");
    }
    if (cfg.false_pos_rate < 0.0) {
        throw std::invalid_argument("scenario: false_pos_rate must be nonnegative");
    }
    if (cfg.conf_sigma < 0.0 || cfg.pos_noise_sigma < 0.0 || cfg.embed_noise_sigma < 0.0) {
        throw std::invalid_argument("scenario: noise sigmas must be nonnegative");
    }
    if (cfg.embed_dim <= 0) {
        throw std::invalid_argument("scenario: embed_dim must be positive");
    }
}

std::vector<FrameObservations> generate_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);

    std::vector<std::vector<double>> prototypes;
    prototypes.reserve(static_cast<std::size_t>(cfg.num_objects));
    for (int i = 0; i < cfg.num_objects; ++i) {
        prototypes.push_back(rng.unit_vector(cfg.embed_dim));
    }

    const double half_w = 0.5 * cfg.box_width;
    const double half_h = 0.5 * cfg.box_height;
    const double lo_x = half_w;
    const double hi_x = cfg.arena_width - half_w;
    const double lo_y = half_h;
    const double hi_y = cfg.arena_height - half_h;

    std::vector<std::unique_ptr<Trajectory>> trajectories;
    trajectories.reserve(static_cast<std::size_t>(cfg.num_objects));
    switch (cfg.motion) {
        case MotionModel::linear: {
            for (int i = 0; i < cfg.num_objects; ++i) {
                const double x0 = rng.uniform(lo_x, hi_x);
                const double y0 = rng.uniform(lo_y, hi_y);
                const double vx = rng.uniform(-4.0, 4.0);
                const double vy = rng.uniform(-4.0, 4.0);
                trajectories.push_back(std::make_unique<LinearTrajectory>(
                    x0, y0, vx, vy, lo_x, hi_x, lo_y, hi_y));
            }
            break;
        }
        case MotionModel::sinusoidal: {
            for (int i = 0; i < cfg.num_objects; ++i) {
                const double x0 = rng.uniform(lo_x, hi_x);
                const double base_y = rng.uniform(lo_y + 40.0, std::max(lo_y + 41.0, hi_y - 40.0));
                const double vx = rng.uniform(-4.0, 4.0);
                const double amplitude = rng.uniform(10.0, 40.0);
                const double freq = rng.uniform(0.05, 0.15);
                const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
                trajectories.push_back(std::make_unique<SinusoidalTrajectory>(
                    x0, vx, base_y, amplitude, freq, phase, lo_x, hi_x, lo_y, hi_y));
            }
            break;
        }
        case MotionModel::crossing: {
            const int pairs = cfg.num_objects / 2;
            const int turn_frame = std::max(1, cfg.num_frames / 2);
            const double gap = 0.1 * cfg.box_width;  // closest-approach separation
            const double mid = 0.5 * (lo_x + hi_x);
            // Unequal approach speeds keep the post-turn geometry asymmetric:
            // each straight-line prediction lands nearer the other object.
            const double speed_a = std::min(6.0, (mid - 0.5 * gap - lo_x) / turn_frame);
            const double speed_b = speed_a * 5.0 / 6.0;
            for (int p = 0; p < pairs; ++p) {
                const double lane =
                    clamp(cfg.arena_height * (p + 1) / (pairs + 1.0), lo_y + 2.0, hi_y - 2.0);
                const double left_start = mid - 0.5 * gap - speed_a * turn_frame;
                const double right_start = mid + 0.5 * gap + speed_b * turn_frame;
                trajectories.push_back(std::make_unique<BounceTrajectory>(
                    left_start, lane - 1.0, speed_a, turn_frame, lo_x, hi_x));
                trajectories.push_back(std::make_unique<BounceTrajectory>(
                    right_start, lane + 1.0, -speed_b, turn_frame, lo_x, hi_x));
            }
            if (cfg.num_objects % 2 == 1) {
                trajectories.push_back(std::make_unique<LinearTrajectory>(
                    rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), rng.uniform(-4.0, 4.0),
                    rng.uniform(-4.0, 4.0), lo_x, hi_x, lo_y, hi_y));
            }
            break;
        }
    }

    auto make_box = [&](double cx, double cy) {
        BoundingBox box{cx - half_w, cy - half_h, cfg.box_width, cfg.box_height};
        box.left = clamp(box.left, 0.0, cfg.arena_width - cfg.box_width);
        box.top = clamp(box.top, 0.0, cfg.arena_height - cfg.box_height);
        return box;
    };

    std::vector<FrameObservations> frames;
    frames.reserve(static_cast<std::size_t>(cfg.num_frames));
    for (int t = 0; t < cfg.num_frames; ++t) {
        FrameObservations obs;
        obs.frame = t + 1;
        obs.ground_truth.frame = t + 1;

        for (int i = 0; i < cfg.num_objects; ++i) {
            const TrajectoryPoint p = trajectories[static_cast<std::size_t>(i)]->at(t);
            obs.ground_truth.entries.push_back({i + 1, make_box(p.cx, p.cy)});
        }

        for (int i = 0; i < cfg.num_objects; ++i) {
            if (rng.uniform01() < cfg.miss_prob) continue;
            const BoundingBox& gt_box =
                obs.ground_truth.entries[static_cast<std::size_t>(i)].box;
            Detection det;
            const double cx = gt_box.center_x() + rng.normal(0.0, cfg.pos_noise_sigma);
            const double cy = gt_box.center_y() + rng.normal(0.0, cfg.pos_noise_sigma);
            det.box = make_box(cx, cy);
            det.confidence = clamp(rng.normal(cfg.conf_mean_hit, cfg.conf_sigma), 0.0, 1.0);
            std::vector<double> emb = prototypes[static_cast<std::size_t>(i)];
            if (cfg.embed_noise_sigma > 0.0) {
                double norm_sq = 0.0;
                for (double& v : emb) {
                    v += rng.normal(0.0, cfg.embed_noise_sigma);
                    norm_sq += v * v;
                }
                const double inv = 1.0 / std::sqrt(norm_sq);
                for (double& v : emb) v *= inv;
            }
            det.embedding = std::move(emb);
            obs.detections.push_back(std::move(det));
        }

        const int fp_count = rng.poisson(cfg.false_pos_rate);
        for (int k = 0; k < fp_count; ++k) {
            Detection det;
            det.box = make_box(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y));
            det.confidence = clamp(rng.normal(cfg.conf_mean_fp, cfg.conf_sigma), 0.0, 1.0);
            det.embedding = rng.unit_vector(cfg.embed_dim);
            obs.detections.push_back(std::move(det));
        }

        frames.push_back(std::move(obs));
    }
    return frames;
}

}  // namespace fasttrack
