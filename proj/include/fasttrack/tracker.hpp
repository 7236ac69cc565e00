#ifndef FASTTRACK_TRACKER_HPP
#define FASTTRACK_TRACKER_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "fasttrack/assignment.hpp"
#include "fasttrack/box.hpp"
#include "fasttrack/kalman.hpp"

namespace fasttrack {

class SequenceError : public std::runtime_error {
  public:
    explicit SequenceError(const std::string& what) : std::runtime_error(what) {}
};

// One observation: box, confidence, unit appearance embedding.
struct Detection {
    BoundingBox box;
    double confidence = 0.0;
    std::vector<double> embedding;
};

enum class TrackStatus { tentative, confirmed, lost, removed };

struct Tracklet {
    int track_id = 0;
    KalmanState kf;
    std::vector<double> embedding;  // unit norm, smoothed by EMA
    TrackStatus status = TrackStatus::tentative;
    int hits = 0;
    int time_since_update = 0;

    BoundingBox predicted_box() const { return state_box(kf); }
};

struct AssociationConfig {
    double lambda_fuse = 0.99;  // appearance weight in the fused cost
    double eta_ema = 0.9;       // embedding momentum
    double tau_high = 0.6;
    double tau_low = 0.1;
    double gate_chi2 = 9.4877;  // chi-square 0.95 quantile, 4 dof
    double cost_reject = 0.7;
    int max_age = 30;
    int n_init = 3;
    bool enable_bistage = true;
};

void validate(const AssociationConfig& cfg);

struct TrackRecord {
    int frame = 0;
    int track_id = 0;
    BoundingBox box;
    double confidence = 0.0;
};

Tracklet kf_initiate(const Detection& det, int track_id);
Tracklet kf_predict(const Tracklet& track);
Tracklet kf_update(const Tracklet& track, const Detection& det);

// eta * f_prev + (1 - eta) * f_obs, re-normalized to unit length so cosine
// costs stay meaningful; degenerate (near-zero) blends keep f_prev.
std::vector<double> ema_update(const std::vector<double>& f_prev,
                               const std::vector<double>& f_obs, double eta);

// Fused appearance+motion cost, lambda * (1 - cos) + (1 - lambda) * (1 - IoU),
// with a Mahalanobis gate over the predicted measurement distribution.
CostMatrix build_fused_cost(const std::vector<Tracklet>& tracks,
                            const std::vector<Detection>& dets,
                            const AssociationConfig& cfg);

// Online association engine; one instance per sequence, frames in order.
class Tracker {
  public:
    explicit Tracker(AssociationConfig cfg);

    // Associates one frame of detections and returns the confirmed-track
    // records it produced. Stage 1 matches high-confidence detections against
    // confirmed and lost tracks on the fused, gated cost; stage 2 recovers
    // low-confidence detections for the remaining tracks on motion-only cost;
    // tentative tracks then claim leftover high-confidence detections, and
    // whatever high-confidence detections remain spawn new tracks.
    std::vector<TrackRecord> step(int frame, const std::vector<Detection>& detections);

    const std::vector<Tracklet>& tracks() const { return tracks_; }

  private:
    AssociationConfig cfg_;
    std::vector<Tracklet> tracks_;
    int next_id_ = 1;
    std::optional<int> last_frame_;
};

}  // namespace fasttrack

#endif
