#include "fasttrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fasttrack {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void validate_detection(const Detection& det) {
    if (det.box.width <= 0.0 || det.box.height <= 0.0) {
        throw std::invalid_argument("detection box extents must be positive");
    }
    if (det.confidence < 0.0 || det.confidence > 1.0) {
        throw std::invalid_argument("detection confidence must lie in [0, 1]");
    }
    if (det.embedding.empty()) {
        throw std::invalid_argument("detection embedding is empty");
    }
    const double norm = std::sqrt(dot(det.embedding, det.embedding));
    if (std::abs(norm - 1.0) > 1e-6) {
        throw std::invalid_argument("detection embedding norm " + std::to_string(norm) +
                                    " is not unit");
    }
}

// Motion-only association cost.
CostMatrix build_iou_cost(const std::vector<const Tracklet*>& tracks,
                          const std::vector<const Detection*>& dets) {
    CostMatrix cost;
    cost.values = Matrix(static_cast<int>(tracks.size()), static_cast<int>(dets.size()));
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const BoundingBox predicted = tracks[i]->predicted_box();
        for (std::size_t j = 0; j < dets.size(); ++j) {
            cost.values.at(static_cast<int>(i), static_cast<int>(j)) =
                1.0 - iou(predicted, dets[j]->box);
        }
    }
    return cost;
}

}  // namespace

void validate(const AssociationConfig& cfg) {
    if (cfg.lambda_fuse < 0.0 || cfg.lambda_fuse > 1.0) {
        throw std::invalid_argument("lambda_fuse must lie in [0, 1]");
    }
    if (cfg.eta_ema < 0.0 || cfg.eta_ema > 1.0) {
        throw std::invalid_argument("eta_ema must lie in [0, 1]");
    }
    if (cfg.tau_low > cfg.tau_high) {
        throw std::invalid_argument("tau_low must not exceed tau_high");
    }
    if (cfg.gate_chi2 <= 0.0 || cfg.cost_reject < 0.0) {
        throw std::invalid_argument("gate_chi2 must be positive and cost_reject nonnegative");
    }
    if (cfg.max_age < 0 || cfg.n_init < 1) {
        throw std::invalid_argument("max_age must be >= 0 and n_init >= 1");
    }
}

Tracklet kf_initiate(const Detection& det, int track_id) {
    validate_detection(det);
    Tracklet track;
    track.track_id = track_id;
    track.kf = kalman_initiate(det.box);
    track.embedding = det.embedding;
    track.status = TrackStatus::tentative;
    track.hits = 1;
    track.time_since_update = 0;
    return track;
}

Tracklet kf_predict(const Tracklet& track) {
    if (track.status == TrackStatus::removed) {
        throw std::invalid_argument("kf_predict: track is removed");
    }
    Tracklet out = track;
    out.kf = kalman_predict(track.kf);
    out.time_since_update = track.time_since_update + 1;
    return out;
}

Tracklet kf_update(const Tracklet& track, const Detection& det) {
    Tracklet out = track;
    out.kf = kalman_update(track.kf, det.box);
    out.hits = track.hits + 1;
    out.time_since_update = 0;
    return out;
}

std::vector<double> ema_update(const std::vector<double>& f_prev,
                               const std::vector<double>& f_obs, double eta) {
    if (f_prev.size() != f_obs.size()) {
        throw std::invalid_argument("ema_update: embedding dims differ");
    }
    std::vector<double> raw(f_prev.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = eta * f_prev[i] + (1.0 - eta) * f_obs[i];
    }
    const double norm = std::sqrt(dot(raw, raw));
    if (norm < 1e-12) return f_prev;
    for (double& v : raw) v /= norm;
    return raw;
}

CostMatrix build_fused_cost(const std::vector<Tracklet>& tracks,
                            const std::vector<Detection>& dets,
                            const AssociationConfig& cfg) {
    CostMatrix cost;
    const int m = static_cast<int>(tracks.size());
    const int n = static_cast<int>(dets.size());
    cost.values = Matrix(m, n);
    if (m == 0 || n == 0) return cost;
    cost.gated.assign(static_cast<std::size_t>(m) * n, false);
    for (int i = 0; i < m; ++i) {
        const BoundingBox predicted = tracks[static_cast<std::size_t>(i)].predicted_box();
        for (int j = 0; j < n; ++j) {
            const Detection& det = dets[static_cast<std::size_t>(j)];
            const double appearance =
                1.0 - dot(tracks[static_cast<std::size_t>(i)].embedding, det.embedding);
            const double motion = 1.0 - iou(predicted, det.box);
            cost.values.at(i, j) =
                cfg.lambda_fuse * appearance + (1.0 - cfg.lambda_fuse) * motion;
            const double d2 =
                kalman_gating_distance(tracks[static_cast<std::size_t>(i)].kf, det.box);
            if (d2 > cfg.gate_chi2) {
                cost.gated[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = true;
            }
        }
    }
    return cost;
}

Tracker::Tracker(AssociationConfig cfg) : cfg_(cfg) { validate(cfg_); }

std::vector<TrackRecord> Tracker::step(int frame, const std::vector<Detection>& detections) {
    if (last_frame_ && frame <= *last_frame_) {
        throw SequenceError("frame " + std::to_string(frame) +
                            " is not after frame " + std::to_string(*last_frame_));
    }
    last_frame_ = frame;
    for (const auto& det : detections) validate_detection(det);

    for (auto& track : tracks_) track = kf_predict(track);

    std::vector<int> high_dets;
    std::vector<int> low_dets;
    for (int j = 0; j < static_cast<int>(detections.size()); ++j) {
        const double conf = detections[static_cast<std::size_t>(j)].confidence;
        if (conf >= cfg_.tau_high) {
            high_dets.push_back(j);
        } else if (conf >= cfg_.tau_low) {
            low_dets.push_back(j);
        }
    }

    std::vector<std::pair<int, int>> matched;  // (track index, detection index)
    std::vector<bool> track_taken(tracks_.size(), false);
    std::vector<bool> det_taken(detections.size(), false);

    auto run_stage = [&](const std::vector<int>& track_idx, const std::vector<int>& det_idx,
                         const CostMatrix& cost) {
        const AssignmentResult assign = hungarian_assign(cost, cfg_.cost_reject);
        for (const auto& [r, c] : assign.matches) {
            const int ti = track_idx[static_cast<std::size_t>(r)];
            const int dj = det_idx[static_cast<std::size_t>(c)];
            matched.emplace_back(ti, dj);
            track_taken[static_cast<std::size_t>(ti)] = true;
            det_taken[static_cast<std::size_t>(dj)] = true;
        }
    };

    // Stage 1: high-confidence detections vs confirmed and lost tracks.
    std::vector<int> stage1_tracks;
    for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) {
        const TrackStatus s = tracks_[static_cast<std::size_t>(i)].status;
        if (s == TrackStatus::confirmed || s == TrackStatus::lost) stage1_tracks.push_back(i);
    }
    {
        std::vector<Tracklet> pool;
        std::vector<Detection> pool_dets;
        for (int i : stage1_tracks) pool.push_back(tracks_[static_cast<std::size_t>(i)]);
        for (int j : high_dets) pool_dets.push_back(detections[static_cast<std::size_t>(j)]);
        run_stage(stage1_tracks, high_dets, build_fused_cost(pool, pool_dets, cfg_));
    }

    // Stage 2: leftover stage-1 tracks recover low-confidence detections on
    // motion cost alone.
    if (cfg_.enable_bistage) {
        std::vector<int> remaining;
        for (int i : stage1_tracks) {
            if (!track_taken[static_cast<std::size_t>(i)]) remaining.push_back(i);
        }
        std::vector<const Tracklet*> pool;
        std::vector<const Detection*> pool_dets;
        for (int i : remaining) pool.push_back(&tracks_[static_cast<std::size_t>(i)]);
        for (int j : low_dets) pool_dets.push_back(&detections[static_cast<std::size_t>(j)]);
        run_stage(remaining, low_dets, build_iou_cost(pool, pool_dets));
    }

    // Tentative tracks claim whatever high-confidence detections are left, so
    // they can accumulate the hits needed to confirm.
    {
        std::vector<int> tentative;
        for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) {
            if (tracks_[static_cast<std::size_t>(i)].status == TrackStatus::tentative) {
                tentative.push_back(i);
            }
        }
        std::vector<int> free_high;
        for (int j : high_dets) {
            if (!det_taken[static_cast<std::size_t>(j)]) free_high.push_back(j);
        }
        std::vector<const Tracklet*> pool;
        std::vector<const Detection*> pool_dets;
        for (int i : tentative) pool.push_back(&tracks_[static_cast<std::size_t>(i)]);
        for (int j : free_high) pool_dets.push_back(&detections[static_cast<std::size_t>(j)]);
        run_stage(tentative, free_high, build_iou_cost(pool, pool_dets));
    }

    std::vector<TrackRecord> records;

    for (const auto& [ti, dj] : matched) {
        Tracklet& track = tracks_[static_cast<std::size_t>(ti)];
        const Detection& det = detections[static_cast<std::size_t>(dj)];
        track = kf_update(track, det);
        track.embedding = ema_update(track.embedding, det.embedding, cfg_.eta_ema);
        if (track.status == TrackStatus::lost) {
            track.status = TrackStatus::confirmed;
        } else if (track.status == TrackStatus::tentative && track.hits >= cfg_.n_init) {
            track.status = TrackStatus::confirmed;
        }
        if (track.status == TrackStatus::confirmed) {
            records.push_back({frame, track.track_id, det.box, det.confidence});
        }
    }

    for (auto& track : tracks_) {
        if (track.time_since_update == 0) continue;  // matched this frame
        if (track.status == TrackStatus::tentative) {
            track.status = TrackStatus::removed;
        } else if (track.status == TrackStatus::confirmed) {
            track.status = TrackStatus::lost;
        }
        if (track.status == TrackStatus::lost && track.time_since_update > cfg_.max_age) {
            track.status = TrackStatus::removed;
        }
    }

    for (int j : high_dets) {
        if (det_taken[static_cast<std::size_t>(j)]) continue;
        const Detection& det = detections[static_cast<std::size_t>(j)];
        Tracklet track = kf_initiate(det, next_id_++);
        if (track.hits >= cfg_.n_init) {
            track.status = TrackStatus::confirmed;
            records.push_back({frame, track.track_id, det.box, det.confidence});
        }
        tracks_.push_back(std::move(track));
    }

    tracks_.erase(std::remove_if(tracks_.begin(), tracks_.end(),
                                 [](const Tracklet& t) {
                                     return t.status == TrackStatus::removed;
                                 }),
                  tracks_.end());

    std::sort(records.begin(), records.end(),
              [](const TrackRecord& a, const TrackRecord& b) { return a.track_id < b.track_id; });
    return records;
}

}  // namespace fasttrack
