#include "fasttrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fasttrack/mot_io.hpp"

namespace fasttrack {

void validate(const AttentionPipelineConfig& cfg) {
    if (cfg.num_queries <= 0 || cfg.num_layers <= 0 || cfg.memory_len <= 0) {
        throw std::invalid_argument("attention pipeline: counts must be positive");
    }
    if (cfg.ffn_dim < 0) {
        throw std::invalid_argument("attention pipeline: ffn_dim must be nonnegative");
    }
}

AttentionPipelineState build_attention_state(const AttentionPipelineConfig& cfg,
                                             int channel_dim) {
    validate(cfg);
    if (channel_dim <= 0) {
        throw std::invalid_argument("attention pipeline: channel dim must be positive");
    }
    const int ffn_dim = cfg.ffn_dim > 0 ? cfg.ffn_dim : 4 * channel_dim;

    Rng rng(cfg.param_seed);
    AttentionPipelineState state;
    state.layers.reserve(static_cast<std::size_t>(cfg.num_layers));
    for (int i = 0; i < cfg.num_layers; ++i) {
        state.layers.push_back(make_decoder_layer_params(rng, channel_dim, ffn_dim));
    }
    state.encoder = make_encoder_params(rng, channel_dim, cfg.q_pos_mode);

    state.decoder_pos = Matrix(cfg.num_queries, channel_dim);
    const double limit = std::sqrt(6.0 / (cfg.num_queries + channel_dim));
    for (double& v : state.decoder_pos.values) v = rng.uniform(-limit, limit);

    state.mlp_in = make_linear(rng, 4, channel_dim);
    state.mlp_out = make_linear(rng, channel_dim, channel_dim);

    state.memory = Matrix(cfg.memory_len, channel_dim);
    for (double& v : state.memory.values) v = rng.normal(0.0, 1.0);
    return state;
}

AttentionFeaturePipeline::AttentionFeaturePipeline(const AttentionPipelineConfig& cfg,
                                                   int channel_dim)
    : cfg_(cfg), channel_dim_(channel_dim), state_(build_attention_state(cfg, channel_dim)) {}

Matrix AttentionFeaturePipeline::q_pos_for(const std::vector<Detection>& detections) const {
    switch (cfg_.q_pos_mode) {
        case QPosMode::none:
            return Matrix(cfg_.num_queries, channel_dim_, 0.0);
        case QPosMode::decoder_pos:
            return state_.decoder_pos;
        case QPosMode::mlp: {
            Matrix features(cfg_.num_queries, 4, 0.0);
            for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
                const BoundingBox& box = detections[static_cast<std::size_t>(i)].box;
                features.at(i, 0) = box.center_x() * 1e-3;
                features.at(i, 1) = box.center_y() * 1e-3;
                features.at(i, 2) = box.width * 1e-3;
                features.at(i, 3) = box.height * 1e-3;
            }
            Matrix hidden = linear_forward(state_.mlp_in, features);
            for (double& v : hidden.values) v = std::max(v, 0.0);
            return linear_forward(state_.mlp_out, hidden);
        }
    }
    return Matrix(cfg_.num_queries, channel_dim_, 0.0);
}

std::vector<Detection> AttentionFeaturePipeline::process(
    int frame, const std::vector<Detection>& detections) {
    if (last_frame_ && frame <= *last_frame_) {
        throw SequenceError("attention pipeline: frame " + std::to_string(frame) +
                            " is not after frame " + std::to_string(*last_frame_));
    }
    last_frame_ = frame;
    const int k = static_cast<int>(detections.size());
    if (k > cfg_.num_queries) {
        throw std::invalid_argument("attention pipeline: " + std::to_string(k) +
                                    " detections exceed " + std::to_string(cfg_.num_queries) +
                                    " query slots");
    }

    QuerySet q_init;
    q_init.queries = Matrix(cfg_.num_queries, channel_dim_, 0.0);
    q_init.frame_index = frame;
    q_init.role = QueryRole::initial;
    std::vector<double> confidences(static_cast<std::size_t>(cfg_.num_queries), 0.0);
    for (int i = 0; i < k; ++i) {
        const Detection& det = detections[static_cast<std::size_t>(i)];
        if (static_cast<int>(det.embedding.size()) != channel_dim_) {
            throw ShapeError("attention pipeline: embedding dim " +
                             std::to_string(det.embedding.size()) + " does not match channels " +
                             std::to_string(channel_dim_));
        }
        for (int j = 0; j < channel_dim_; ++j) {
            q_init.queries.at(i, j) = det.embedding[static_cast<std::size_t>(j)];
        }
        confidences[static_cast<std::size_t>(i)] = det.confidence;
    }

    // On the first frame there is no encoded history; the decoder keys fall
    // back to the frame's own initial queries, the standard-decoder surrogate.
    QuerySet q_prev;
    if (prev_encoded_) {
        q_prev = *prev_encoded_;
    } else {
        q_prev = q_init;
        q_prev.role = QueryRole::decoder_output;
    }

    const QuerySet decoded = decoder_forward(q_init, q_prev, state_.memory, state_.layers);
    if (decoded.queries.rows != cfg_.num_queries) {
        throw std::logic_error("attention pipeline: query count changed across the decoder");
    }

    const HistoricalMask mask = make_inference_mask(confidences, cfg_.mask_threshold);
    // t = 1 contract: with no history yet, the previous queries are the
    // current ones.
    const QuerySet& q_f_prev = prev_encoded_ ? *prev_encoded_ : decoded;
    prev_encoded_ = historical_encoder_forward(q_f_prev, decoded, mask, state_.encoder,
                                               q_pos_for(detections));

    std::vector<Detection> out = detections;
    for (int i = 0; i < k; ++i) {
        std::vector<double> emb(static_cast<std::size_t>(channel_dim_));
        double norm_sq = 0.0;
        for (int j = 0; j < channel_dim_; ++j) {
            emb[static_cast<std::size_t>(j)] = decoded.queries.at(i, j);
            norm_sq += emb[static_cast<std::size_t>(j)] * emb[static_cast<std::size_t>(j)];
        }
        const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
        for (double& v : emb) v *= inv;
        out[static_cast<std::size_t>(i)].embedding = std::move(emb);
    }
    return out;
}

PipelineResult run_pipeline(const std::vector<FrameObservations>& frames,
                            const AssociationConfig& assoc_cfg,
                            const std::optional<AttentionPipelineConfig>& attn_cfg) {
    PipelineResult result;
    Tracker tracker(assoc_cfg);

    std::optional<AttentionFeaturePipeline> attention;
    if (attn_cfg) {
        int channel_dim = 0;
        for (const auto& obs : frames) {
            if (!obs.detections.empty()) {
                channel_dim = static_cast<int>(obs.detections.front().embedding.size());
                break;
            }
        }
        if (channel_dim > 0) {
            attention.emplace(*attn_cfg, channel_dim);
        }
    }

    for (const auto& obs : frames) {
        std::vector<Detection> dets = obs.detections;
        if (attention) {
            dets = attention->process(obs.frame, dets);
            if (dets.size() != obs.detections.size()) {
                throw std::logic_error("attention pipeline changed the detection count");
            }
        }
        const auto records = tracker.step(obs.frame, dets);
        result.records.insert(result.records.end(), records.begin(), records.end());
    }

    std::vector<LabeledFrame> gt;
    long long gt_total = 0;
    for (const auto& obs : frames) {
        gt.push_back(obs.ground_truth);
        gt_total += static_cast<long long>(obs.ground_truth.entries.size());
    }
    if (gt_total > 0) {
        const auto res_frames = rows_to_labeled_frames(to_mot_rows(result.records));
        result.metrics = evaluate_all(gt, res_frames);
        result.has_metrics = true;
    }
    return result;
}

}  // namespace fasttrack
