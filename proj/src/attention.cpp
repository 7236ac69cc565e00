#include "fasttrack/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fasttrack {

namespace {

constexpr double kMaskedLogit = -1e30;

// Sum in ascending value order: the result depends only on the multiset of
// addends, not on their arrival order.
double canonical_sum(std::vector<double>& buf) {
    std::sort(buf.begin(), buf.end());
    double s = 0.0;
    for (double v : buf) s += v;
    return s;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.values) v = std::max(v, 0.0);
    return out;
}

Matrix ffn_forward(const Matrix& x, const DecoderLayerParams& params) {
    return linear_forward(params.ffn_out, relu(linear_forward(params.ffn_in, x)));
}

void require_same_block(const Matrix& a, const Matrix& b, const char* who) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ShapeError(std::string(who) + ": query blocks differ, " + shape_string(a) +
                         " vs " + shape_string(b));
    }
    if (a.rows <= 0 || a.cols <= 0) {
        throw ShapeError(std::string(who) + ": empty query block " + shape_string(a));
    }
}

}  // namespace

DecoderLayerParams make_decoder_layer_params(Rng& rng, int channel_dim, int ffn_dim) {
    DecoderLayerParams p;
    p.q_proj = make_linear(rng, channel_dim, channel_dim);
    p.k_proj = make_linear(rng, channel_dim, channel_dim);
    p.v_proj = p.k_proj;  // K and V come from the same linear map
    p.attn_out = make_linear(rng, channel_dim, channel_dim);
    p.visual_q = make_linear(rng, channel_dim, channel_dim);
    p.visual_k = make_linear(rng, channel_dim, channel_dim);
    p.visual_v = make_linear(rng, channel_dim, channel_dim);
    p.visual_out = make_linear(rng, channel_dim, channel_dim);
    p.ffn_in = make_linear(rng, channel_dim, ffn_dim);
    p.ffn_out = make_linear(rng, ffn_dim, channel_dim);
    p.norm1 = LayerNormParams::unit(channel_dim);
    p.norm2 = LayerNormParams::unit(channel_dim);
    p.norm3 = LayerNormParams::unit(channel_dim);
    return p;
}

EncoderParams make_encoder_params(Rng& rng, int channel_dim, QPosMode mode) {
    EncoderParams p;
    p.qk_proj = make_linear(rng, channel_dim, channel_dim);
    p.v_proj = make_linear(rng, channel_dim, channel_dim);
    p.fuse_out = make_linear(rng, channel_dim, channel_dim);
    p.norm = LayerNormParams::unit(channel_dim);
    p.q_pos_mode = mode;
    return p;
}

QuerySet historical_cross_attention(const QuerySet& q_d_t, const QuerySet& q_prev_enc,
                                    const DecoderLayerParams& params,
                                    Matrix* attention_weights) {
    require_same_block(q_d_t.queries, q_prev_enc.queries, "historical_cross_attention");
    if (q_prev_enc.role == QueryRole::initial) {
        throw std::invalid_argument(
            "historical_cross_attention: previous-frame queries must be encoder_fused "
            "(or decoder_output on the first frame)");
    }
    const Matrix& qd = q_d_t.queries;
    const int n = qd.rows;
    const int c = qd.cols;

    const Matrix q = linear_forward(params.q_proj, qd);
    const Matrix kv_in = concat_rows(qd, q_prev_enc.queries);
    const Matrix k = linear_forward(params.k_proj, kv_in);
    const Matrix v = linear_forward(params.v_proj, kv_in);
    const int kn = k.rows;  // 2N
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(c));

    Matrix weights(n, kn);
    Matrix attended(n, c);
    std::vector<double> exps(static_cast<std::size_t>(kn));
    std::vector<double> buf(static_cast<std::size_t>(kn));
    std::vector<int> order(static_cast<std::size_t>(kn));
    for (int i = 0; i < n; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < kn; ++j) {
            double logit = 0.0;
            for (int t = 0; t < c; ++t) logit += q.at(i, t) * k.at(j, t);
            logit *= inv_scale;
            weights.at(i, j) = logit;  // scratch
            row_max = std::max(row_max, logit);
        }
        for (int j = 0; j < kn; ++j) {
            exps[static_cast<std::size_t>(j)] = std::exp(weights.at(i, j) - row_max);
        }
        buf = exps;
        const double denom = canonical_sum(buf);
        for (int j = 0; j < kn; ++j) {
            weights.at(i, j) = exps[static_cast<std::size_t>(j)] / denom;
        }

        // One canonical key order per row, shared by every output column:
        // sorted by weight, ties broken by value-row content, so the
        // accumulation sequence depends only on the multiset of
        // (weight, value-row) pairs, never on the input ordering.
        for (int j = 0; j < kn; ++j) order[static_cast<std::size_t>(j)] = j;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double wa = weights.at(i, a);
            const double wb = weights.at(i, b);
            if (wa != wb) return wa < wb;
            for (int t = 0; t < c; ++t) {
                if (v.at(a, t) != v.at(b, t)) return v.at(a, t) < v.at(b, t);
            }
            return false;
        });
        for (int t = 0; t < c; ++t) {
            double sum = 0.0;
            for (int j : order) sum += weights.at(i, j) * v.at(j, t);
            attended.at(i, t) = sum;
        }
    }

    const Matrix projected = linear_forward(params.attn_out, attended);
    QuerySet out;
    out.queries = layer_norm(add(qd, projected), params.norm1);
    out.frame_index = q_d_t.frame_index;
    out.role = q_d_t.role;
    if (attention_weights) *attention_weights = weights;
    return out;
}

QuerySet decoder_layer_forward(const QuerySet& q_in, const QuerySet& q_prev_enc,
                               const Matrix& visual_memory, const DecoderLayerParams& params) {
    if (visual_memory.cols != q_in.queries.cols) {
        throw ShapeError("decoder_layer_forward: visual memory " + shape_string(visual_memory) +
                         " does not match query width " + shape_string(q_in.queries));
    }
    QuerySet h = historical_cross_attention(q_in, q_prev_enc, params);

    const Matrix vq = linear_forward(params.visual_q, h.queries);
    const Matrix vk = linear_forward(params.visual_k, visual_memory);
    const Matrix vv = linear_forward(params.visual_v, visual_memory);
    const AttentionResult vis = scaled_dot_attention(vq, vk, vv);
    const Matrix h2 =
        layer_norm(add(h.queries, linear_forward(params.visual_out, vis.out)), params.norm2);

    const Matrix h3 = layer_norm(add(h2, ffn_forward(h2, params)), params.norm3);

    QuerySet out;
    out.queries = h3;
    out.frame_index = q_in.frame_index;
    out.role = q_in.role;
    return out;
}

QuerySet decoder_forward(const QuerySet& q_init, const QuerySet& q_prev_enc,
                         const Matrix& visual_memory,
                         const std::vector<DecoderLayerParams>& layers) {
    if (layers.empty()) throw std::invalid_argument("decoder_forward: no layers");
    QuerySet q = q_init;
    for (const auto& layer : layers) {
        q = decoder_layer_forward(q, q_prev_enc, visual_memory, layer);
    }
    q.role = QueryRole::decoder_output;
    return q;
}

QuerySet historical_encoder_forward(const QuerySet& q_f_prev, const QuerySet& q_f_t,
                                    const HistoricalMask& mask, const EncoderParams& params,
                                    const Matrix& q_pos) {
    require_same_block(q_f_prev.queries, q_f_t.queries, "historical_encoder_forward");
    require_same_block(q_f_prev.queries, q_pos, "historical_encoder_forward (q_pos)");
    const int n = q_f_t.queries.rows;
    const int c = q_f_t.queries.cols;
    if (static_cast<int>(mask.kept.size()) != n) {
        throw ShapeError("historical_encoder_forward: mask length " +
                         std::to_string(mask.kept.size()) + " does not match N = " +
                         std::to_string(n));
    }

    const Matrix v = linear_forward(params.v_proj, q_f_t.queries);
    const int kept_count =
        static_cast<int>(std::count(mask.kept.begin(), mask.kept.end(), true));

    Matrix fused;
    if (kept_count == 0) {
        fused = v;
    } else {
        Matrix base(n, c);
        for (int i = 0; i < n; ++i) {
            const Matrix& src = mask.kept[static_cast<std::size_t>(i)] ? q_f_prev.queries
                                                                       : q_f_t.queries;
            for (int j = 0; j < c; ++j) base.at(i, j) = src.at(i, j) + q_pos.at(i, j);
        }
        const Matrix qk = linear_forward(params.qk_proj, base);
        const double inv_scale = 1.0 / std::sqrt(static_cast<double>(c));
        Matrix logits(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (!mask.kept[static_cast<std::size_t>(j)]) {
                    logits.at(i, j) = kMaskedLogit;
                    continue;
                }
                double dot = 0.0;
                for (int t = 0; t < c; ++t) dot += qk.at(i, t) * qk.at(j, t);
                logits.at(i, j) = dot * inv_scale;
            }
        }
        fused = matmul(row_softmax(logits), v);
    }

    QuerySet out;
    out.queries = layer_norm(linear_forward(params.fuse_out, fused), params.norm);
    out.frame_index = q_f_t.frame_index;
    out.role = QueryRole::encoder_fused;
    return out;
}

HistoricalMask make_training_mask(const std::vector<bool>& matched, int n_gt, int n_q,
                                  Rng& rng) {
    if (n_q <= 0) throw std::invalid_argument("make_training_mask: n_q must be positive");
    if (n_gt < 0 || n_gt > n_q) {
        throw std::invalid_argument("make_training_mask: n_gt must lie in [0, n_q], got " +
                                    std::to_string(n_gt) + " with n_q = " + std::to_string(n_q));
    }
    if (static_cast<int>(matched.size()) != n_q) {
        throw std::invalid_argument("make_training_mask: matched length " +
                                    std::to_string(matched.size()) + " must equal n_q = " +
                                    std::to_string(n_q));
    }
    const double ratio = static_cast<double>(n_gt) / static_cast<double>(n_q);
    const double drop_prob = std::min(0.5, 2.0 * ratio);
    const double keep_prob = std::min(std::max(0.1, ratio), 0.2);

    HistoricalMask mask;
    mask.kept.resize(matched.size());
    for (std::size_t i = 0; i < matched.size(); ++i) {
        const double u = rng.uniform01();
        mask.kept[i] = matched[i] ? (u >= drop_prob) : (u < keep_prob);
    }
    return mask;
}

HistoricalMask make_inference_mask(const std::vector<double>& confidences, double threshold) {
    HistoricalMask mask;
    mask.kept.resize(confidences.size());
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        mask.kept[i] = confidences[i] >= threshold;
    }
    return mask;
}

Matrix id_trajectory_attention(const Matrix& emb_t, const Matrix& emb_h,
                               const DecoderLayerParams& params) {
    if (emb_t.cols != emb_h.cols) {
        throw ShapeError("id_trajectory_attention: embedding widths differ, " +
                         shape_string(emb_t) + " vs " + shape_string(emb_h));
    }
    const AttentionResult att = scaled_dot_attention(emb_t, emb_h, emb_h);
    const Matrix fused = linear_forward(params.attn_out, att.out);
    return layer_norm(add(fused, ffn_forward(fused, params)), params.norm3);
}

}  // namespace fasttrack
