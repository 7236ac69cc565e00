#ifndef FASTTRACK_ATTENTION_HPP
#define FASTTRACK_ATTENTION_HPP

#include <vector>

#include "fasttrack/rng.hpp"
#include "fasttrack/tensor.hpp"

namespace fasttrack {

enum class QueryRole { initial, decoder_output, encoder_fused };

// One frame's block of object queries. N stays constant across layers and
// frames; that constancy is what keeps the decoder cost flat (see
// complexity.hpp).
struct QuerySet {
    Matrix queries;  // N x C
    int frame_index = 0;
    QueryRole role = QueryRole::initial;
};

// Validity flags over the N query slots of one frame.
struct HistoricalMask {
    std::vector<bool> kept;
};

struct DecoderLayerParams {
    LinearLayer q_proj;
    LinearLayer k_proj;
    LinearLayer v_proj;
    LinearLayer attn_out;
    LinearLayer visual_q;
    LinearLayer visual_k;
    LinearLayer visual_v;
    LinearLayer visual_out;
    LinearLayer ffn_in;
    LinearLayer ffn_out;
    LayerNormParams norm1;
    LayerNormParams norm2;
    LayerNormParams norm3;
};

enum class QPosMode { none, mlp, decoder_pos };

struct EncoderParams {
    LinearLayer qk_proj;  // one projection produces both queries and keys
    LinearLayer v_proj;
    LinearLayer fuse_out;
    LayerNormParams norm;
    QPosMode q_pos_mode = QPosMode::decoder_pos;
};

// The key/value projections are tied: a single linear map feeds both, so the
// factory draws one layer and shares it.
DecoderLayerParams make_decoder_layer_params(Rng& rng, int channel_dim, int ffn_dim);
EncoderParams make_encoder_params(Rng& rng, int channel_dim,
                                  QPosMode mode = QPosMode::decoder_pos);

// Cross-attention of the current frame's queries against the concatenation of
// themselves with the previous frame's encoded queries: Q is N x C, K and V
// are 2N x C, the attention map is N x 2N. Includes the output projection,
// residual add and layer norm. Row reductions are summed in value order so
// the result is exactly equivariant to permutations of the q_d_t rows.
QuerySet historical_cross_attention(const QuerySet& q_d_t, const QuerySet& q_prev_enc,
                                    const DecoderLayerParams& params,
                                    Matrix* attention_weights = nullptr);

// Full decoder layer: historical cross-attention, visual cross-attention
// against a fixed memory, then the FFN; each sublayer with residual + norm.
QuerySet decoder_layer_forward(const QuerySet& q_in, const QuerySet& q_prev_enc,
                               const Matrix& visual_memory, const DecoderLayerParams& params);

// Stacked decoder; tags the final output as decoder_output.
QuerySet decoder_forward(const QuerySet& q_init, const QuerySet& q_prev_enc,
                         const Matrix& visual_memory,
                         const std::vector<DecoderLayerParams>& layers);

// Single fusing attention layer over the previous frame's decoder output:
// Q = K = Linear(q_f_prev + q_pos), V = Linear(q_f_t). Dropped entries are
// excluded as keys (logit forced to -1e30) and, since their history is
// invalid, their rows of q_f_prev are replaced by the matching q_f_t rows
// before projection — the same fallback the t=1 contract (q_f_prev == q_f_t)
// applies to the whole frame. With every entry dropped the attention is
// bypassed and the projected current queries pass straight through.
QuerySet historical_encoder_forward(const QuerySet& q_f_prev, const QuerySet& q_f_t,
                                    const HistoricalMask& mask, const EncoderParams& params,
                                    const Matrix& q_pos);

// Training-time mask: start from the ground-truth-matched flags, then flip
// kept entries to dropped with probability min(0.5, 2 n_gt / n_q) and dropped
// entries to kept with probability min(max(0.1, n_gt / n_q), 0.2).
HistoricalMask make_training_mask(const std::vector<bool>& matched, int n_gt, int n_q, Rng& rng);

// Inference-time mask: keep entries whose confidence reaches the threshold.
HistoricalMask make_inference_mask(const std::vector<double>& confidences, double threshold);

// Trajectory attention of current-frame embeddings over historical ones
// (Q = emb_t, K = V = emb_h, unprojected), followed by the fuse projection
// and FFN of `params`.
Matrix id_trajectory_attention(const Matrix& emb_t, const Matrix& emb_h,
                               const DecoderLayerParams& params);

}  // namespace fasttrack

#endif
