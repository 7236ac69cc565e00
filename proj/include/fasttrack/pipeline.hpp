#ifndef FASTTRACK_PIPELINE_HPP
#define FASTTRACK_PIPELINE_HPP

#include <optional>
#include <vector>

#include "fasttrack/attention.hpp"
#include "fasttrack/metrics.hpp"
#include "fasttrack/scenario.hpp"
#include "fasttrack/tracker.hpp"

namespace fasttrack {

struct AttentionPipelineConfig {
    int num_queries = 32;   // fixed slot count N, constant across frames
    int num_layers = 6;
    int memory_len = 64;    // synthetic visual memory rows
    int ffn_dim = 0;        // 0 means 4 * channel dim
    double mask_threshold = 0.5;
    QPosMode q_pos_mode = QPosMode::decoder_pos;
    std::uint64_t param_seed = 7777;
};

void validate(const AttentionPipelineConfig& cfg);

// All learned parameters and the fixed memory, built deterministically from
// the config seed so a driver and its verification can reconstruct the same
// state.
struct AttentionPipelineState {
    std::vector<DecoderLayerParams> layers;
    EncoderParams encoder;
    Matrix decoder_pos;   // per-slot positional matrix (decoder_pos mode)
    LinearLayer mlp_in;   // box-coordinate positional MLP (mlp mode)
    LinearLayer mlp_out;
    Matrix memory;        // memory_len x channel_dim
};

AttentionPipelineState build_attention_state(const AttentionPipelineConfig& cfg,
                                             int channel_dim);

// Per-frame feature path: detections fill the leading slots of an N x C query
// block, run through the stacked decoder (keys from the previous frame's
// encoded queries) and the masked historical encoder, whose output becomes
// the next frame's history. Detection embeddings are replaced by their slot's
// decoder output, re-normalized; count and order are preserved.
class AttentionFeaturePipeline {
  public:
    AttentionFeaturePipeline(const AttentionPipelineConfig& cfg, int channel_dim);

    std::vector<Detection> process(int frame, const std::vector<Detection>& detections);

    int num_queries() const { return cfg_.num_queries; }
    const std::optional<QuerySet>& previous_encoded() const { return prev_encoded_; }
    const AttentionPipelineState& state() const { return state_; }

    // Positional term fed to the encoder for this frame's detections.
    Matrix q_pos_for(const std::vector<Detection>& detections) const;

  private:
    AttentionPipelineConfig cfg_;
    int channel_dim_;
    AttentionPipelineState state_;
    std::optional<QuerySet> prev_encoded_;
    std::optional<int> last_frame_;
};

struct PipelineResult {
    std::vector<TrackRecord> records;
    MetricReport metrics;
    bool has_metrics = false;
};

// Runs the tracker over a scenario, optionally routing detections through the
// attention feature path first, and scores against the ground truth.
PipelineResult run_pipeline(const std::vector<FrameObservations>& frames,
                            const AssociationConfig& assoc_cfg,
                            const std::optional<AttentionPipelineConfig>& attn_cfg);

}  // namespace fasttrack

#endif
