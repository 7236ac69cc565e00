#ifndef FASTTRACK_COMPLEXITY_HPP
#define FASTTRACK_COMPLEXITY_HPP

namespace fasttrack {

// Inputs of the per-decoder-layer cost model. Costs are dimensionless
// multiply-accumulate counts; no constant factors are applied.
struct DecoderCostConfig {
    long long n_queries = 300;   // N
    long long delta_n = 0;       // extra queries of the variable-query decoder
    long long channel_dim = 256; // C
    long long memory_len = 8400; // M, keys/values of the visual cross-attention
    long long ffn_dim = 1024;    // d_ff
};

void validate(const DecoderCostConfig& cfg);

// Decoder layer whose query count grows to N + dN: self-attention
// (N+dN)^2 C, cross-attention (N+dN) M C, FFN 2 (N+dN) C d_ff, and two
// norms 2 (N+dN) C.
long long variable_query_cost(const DecoderCostConfig& cfg);

// Decoder layer with N queries attending over 2N keys: 2 N^2 C + N M C +
// 2 N C d_ff + 2 N C. Independent of delta_n.
long long fixed_query_cost(const DecoderCostConfig& cfg);

struct ThresholdResult {
    long long b = 0;              // 2N + M + 2 d_ff + 2
    long long c = 0;              // -N^2
    double discriminant = 0.0;    // b^2 - 4c
    double sqrt_discriminant = 0.0;
    double positive_root = 0.0;
    // Smallest integer dN with variable cost strictly above fixed cost,
    // derived two ways; they must agree.
    long long threshold_from_root = 0;
    long long threshold_from_scan = 0;
};

// Solves dN^2 + b dN - N^2 > 0 in closed form and confirms the resulting
// integer threshold by scanning the cost inequality directly.
ThresholdResult delta_n_threshold(const DecoderCostConfig& cfg);

}  // namespace fasttrack

#endif
