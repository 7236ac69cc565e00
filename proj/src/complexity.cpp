#include "fasttrack/complexity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fasttrack {

namespace {

constexpr long long kMaxDim = 1'000'000;  // keeps every cost exactly representable

void check_range(long long v, long long lo, const char* name) {
    if (v < lo || v > kMaxDim) {
        throw std::invalid_argument(std::string("complexity: ") + name + " = " +
                                    std::to_string(v) + " outside [" + std::to_string(lo) +
                                    ", " + std::to_string(kMaxDim) + "]");
    }
}

}  // namespace

void validate(const DecoderCostConfig& cfg) {
    check_range(cfg.n_queries, 0, "n_queries");
    check_range(cfg.delta_n, 0, "delta_n");
    check_range(cfg.channel_dim, 1, "channel_dim");
    check_range(cfg.memory_len, 1, "memory_len");
    check_range(cfg.ffn_dim, 1, "ffn_dim");
}

long long variable_query_cost(const DecoderCostConfig& cfg) {
    validate(cfg);
    const long long nq = cfg.n_queries + cfg.delta_n;
    const long long c = cfg.channel_dim;
    return nq * nq * c + nq * cfg.memory_len * c + 2 * nq * c * cfg.ffn_dim + 2 * nq * c;
}

long long fixed_query_cost(const DecoderCostConfig& cfg) {
    validate(cfg);
    const long long n = cfg.n_queries;
    const long long c = cfg.channel_dim;
    return 2 * n * n * c + n * cfg.memory_len * c + 2 * n * c * cfg.ffn_dim + 2 * n * c;
}

ThresholdResult delta_n_threshold(const DecoderCostConfig& cfg) {
    validate(cfg);
    ThresholdResult res;
    res.b = 2 * cfg.n_queries + cfg.memory_len + 2 * cfg.ffn_dim + 2;
    res.c = -cfg.n_queries * cfg.n_queries;
    res.discriminant = static_cast<double>(res.b) * static_cast<double>(res.b) -
                       4.0 * static_cast<double>(res.c);
    res.sqrt_discriminant = std::sqrt(res.discriminant);
    res.positive_root = (-static_cast<double>(res.b) + res.sqrt_discriminant) / 2.0;

    // Strict inequality: the smallest integer beyond the root.
    res.threshold_from_root =
        static_cast<long long>(std::floor(res.positive_root)) + 1;
    if (res.threshold_from_root < 0) res.threshold_from_root = 0;

    DecoderCostConfig probe = cfg;
    const long long fixed = fixed_query_cost(cfg);
    const long long limit = res.threshold_from_root + 1000;
    long long dn = 0;
    for (; dn <= limit; ++dn) {
        probe.delta_n = dn;
        if (variable_query_cost(probe) > fixed) break;
    }
    if (dn > limit) {
        throw std::logic_error("complexity: inequality scan did not terminate");
    }
    res.threshold_from_scan = dn;
    return res;
}

}  // namespace fasttrack
