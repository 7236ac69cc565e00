#include "fasttrack/reid_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fasttrack {

namespace {

constexpr double kProbFloor = 1e-12;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// log(sum exp(x_i)) with max shift; -inf on an empty list.
double log_sum_exp(const std::vector<double>& xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(xs.begin(), xs.end());
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

void validate(const CircleLossParams& p) {
    if (!(p.margin > 0.0 && p.margin < 1.0)) {
        throw std::invalid_argument("circle loss margin must lie in (0, 1), got " +
                                    std::to_string(p.margin));
    }
    if (!(p.gamma > 0.0)) {
        throw std::invalid_argument("circle loss gamma must be positive, got " +
                                    std::to_string(p.gamma));
    }
}

}  // namespace

SimilarityPairs build_similarity_pairs(
    const std::vector<std::vector<EmbeddedIdentity>>& frames) {
    for (const auto& frame : frames) {
        for (const auto& item : frame) {
            const double norm = std::sqrt(dot(item.embedding, item.embedding));
            if (std::abs(norm - 1.0) > 1e-9) {
                throw std::invalid_argument(
                    "build_similarity_pairs: embedding for identity " +
                    std::to_string(item.identity) + " is not unit length (norm " +
                    std::to_string(norm) + ")");
            }
        }
    }
    SimilarityPairs pairs;
    for (std::size_t fa = 0; fa < frames.size(); ++fa) {
        for (std::size_t fb = fa + 1; fb < frames.size(); ++fb) {
            for (const auto& a : frames[fa]) {
                for (const auto& b : frames[fb]) {
                    const double sim = dot(a.embedding, b.embedding);
                    if (a.identity == b.identity) {
                        pairs.s_p.push_back(sim);
                    } else {
                        pairs.s_n.push_back(sim);
                    }
                }
            }
        }
    }
    return pairs;
}

CircleLossResult circle_loss(const SimilarityPairs& pairs, const CircleLossParams& params) {
    validate(params);
    CircleLossResult res;
    res.d_s_p.assign(pairs.s_p.size(), 0.0);
    res.d_s_n.assign(pairs.s_n.size(), 0.0);
    if (pairs.s_p.empty() && pairs.s_n.empty()) return res;

    const double m = params.margin;
    const double gamma = params.gamma;
    const double o_p = 1.0 + m;
    const double o_n = -m;
    const double delta_p = 1.0 - m;
    const double delta_n = m;

    std::vector<double> pos_exponents(pairs.s_p.size());
    std::vector<double> pos_alpha(pairs.s_p.size());
    for (std::size_t i = 0; i < pairs.s_p.size(); ++i) {
        pos_alpha[i] = std::max(0.0, o_p - pairs.s_p[i]);
        pos_exponents[i] = -gamma * pos_alpha[i] * (pairs.s_p[i] - delta_p);
    }
    std::vector<double> neg_exponents(pairs.s_n.size());
    std::vector<double> neg_alpha(pairs.s_n.size());
    for (std::size_t j = 0; j < pairs.s_n.size(); ++j) {
        neg_alpha[j] = std::max(0.0, pairs.s_n[j] - o_n);
        neg_exponents[j] = gamma * neg_alpha[j] * (pairs.s_n[j] - delta_n);
    }

    const double log_sum_pos = log_sum_exp(pos_exponents);
    const double log_sum_neg = log_sum_exp(neg_exponents);
    const double z = log_sum_neg + log_sum_pos;  // -inf when either side is empty
    if (std::isinf(z) && z < 0.0) {
        return res;  // loss = log(1 + 0) with zero gradients
    }
    res.loss = softplus(z);

    // d loss / d s = sigmoid(z) * softmax-weight within the pair's own sum
    // * (+-gamma alpha). The weighting factors alpha are held constant.
    const double sig = sigmoid(z);
    for (std::size_t i = 0; i < pairs.s_p.size(); ++i) {
        const double w = std::exp(pos_exponents[i] - log_sum_pos);
        res.d_s_p[i] = sig * w * (-gamma * pos_alpha[i]);
    }
    for (std::size_t j = 0; j < pairs.s_n.size(); ++j) {
        const double w = std::exp(neg_exponents[j] - log_sum_neg);
        res.d_s_n[j] = sig * w * (gamma * neg_alpha[j]);
    }
    return res;
}

double triplet_loss(double anchor_pos_sim, double anchor_neg_sim, double margin) {
    return std::max(0.0, (1.0 - anchor_pos_sim) - (1.0 - anchor_neg_sim) + margin);
}

IdLossResult motip_id_loss(const IdClassScores& scores) {
    IdLossResult res;
    double total = 0.0;
    long long count = 0;
    for (const auto& frame : scores.frames) {
        for (const auto& object : frame) {
            if (object.probs.empty()) {
                throw std::invalid_argument("motip_id_loss: empty probability vector");
            }
            double sum = 0.0;
            for (double p : object.probs) sum += p;
            if (std::abs(sum - 1.0) > 1e-9) {
                throw std::invalid_argument(
                    "motip_id_loss: probabilities sum to " + std::to_string(sum) +
                    ", expected 1");
            }
            if (object.true_class < 0 ||
                object.true_class >= static_cast<int>(object.probs.size())) {
                throw std::invalid_argument("motip_id_loss: true class out of range");
            }
            double p = object.probs[static_cast<std::size_t>(object.true_class)];
            if (p < kProbFloor) {
                p = kProbFloor;
                res.clamped = true;
            }
            total += -std::log(p);
            ++count;
        }
    }
    res.loss = count > 0 ? total / static_cast<double>(count) : 0.0;
    return res;
}

double overall_loss(double l_reid, double l_det, const LossWeights& w) {
    if (w.lambda_reid < 0.0 || w.lambda_det < 0.0) {
        throw std::invalid_argument("loss weights must be nonnegative");
    }
    return w.lambda_reid * l_reid + w.lambda_det * l_det;
}

double sum_layer_losses(const std::vector<SimilarityPairs>& per_layer,
                        const CircleLossParams& params) {
    double total = 0.0;
    for (const auto& pairs : per_layer) total += circle_loss(pairs, params).loss;
    return total;
}

}  // namespace fasttrack
