#ifndef FASTTRACK_REID_LOSS_HPP
#define FASTTRACK_REID_LOSS_HPP

#include <vector>

namespace fasttrack {

// Cosine similarities of cross-frame embedding pairs: s_p within an identity,
// s_n across identities.
struct SimilarityPairs {
    std::vector<double> s_p;
    std::vector<double> s_n;
};

struct CircleLossParams {
    double margin = 0.25;
    double gamma = 64.0;
};

struct LossWeights {
    double lambda_reid = 1.0;
    double lambda_det = 1.0;
};

struct CircleLossResult {
    double loss = 0.0;
    std::vector<double> d_s_p;  // d loss / d s_p, same length as s_p
    std::vector<double> d_s_n;
};

struct EmbeddedIdentity {
    std::vector<double> embedding;  // unit L2 norm
    int identity = 0;
};

// Enumerates every cross-frame pair (no within-frame pairs), frame-major and
// index-minor, splitting by identity agreement. Throws if an embedding is not
// unit length within 1e-9.
SimilarityPairs build_similarity_pairs(const std::vector<std::vector<EmbeddedIdentity>>& frames);

// log(1 + sum_j exp(gamma a_n^j (s_n^j - d_n)) * sum_i exp(-gamma a_p^i (s_p^i - d_p)))
// with a_p = [1 + m - s_p]+, a_n = [s_n + m]+, d_p = 1 - m, d_n = m. The
// weighting factors are treated as constants when differentiating. Both the
// loss and its gradients are computed through shifted log-sum-exp so large
// gamma cannot overflow.
CircleLossResult circle_loss(const SimilarityPairs& pairs, const CircleLossParams& params);

// Hinge on cosine distances: max(0, (1 - s_ap) - (1 - s_an) + margin).
double triplet_loss(double anchor_pos_sim, double anchor_neg_sim, double margin);

// Per-object probability vectors over K+1 identity classes, grouped by frame.
struct IdClassScores {
    struct ObjectScore {
        std::vector<double> probs;
        int true_class = 0;
    };
    std::vector<std::vector<ObjectScore>> frames;
};

struct IdLossResult {
    double loss = 0.0;
    bool clamped = false;  // true when a true-class probability hit the 1e-12 floor
};

// Cross-entropy over identity classes, averaged by the total object count
// across frames.
IdLossResult motip_id_loss(const IdClassScores& scores);

double overall_loss(double l_reid, double l_det, const LossWeights& w);

// Per-decoder-layer losses are summed, mirroring supervision of every layer's
// output.
double sum_layer_losses(const std::vector<SimilarityPairs>& per_layer,
                        const CircleLossParams& params);

}  // namespace fasttrack

#endif
