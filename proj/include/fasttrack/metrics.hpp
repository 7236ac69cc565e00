#ifndef FASTTRACK_METRICS_HPP
#define FASTTRACK_METRICS_HPP

#include <vector>

#include "fasttrack/box.hpp"

namespace fasttrack {

struct LabeledBox {
    int identity = 0;
    BoundingBox box;
};

// Ground-truth or result entries of one frame; identities unique per frame.
struct LabeledFrame {
    int frame = 0;
    std::vector<LabeledBox> entries;
};

struct MetricCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long idsw = 0;
    long long gt_total = 0;
};

struct MotaResult {
    double score = 0.0;
    MetricCounts counts;
};

// CLEAR accuracy: per-frame matching at the IoU threshold, with previous
//-frame pairings kept when still valid; identity switches counted against a
// ground-truth object's most recent hypothesis.
MotaResult mota(const std::vector<LabeledFrame>& gt, const std::vector<LabeledFrame>& res,
                double iou_thresh = 0.5);

// Identity F1 under the optimal global correspondence of ground-truth and
// predicted identities.
double idf1(const std::vector<LabeledFrame>& gt, const std::vector<LabeledFrame>& res,
            double iou_thresh = 0.5);

struct HotaResult {
    double hota = 0.0;
    double deta = 0.0;
    double assa = 0.0;
    std::vector<double> alphas;       // 0.05 .. 0.95
    std::vector<double> hota_alpha;   // per-alpha scores, same length
    std::vector<double> deta_alpha;
    std::vector<double> assa_alpha;
};

// Higher-order tracking accuracy averaged over localization thresholds
// alpha in {0.05, 0.10, ..., 0.95}; per alpha, HOTA = sqrt(DetA * AssA).
HotaResult hota(const std::vector<LabeledFrame>& gt, const std::vector<LabeledFrame>& res);

struct MetricReport {
    double mota = 0.0;
    double idf1 = 0.0;
    double hota = 0.0;
    double deta = 0.0;
    double assa = 0.0;
    MetricCounts counts;
};

MetricReport evaluate_all(const std::vector<LabeledFrame>& gt,
                          const std::vector<LabeledFrame>& res, double iou_thresh = 0.5);

}  // namespace fasttrack

#endif
