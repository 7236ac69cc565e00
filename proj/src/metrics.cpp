#include "fasttrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "fasttrack/assignment.hpp"

namespace fasttrack {

namespace {

struct FramePair {
    const LabeledFrame* gt = nullptr;   // may be null (no GT this frame)
    const LabeledFrame* res = nullptr;  // may be null
};

void validate_frames(const std::vector<LabeledFrame>& frames, const char* what) {
    for (const auto& frame : frames) {
        std::set<int> ids;
        for (const auto& entry : frame.entries) {
            if (!ids.insert(entry.identity).second) {
                throw std::invalid_argument(std::string(what) + " frame " +
                                            std::to_string(frame.frame) +
                                            " repeats identity " +
                                            std::to_string(entry.identity));
            }
        }
    }
}

// Aligns the two streams over the union of frame indices.
std::map<int, FramePair> align(const std::vector<LabeledFrame>& gt,
                               const std::vector<LabeledFrame>& res) {
    std::map<int, FramePair> out;
    for (const auto& f : gt) out[f.frame].gt = &f;
    for (const auto& f : res) out[f.frame].res = &f;
    return out;
}

long long total_entries(const std::vector<LabeledFrame>& frames) {
    long long n = 0;
    for (const auto& f : frames) n += static_cast<long long>(f.entries.size());
    return n;
}

Matrix iou_matrix(const LabeledFrame* gt, const LabeledFrame* res) {
    const int g = gt ? static_cast<int>(gt->entries.size()) : 0;
    const int r = res ? static_cast<int>(res->entries.size()) : 0;
    Matrix m(g, r);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < r; ++j) {
            m.at(i, j) = iou(gt->entries[static_cast<std::size_t>(i)].box,
                             res->entries[static_cast<std::size_t>(j)].box);
        }
    }
    return m;
}

// Optimal matching of one frame at the given IoU floor; returns (gt index,
// res index) pairs. `pre` holds indices already matched by carry-over.
std::vector<std::pair<int, int>> match_frame(const Matrix& ious, double min_iou,
                                             const std::vector<std::pair<int, int>>& pre = {}) {
    std::vector<bool> gt_used(static_cast<std::size_t>(ious.rows), false);
    std::vector<bool> res_used(static_cast<std::size_t>(ious.cols), false);
    std::vector<std::pair<int, int>> matches = pre;
    for (const auto& [gi, rj] : pre) {
        gt_used[static_cast<std::size_t>(gi)] = true;
        res_used[static_cast<std::size_t>(rj)] = true;
    }

    std::vector<int> free_gt;
    std::vector<int> free_res;
    for (int i = 0; i < ious.rows; ++i) {
        if (!gt_used[static_cast<std::size_t>(i)]) free_gt.push_back(i);
    }
    for (int j = 0; j < ious.cols; ++j) {
        if (!res_used[static_cast<std::size_t>(j)]) free_res.push_back(j);
    }
    if (free_gt.empty() || free_res.empty()) return matches;

    CostMatrix cost;
    cost.values = Matrix(static_cast<int>(free_gt.size()), static_cast<int>(free_res.size()));
    cost.gated.assign(free_gt.size() * free_res.size(), false);
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
        for (std::size_t b = 0; b < free_res.size(); ++b) {
            const double v = ious.at(free_gt[a], free_res[b]);
            cost.values.at(static_cast<int>(a), static_cast<int>(b)) = 1.0 - v;
            if (v < min_iou) cost.gated[a * free_res.size() + b] = true;
        }
    }
    const AssignmentResult assign = hungarian_assign(cost, 1.0 - min_iou);
    for (const auto& [a, b] : assign.matches) {
        matches.emplace_back(free_gt[static_cast<std::size_t>(a)],
                             free_res[static_cast<std::size_t>(b)]);
    }
    return matches;
}

}  // namespace

MotaResult mota(const std::vector<LabeledFrame>& gt, const std::vector<LabeledFrame>& res,
                double iou_thresh) {
    validate_frames(gt, "ground truth");
    validate_frames(res, "result");
    MotaResult out;
    out.counts.gt_total = total_entries(gt);
    if (out.counts.gt_total == 0) {
        throw std::invalid_argument("mota: ground truth is empty; score undefined");
    }

    std::map<int, int> last_match;  // gt identity -> most recent hypothesis identity
    for (const auto& [frame, pair] : align(gt, res)) {
        (void)frame;
        const Matrix ious = iou_matrix(pair.gt, pair.res);

        // Carry-over: keep still-valid pairings from the previous frames.
        std::vector<std::pair<int, int>> pre;
        std::vector<bool> res_claimed(static_cast<std::size_t>(ious.cols), false);
        if (pair.gt && pair.res) {
            for (int gi = 0; gi < ious.rows; ++gi) {
                const int gid = pair.gt->entries[static_cast<std::size_t>(gi)].identity;
                const auto it = last_match.find(gid);
                if (it == last_match.end()) continue;
                for (int rj = 0; rj < ious.cols; ++rj) {
                    if (res_claimed[static_cast<std::size_t>(rj)]) continue;
                    if (pair.res->entries[static_cast<std::size_t>(rj)].identity != it->second)
                        continue;
                    if (ious.at(gi, rj) >= iou_thresh) {
                        pre.emplace_back(gi, rj);
                        res_claimed[static_cast<std::size_t>(rj)] = true;
                    }
                    break;
                }
            }
        }

        const auto matches = match_frame(ious, iou_thresh, pre);
        for (const auto& [gi, rj] : matches) {
            const int gid = pair.gt->entries[static_cast<std::size_t>(gi)].identity;
            const int rid = pair.res->entries[static_cast<std::size_t>(rj)].identity;
            const auto it = last_match.find(gid);
            if (it != last_match.end() && it->second != rid) ++out.counts.idsw;
            last_match[gid] = rid;
        }
        const long long gt_count = pair.gt ? static_cast<long long>(pair.gt->entries.size()) : 0;
        const long long res_count =
            pair.res ? static_cast<long long>(pair.res->entries.size()) : 0;
        const long long matched = static_cast<long long>(matches.size());
        out.counts.tp += matched;
        out.counts.fn += gt_count - matched;
        out.counts.fp += res_count - matched;
    }

    out.score = 1.0 - static_cast<double>(out.counts.fn + out.counts.fp + out.counts.idsw) /
                          static_cast<double>(out.counts.gt_total);
    return out;
}

double idf1(const std::vector<LabeledFrame>& gt, const std::vector<LabeledFrame>& res,
            double iou_thresh) {
    validate_frames(gt, "ground truth");
    validate_frames(res, "result");
    if (total_entries(gt) == 0) {
        throw std::invalid_argument("idf1: ground truth is empty; score undefined");
    }

    std::map<int, long long> gt_len;
    std::map<int, long long> res_len;
    std::map<std::pair<int, int>, long long> overlap;  // frames where the pair overlaps
    for (const auto& [frame, pair] : align(gt, res)) {
        (void)frame;
        if (pair.gt) {
            for (const auto& e : pair.gt->entries) ++gt_len[e.identity];
        }
        if (pair.res) {
            for (const auto& e : pair.res->entries) ++res_len[e.identity];
        }
        if (pair.gt && pair.res) {
            for (const auto& g : pair.gt->entries) {
                for (const auto& r : pair.res->entries) {
                    if (iou(g.box, r.box) >= iou_thresh) {
                        ++overlap[{g.identity, r.identity}];
                    }
                }
            }
        }
    }

    std::vector<int> gids;
    std::vector<int> rids;
    for (const auto& [id, len] : gt_len) {
        (void)len;
        gids.push_back(id);
    }
    for (const auto& [id, len] : res_len) {
        (void)len;
        rids.push_back(id);
    }
    const int g = static_cast<int>(gids.size());
    const int r = static_cast<int>(rids.size());

    // Square matrix over identities plus per-side dummies; matching identity
    // pairs costs the identity-level FN + FP it would create, matching to a
    // dummy costs the whole trajectory.
    const int n = g + r;
    const double big = 1e7;
    CostMatrix cost;
    cost.values = Matrix(n, n, big);
    for (int i = 0; i < g; ++i) {
        const long long len_g = gt_len[gids[static_cast<std::size_t>(i)]];
        for (int j = 0; j < r; ++j) {
            const long long len_r = res_len[rids[static_cast<std::size_t>(j)]];
            long long ov = 0;
            const auto it = overlap.find({gids[static_cast<std::size_t>(i)],
                                          rids[static_cast<std::size_t>(j)]});
            if (it != overlap.end()) ov = it->second;
            cost.values.at(i, r + i) = static_cast<double>(len_g);
            cost.values.at(i, j) = static_cast<double>(len_g + len_r - 2 * ov);
        }
        if (r == 0) cost.values.at(i, r + i) = static_cast<double>(len_g);
    }
    for (int j = 0; j < r; ++j) {
        cost.values.at(g + j, j) = static_cast<double>(res_len[rids[static_cast<std::size_t>(j)]]);
    }
    for (int i = g; i < n; ++i) {
        for (int j = r; j < n; ++j) cost.values.at(i, j) = 0.0;
    }

    const AssignmentResult assign = hungarian_assign(cost, 2.0 * big);
    if (static_cast<int>(assign.matches.size()) != n) {
        throw std::logic_error("idf1: identity correspondence left rows unmatched");
    }
    double total_cost = 0.0;
    for (const auto& [i, j] : assign.matches) total_cost += cost.values.at(i, j);

    const double len_sum =
        static_cast<double>(total_entries(gt)) + static_cast<double>(total_entries(res));
    const double idtp = 0.5 * (len_sum - total_cost);
    return len_sum > 0.0 ? 2.0 * idtp / len_sum : 0.0;
}

HotaResult hota(const std::vector<LabeledFrame>& gt, const std::vector<LabeledFrame>& res) {
    validate_frames(gt, "ground truth");
    validate_frames(res, "result");
    if (total_entries(gt) == 0) {
        throw std::invalid_argument("hota: ground truth is empty; score undefined");
    }

    // Per-frame IoU matrices and identity lists, computed once.
    struct FrameData {
        Matrix ious;
        std::vector<int> gids;
        std::vector<int> rids;
    };
    std::vector<FrameData> frames;
    std::map<int, long long> gt_present;
    std::map<int, long long> res_present;
    for (const auto& [frame, pair] : align(gt, res)) {
        (void)frame;
        FrameData data;
        data.ious = iou_matrix(pair.gt, pair.res);
        if (pair.gt) {
            for (const auto& e : pair.gt->entries) {
                data.gids.push_back(e.identity);
                ++gt_present[e.identity];
            }
        }
        if (pair.res) {
            for (const auto& e : pair.res->entries) {
                data.rids.push_back(e.identity);
                ++res_present[e.identity];
            }
        }
        frames.push_back(std::move(data));
    }

    HotaResult out;
    for (int step = 1; step <= 19; ++step) {
        const double alpha = 0.05 * step;
        long long tp = 0;
        long long fn = 0;
        long long fp = 0;
        std::map<std::pair<int, int>, long long> pair_count;
        for (const auto& data : frames) {
            const auto matches = match_frame(data.ious, alpha);
            tp += static_cast<long long>(matches.size());
            fn += static_cast<long long>(data.gids.size()) -
                  static_cast<long long>(matches.size());
            fp += static_cast<long long>(data.rids.size()) -
                  static_cast<long long>(matches.size());
            for (const auto& [gi, rj] : matches) {
                ++pair_count[{data.gids[static_cast<std::size_t>(gi)],
                              data.rids[static_cast<std::size_t>(rj)]}];
            }
        }

        const double deta = static_cast<double>(tp) / static_cast<double>(tp + fn + fp);
        double assa = 0.0;
        if (tp > 0) {
            double acc = 0.0;
            for (const auto& [ids, tpa] : pair_count) {
                const long long fna = gt_present[ids.first] - tpa;
                const long long fpa = res_present[ids.second] - tpa;
                acc += static_cast<double>(tpa) * (static_cast<double>(tpa) /
                                                   static_cast<double>(tpa + fna + fpa));
            }
            assa = acc / static_cast<double>(tp);
        }
        out.alphas.push_back(alpha);
        out.deta_alpha.push_back(deta);
        out.assa_alpha.push_back(assa);
        out.hota_alpha.push_back(std::sqrt(deta * assa));
    }

    const double n = static_cast<double>(out.alphas.size());
    for (std::size_t i = 0; i < out.alphas.size(); ++i) {
        out.hota += out.hota_alpha[i];
        out.deta += out.deta_alpha[i];
        out.assa += out.assa_alpha[i];
    }
    out.hota /= n;
    out.deta /= n;
    out.assa /= n;
    return out;
}

MetricReport evaluate_all(const std::vector<LabeledFrame>& gt,
                          const std::vector<LabeledFrame>& res, double iou_thresh) {
    MetricReport report;
    const MotaResult m = mota(gt, res, iou_thresh);
    report.mota = m.score;
    report.counts = m.counts;
    report.idf1 = idf1(gt, res, iou_thresh);
    const HotaResult h = hota(gt, res);
    report.hota = h.hota;
    report.deta = h.deta;
    report.assa = h.assa;
    return report;
}

}  // namespace fasttrack
