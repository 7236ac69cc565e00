#include <cmath>
#include <stdexcept>
#include <map>
#include <vector>

#include "doctest.h"
#include "fasttrack/metrics.hpp"
#include "fasttrack/rng.hpp"

using namespace fasttrack;

namespace {

BoundingBox box_at(double x, double y = 0.0) { return {x, y, 10.0, 10.0}; }

// 5 frames x 2 objects: object 1 along y=0, object 2 along y=100.
std::vector<LabeledFrame> two_object_gt(int frames = 5) {
    std::vector<LabeledFrame> gt;
    for (int f = 1; f <= frames; ++f) {
        LabeledFrame frame;
        frame.frame = f;
        frame.entries.push_back({1, box_at(f * 20.0, 0.0)});
        frame.entries.push_back({2, box_at(f * 20.0, 100.0)});
        gt.push_back(frame);
    }
    return gt;
}

std::vector<LabeledFrame> relabel(const std::vector<LabeledFrame>& frames,
                                  const std::map<int, int>& mapping) {
    std::vector<LabeledFrame> out = frames;
    for (auto& frame : out) {
        for (auto& entry : frame.entries) entry.identity = mapping.at(entry.identity);
    }
    return out;
}

}  // namespace

TEST_CASE("perfect results score 1 on every metric with zero error counts") {
    const auto gt = two_object_gt();
    const auto res = relabel(gt, {{1, 7}, {2, 9}});  // relabeled copy of gt

    const MotaResult m = mota(gt, res);
    CHECK(m.score == doctest::Approx(1.0));
    CHECK(m.counts.fn == 0);
    CHECK(m.counts.fp == 0);
    CHECK(m.counts.idsw == 0);
    CHECK(m.counts.tp == 10);

    CHECK(idf1(gt, res) == doctest::Approx(1.0));

    const HotaResult h = hota(gt, res);
    CHECK(h.hota == doctest::Approx(1.0));
    CHECK(h.deta == doctest::Approx(1.0));
    CHECK(h.assa == doctest::Approx(1.0));
}

TEST_CASE("hand-built 10-entry case: 1 FN + 1 FP + 1 IDSW gives MOTA 0.7") {
    const auto gt = two_object_gt();  // 10 entries
    std::vector<LabeledFrame> res;
    for (int f = 1; f <= 5; ++f) {
        LabeledFrame frame;
        frame.frame = f;
        // object 1 tracked as id 1 for frames 1-2, then id 3: one switch.
        frame.entries.push_back({f <= 2 ? 1 : 3, box_at(f * 20.0, 0.0)});
        // object 2 tracked as id 2, missing in frame 5: one FN.
        if (f != 5) frame.entries.push_back({2, box_at(f * 20.0, 100.0)});
        // one far-away false positive in frame 2.
        if (f == 2) frame.entries.push_back({9, box_at(500.0, 500.0)});
        res.push_back(frame);
    }

    const MotaResult m = mota(gt, res);
    CHECK(m.counts.gt_total == 10);
    CHECK(m.counts.fn == 1);
    CHECK(m.counts.fp == 1);
    CHECK(m.counts.idsw == 1);
    CHECK(m.score == doctest::Approx(0.7));
}

TEST_CASE("empty results, nonempty ground truth: everything is missed, MOTA 0") {
    const auto gt = two_object_gt();
    const MotaResult m = mota(gt, {});
    CHECK(m.counts.fn == 10);
    CHECK(m.counts.fp == 0);
    CHECK(m.score == doctest::Approx(0.0));
}

TEST_CASE("metrics reject empty ground truth and duplicate identities") {
    const auto gt = two_object_gt();
    CHECK_THROWS_AS(mota({}, gt), std::invalid_argument);
    CHECK_THROWS_AS(idf1({}, gt), std::invalid_argument);
    CHECK_THROWS_AS(hota({}, gt), std::invalid_argument);

    std::vector<LabeledFrame> dup(1);
    dup[0].frame = 1;
    dup[0].entries.push_back({1, box_at(0.0)});
    dup[0].entries.push_back({1, box_at(50.0)});
    CHECK_THROWS_AS(mota(dup, dup), std::invalid_argument);
}

TEST_CASE("carry-over: a brief miss does not create an identity switch") {
    std::vector<LabeledFrame> gt;
    std::vector<LabeledFrame> res;
    for (int f = 1; f <= 5; ++f) {
        LabeledFrame g;
        g.frame = f;
        g.entries.push_back({1, box_at(f * 20.0)});
        gt.push_back(g);

        LabeledFrame r;
        r.frame = f;
        if (f != 3) r.entries.push_back({4, box_at(f * 20.0)});  // gap at frame 3
        res.push_back(r);
    }
    const MotaResult m = mota(gt, res);
    CHECK(m.counts.idsw == 0);
    CHECK(m.counts.fn == 1);

    // Same gap, but the identity changes across it: now it is a switch.
    auto res_switch = res;
    for (int f = 4; f <= 5; ++f) {
        res_switch[static_cast<std::size_t>(f - 1)].entries[0].identity = 8;
    }
    CHECK(mota(gt, res_switch).counts.idsw == 1);
}

TEST_CASE("idf1 of a 50/50 identity split is 0.5") {
    std::vector<LabeledFrame> gt;
    std::vector<LabeledFrame> res;
    const int frames = 10;
    for (int f = 1; f <= frames; ++f) {
        LabeledFrame g;
        g.frame = f;
        g.entries.push_back({1, box_at(f * 15.0)});
        gt.push_back(g);

        LabeledFrame r;
        r.frame = f;
        r.entries.push_back({f <= frames / 2 ? 10 : 20, box_at(f * 15.0)});
        res.push_back(r);
    }
    CHECK(idf1(gt, res) == doctest::Approx(0.5));
}

TEST_CASE("idf1 with zero overlap is 0") {
    const auto gt = two_object_gt();
    std::vector<LabeledFrame> res;
    for (int f = 1; f <= 5; ++f) {
        LabeledFrame r;
        r.frame = f;
        r.entries.push_back({1, box_at(900.0, 900.0)});
        res.push_back(r);
    }
    CHECK(idf1(gt, res) == doctest::Approx(0.0));
}

TEST_CASE("hota: perfect detection with per-frame identity shuffling leaves DetA at 1") {
    const auto gt = two_object_gt(6);
    std::vector<LabeledFrame> res = gt;
    for (int f = 0; f < 6; ++f) {
        // alternate the two predicted ids frame by frame
        const int a = f % 2 == 0 ? 1 : 2;
        res[static_cast<std::size_t>(f)].entries[0].identity = a;
        res[static_cast<std::size_t>(f)].entries[1].identity = 3 - a;
    }
    const HotaResult h = hota(gt, res);
    CHECK(h.deta == doctest::Approx(1.0));
    CHECK(h.assa < 1.0);
    CHECK(h.hota == doctest::Approx(std::sqrt(h.assa)).epsilon(1e-12));
}

TEST_CASE("hota matches a brute-force association enumeration on a hand scenario") {
    // Frames 1-3, objects g1/g2. p1 covers g1 in frames 1-2, p3 takes over in
    // frame 3; p2 covers g2 throughout.
    std::vector<LabeledFrame> gt;
    std::vector<LabeledFrame> res;
    for (int f = 1; f <= 3; ++f) {
        LabeledFrame g;
        g.frame = f;
        g.entries.push_back({1, box_at(f * 30.0, 0.0)});
        g.entries.push_back({2, box_at(f * 30.0, 200.0)});
        gt.push_back(g);

        LabeledFrame r;
        r.frame = f;
        r.entries.push_back({f <= 2 ? 101 : 103, box_at(f * 30.0, 0.0)});
        r.entries.push_back({102, box_at(f * 30.0, 200.0)});
        res.push_back(r);
    }

    // Oracle: boxes are exact, so every alpha gives the same matching. Count
    // TPA/FNA/FPA per matched pair by direct enumeration over the match list.
    struct Match {
        int gid;
        int pid;
    };
    std::vector<Match> matches = {{1, 101}, {2, 102}, {1, 101}, {2, 102}, {1, 103}, {2, 102}};
    std::map<int, int> gt_count;
    std::map<int, int> res_count;
    for (const auto& m : matches) {
        ++gt_count[m.gid];
        ++res_count[m.pid];
    }
    double assa_oracle = 0.0;
    for (const auto& m : matches) {
        int tpa = 0;
        for (const auto& other : matches) {
            if (other.gid == m.gid && other.pid == m.pid) ++tpa;
        }
        const int fna = gt_count[m.gid] - tpa;
        const int fpa = res_count[m.pid] - tpa;
        assa_oracle += static_cast<double>(tpa) / (tpa + fna + fpa);
    }
    assa_oracle /= static_cast<double>(matches.size());

    const HotaResult h = hota(gt, res);
    CHECK(h.deta == doctest::Approx(1.0));
    CHECK(h.assa == doctest::Approx(assa_oracle).epsilon(1e-12));
    CHECK(h.assa == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
    CHECK(h.hota == doctest::Approx(std::sqrt(7.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("hota per-alpha identity holds exactly as computed") {
    Rng rng(80);
    std::vector<LabeledFrame> gt;
    std::vector<LabeledFrame> res;
    for (int f = 1; f <= 8; ++f) {
        LabeledFrame g;
        LabeledFrame r;
        g.frame = r.frame = f;
        for (int i = 0; i < 3; ++i) {
            const BoundingBox b{rng.uniform(0.0, 300.0), rng.uniform(0.0, 300.0), 20.0, 20.0};
            g.entries.push_back({i + 1, b});
            BoundingBox jittered = b;
            jittered.left += rng.uniform(-6.0, 6.0);
            jittered.top += rng.uniform(-6.0, 6.0);
            if (rng.uniform01() < 0.8) {
                r.entries.push_back({i + 1 + (rng.uniform01() < 0.2 ? 10 : 0), jittered});
            }
        }
        gt.push_back(g);
        res.push_back(r);
    }
    const HotaResult h = hota(gt, res);
    REQUIRE(h.alphas.size() == 19);
    for (std::size_t i = 0; i < h.alphas.size(); ++i) {
        CHECK(std::abs(h.hota_alpha[i] * h.hota_alpha[i] -
                       h.deta_alpha[i] * h.assa_alpha[i]) < 1e-9);
    }
}

TEST_CASE("scores are invariant under bijective relabeling of predicted ids") {
    Rng rng(81);
    std::vector<LabeledFrame> gt;
    std::vector<LabeledFrame> res;
    for (int f = 1; f <= 10; ++f) {
        LabeledFrame g;
        LabeledFrame r;
        g.frame = r.frame = f;
        for (int i = 0; i < 4; ++i) {
            const BoundingBox b{rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0), 25.0, 25.0};
            g.entries.push_back({i + 1, b});
            if (rng.uniform01() < 0.85) {
                BoundingBox jittered = b;
                jittered.left += rng.uniform(-4.0, 4.0);
                r.entries.push_back({i + 1, jittered});
            }
        }
        gt.push_back(g);
        res.push_back(r);
    }
    const std::map<int, int> mapping = {{1, 42}, {2, 17}, {3, 99}, {4, 3}};
    const auto renamed = relabel(res, mapping);

    CHECK(mota(gt, res).score == doctest::Approx(mota(gt, renamed).score).epsilon(1e-12));
    CHECK(idf1(gt, res) == doctest::Approx(idf1(gt, renamed)).epsilon(1e-12));
    CHECK(hota(gt, res).hota == doctest::Approx(hota(gt, renamed).hota).epsilon(1e-12));
}

TEST_CASE("adding a pure false positive never increases MOTA") {
    const auto gt = two_object_gt();
    auto res = relabel(gt, {{1, 1}, {2, 2}});
    const double before = mota(gt, res).score;

    res[2].entries.push_back({77, box_at(700.0, 700.0)});
    const double after = mota(gt, res).score;
    CHECK(after <= before);
    CHECK(after == doctest::Approx(before - 0.1));
}

TEST_CASE("evaluate_all bundles the three metric families") {
    const auto gt = two_object_gt();
    const MetricReport report = evaluate_all(gt, gt);
    CHECK(report.mota == doctest::Approx(1.0));
    CHECK(report.idf1 == doctest::Approx(1.0));
    CHECK(report.hota == doctest::Approx(1.0));
    CHECK(report.counts.gt_total == 10);
}
