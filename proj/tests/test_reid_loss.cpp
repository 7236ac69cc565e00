#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fasttrack/reid_loss.hpp"
#include "fasttrack/rng.hpp"

using namespace fasttrack;

namespace {

std::vector<double> axis_vector(int dim, int axis, double sign = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    v[static_cast<std::size_t>(axis)] = sign;
    return v;
}

// Direct evaluation of the loss with explicit intermediate terms; no shared
// code with the implementation's log-sum-exp path.
double circle_loss_oracle(const SimilarityPairs& pairs, double m, double gamma) {
    const double o_p = 1.0 + m;
    const double o_n = -m;
    const double delta_p = 1.0 - m;
    const double delta_n = m;
    double sum_pos = 0.0;
    for (double sp : pairs.s_p) {
        const double alpha = std::max(0.0, o_p - sp);
        sum_pos += std::exp(-gamma * alpha * (sp - delta_p));
    }
    double sum_neg = 0.0;
    for (double sn : pairs.s_n) {
        const double alpha = std::max(0.0, sn - o_n);
        sum_neg += std::exp(gamma * alpha * (sn - delta_n));
    }
    return std::log(1.0 + sum_neg * sum_pos);
}

}  // namespace

TEST_CASE("pair construction: identical and orthogonal unit vectors") {
    std::vector<std::vector<EmbeddedIdentity>> frames(2);
    frames[0].push_back({axis_vector(4, 0), 1});
    frames[1].push_back({axis_vector(4, 0), 1});
    const SimilarityPairs same = build_similarity_pairs(frames);
    REQUIRE(same.s_p.size() == 1);
    CHECK(same.s_p[0] == doctest::Approx(1.0));
    CHECK(same.s_n.empty());

    frames[0][0] = {axis_vector(4, 0), 1};
    frames[1][0] = {axis_vector(4, 1), 2};
    const SimilarityPairs cross = build_similarity_pairs(frames);
    REQUIRE(cross.s_n.size() == 1);
    CHECK(cross.s_n[0] == doctest::Approx(0.0));
    CHECK(cross.s_p.empty());
}

TEST_CASE("pair construction enumerates cross-frame pairs exhaustively") {
    Rng rng(50);
    std::vector<std::vector<EmbeddedIdentity>> frames(2);
    for (int f = 0; f < 2; ++f) {
        for (int id = 1; id <= 3; ++id) {
            frames[static_cast<std::size_t>(f)].push_back({rng.unit_vector(8), id});
        }
    }
    const SimilarityPairs pairs = build_similarity_pairs(frames);
    CHECK(pairs.s_p.size() == 3);
    CHECK(pairs.s_n.size() == 6);

    // Exhaustive oracle: every (a in frame 0) x (b in frame 1) pair.
    int positives = 0;
    int negatives = 0;
    for (const auto& a : frames[0]) {
        for (const auto& b : frames[1]) {
            (a.identity == b.identity ? positives : negatives) += 1;
        }
    }
    CHECK(positives == static_cast<int>(pairs.s_p.size()));
    CHECK(negatives == static_cast<int>(pairs.s_n.size()));
}

TEST_CASE("pair construction order is frame-major, index-minor") {
    auto at_angle = [](double degrees) {
        const double rad = degrees * std::numbers::pi / 180.0;
        return std::vector<double>{std::cos(rad), std::sin(rad)};
    };
    auto cos_between = [](double a, double b) {
        return std::cos((a - b) * std::numbers::pi / 180.0);
    };

    // Distinct angles make every pair's similarity unique, pinning the order.
    std::vector<std::vector<EmbeddedIdentity>> frames(3);
    frames[0] = {{at_angle(0.0), 1}, {at_angle(90.0), 2}};
    frames[1] = {{at_angle(5.0), 1}, {at_angle(70.0), 2}};
    frames[2] = {{at_angle(30.0), 1}};

    const SimilarityPairs pairs = build_similarity_pairs(frames);
    const std::vector<double> expected_p = {cos_between(0, 5), cos_between(90, 70),
                                            cos_between(0, 30), cos_between(5, 30)};
    const std::vector<double> expected_n = {cos_between(0, 70), cos_between(90, 5),
                                            cos_between(90, 30), cos_between(70, 30)};
    REQUIRE(pairs.s_p.size() == expected_p.size());
    REQUIRE(pairs.s_n.size() == expected_n.size());
    for (std::size_t i = 0; i < expected_p.size(); ++i) {
        CHECK(pairs.s_p[i] == doctest::Approx(expected_p[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < expected_n.size(); ++i) {
        CHECK(pairs.s_n[i] == doctest::Approx(expected_n[i]).epsilon(1e-12));
    }
}

TEST_CASE("pair construction emits no within-frame pairs and checks norms") {
    std::vector<std::vector<EmbeddedIdentity>> one_frame(1);
    one_frame[0].push_back({axis_vector(3, 0), 1});
    one_frame[0].push_back({axis_vector(3, 1), 2});
    const SimilarityPairs pairs = build_similarity_pairs(one_frame);
    CHECK(pairs.s_p.empty());
    CHECK(pairs.s_n.empty());

    std::vector<std::vector<EmbeddedIdentity>> bad(2);
    bad[0].push_back({{0.5, 0.5, 0.0}, 1});  // norm != 1
    bad[1].push_back({axis_vector(3, 0), 1});
    CHECK_THROWS_AS(build_similarity_pairs(bad), std::invalid_argument);
}

TEST_CASE("circle loss with no negatives is zero") {
    SimilarityPairs pairs;
    pairs.s_p = {0.2, 0.9};
    const CircleLossResult res = circle_loss(pairs, {});
    CHECK(res.loss == 0.0);
    for (double g : res.d_s_p) CHECK(g == 0.0);
}

TEST_CASE("circle loss reproduces the worked single-pair example") {
    SimilarityPairs pairs;
    pairs.s_p = {0.8};
    pairs.s_n = {0.3};
    CircleLossParams params;
    params.margin = 0.25;
    params.gamma = 64.0;

    // alpha_p = 0.45, alpha_n = 0.55, delta_p = 0.75, delta_n = 0.25:
    // loss = log(1 + e^{1.76} e^{-1.44})
    const double direct = std::log(1.0 + std::exp(1.76) * std::exp(-1.44));
    const CircleLossResult res = circle_loss(pairs, params);
    CHECK(res.loss == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::abs(res.loss - 0.8659) < 1e-4);
}

TEST_CASE("circle loss matches the direct-formula oracle on random pair sets") {
    Rng rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        SimilarityPairs pairs;
        const int k = 1 + static_cast<int>(rng.uniform01() * 6.0);
        const int l = 1 + static_cast<int>(rng.uniform01() * 6.0);
        for (int i = 0; i < k; ++i) pairs.s_p.push_back(rng.uniform(-1.0, 1.0));
        for (int j = 0; j < l; ++j) pairs.s_n.push_back(rng.uniform(-1.0, 1.0));
        CircleLossParams params;
        params.margin = rng.uniform(0.05, 0.45);
        params.gamma = rng.uniform(1.0, 80.0);

        const double expected = circle_loss_oracle(pairs, params.margin, params.gamma);
        const CircleLossResult res = circle_loss(pairs, params);
        CHECK(res.loss == doctest::Approx(expected).epsilon(1e-10));
        CHECK(res.loss >= 0.0);
    }
}

namespace {

// Loss with the weighting factors frozen at the base point: the function the
// detached gradients differentiate. Direct formula, no shared code with the
// implementation.
double frozen_alpha_loss(const std::vector<double>& s_p, const std::vector<double>& s_n,
                         const std::vector<double>& alpha_p, const std::vector<double>& alpha_n,
                         double m, double gamma) {
    double sum_pos = 0.0;
    for (std::size_t i = 0; i < s_p.size(); ++i) {
        sum_pos += std::exp(-gamma * alpha_p[i] * (s_p[i] - (1.0 - m)));
    }
    double sum_neg = 0.0;
    for (std::size_t j = 0; j < s_n.size(); ++j) {
        sum_neg += std::exp(gamma * alpha_n[j] * (s_n[j] - m));
    }
    return std::log(1.0 + sum_neg * sum_pos);
}

}  // namespace

TEST_CASE("circle loss gradients match central finite differences") {
    Rng rng(52);
    const double h = 1e-6;
    double max_rel_err = 0.0;
    int configs = 0;
    while (configs < 100) {
        SimilarityPairs pairs;
        const int k = 1 + static_cast<int>(rng.uniform01() * 8.0);
        const int l = 1 + static_cast<int>(rng.uniform01() * 8.0);
        for (int i = 0; i < k; ++i) pairs.s_p.push_back(rng.uniform(-1.0, 1.0));
        for (int j = 0; j < l; ++j) pairs.s_n.push_back(rng.uniform(-1.0, 1.0));
        ++configs;

        CircleLossParams params;
        const double m = params.margin;
        const double gamma = params.gamma;
        std::vector<double> alpha_p(pairs.s_p.size());
        std::vector<double> alpha_n(pairs.s_n.size());
        for (std::size_t i = 0; i < pairs.s_p.size(); ++i) {
            alpha_p[i] = std::max(0.0, 1.0 + m - pairs.s_p[i]);
        }
        for (std::size_t j = 0; j < pairs.s_n.size(); ++j) {
            alpha_n[j] = std::max(0.0, pairs.s_n[j] + m);
        }

        const CircleLossResult res = circle_loss(pairs, params);
        // Consistency at the base point before differencing around it.
        CHECK(res.loss == doctest::Approx(frozen_alpha_loss(pairs.s_p, pairs.s_n, alpha_p,
                                                            alpha_n, m, gamma))
                              .epsilon(1e-10));

        for (int i = 0; i < k; ++i) {
            auto up = pairs.s_p;
            auto dn = pairs.s_p;
            up[static_cast<std::size_t>(i)] += h;
            dn[static_cast<std::size_t>(i)] -= h;
            const double fd = (frozen_alpha_loss(up, pairs.s_n, alpha_p, alpha_n, m, gamma) -
                               frozen_alpha_loss(dn, pairs.s_n, alpha_p, alpha_n, m, gamma)) /
                              (2.0 * h);
            const double err = std::abs(res.d_s_p[static_cast<std::size_t>(i)] - fd) /
                               std::max(1.0, std::abs(fd));
            max_rel_err = std::max(max_rel_err, err);
        }
        for (int j = 0; j < l; ++j) {
            auto up = pairs.s_n;
            auto dn = pairs.s_n;
            up[static_cast<std::size_t>(j)] += h;
            dn[static_cast<std::size_t>(j)] -= h;
            const double fd = (frozen_alpha_loss(pairs.s_p, up, alpha_p, alpha_n, m, gamma) -
                               frozen_alpha_loss(pairs.s_p, dn, alpha_p, alpha_n, m, gamma)) /
                              (2.0 * h);
            const double err = std::abs(res.d_s_n[static_cast<std::size_t>(j)] - fd) /
                               std::max(1.0, std::abs(fd));
            max_rel_err = std::max(max_rel_err, err);
        }
    }
    CHECK(max_rel_err < 1e-5);
}

TEST_CASE("circle loss gradient signs: decreasing in s_p, increasing in s_n") {
    Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        SimilarityPairs pairs;
        for (int i = 0; i < 3; ++i) pairs.s_p.push_back(rng.uniform(-0.9, 0.9));
        for (int j = 0; j < 3; ++j) pairs.s_n.push_back(rng.uniform(-0.9, 0.9));
        const CircleLossResult res = circle_loss(pairs, {});
        for (std::size_t i = 0; i < pairs.s_p.size(); ++i) {
            if (1.25 - pairs.s_p[i] > 0.0) CHECK(res.d_s_p[i] < 0.0);
        }
        for (std::size_t j = 0; j < pairs.s_n.size(); ++j) {
            if (pairs.s_n[j] + 0.25 > 0.0) CHECK(res.d_s_n[j] > 0.0);
        }
    }
}

TEST_CASE("circle loss degenerate and parameter validation") {
    const CircleLossResult res = circle_loss({}, {});
    CHECK(res.loss == 0.0);
    CHECK(res.d_s_p.empty());
    CHECK(res.d_s_n.empty());

    SimilarityPairs pairs;
    pairs.s_p = {0.5};
    CircleLossParams bad;
    bad.margin = 1.5;
    CHECK_THROWS_AS(circle_loss(pairs, bad), std::invalid_argument);
    bad.margin = 0.25;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(circle_loss(pairs, bad), std::invalid_argument);
}

TEST_CASE("circle loss stays finite under extreme gamma") {
    SimilarityPairs pairs;
    pairs.s_p = {-1.0, -0.99};
    pairs.s_n = {1.0, 0.99};
    CircleLossParams params;
    params.gamma = 512.0;
    const CircleLossResult res = circle_loss(pairs, params);
    CHECK(std::isfinite(res.loss));
    for (double g : res.d_s_p) CHECK(std::isfinite(g));
    for (double g : res.d_s_n) CHECK(std::isfinite(g));
}

TEST_CASE("triplet loss cases") {
    CHECK(triplet_loss(0.4, 0.4, 0.0) == 0.0);
    CHECK(triplet_loss(1.0, 0.0, 0.3) == 0.0);
    CHECK(triplet_loss(0.2, 0.9, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("motip id loss: perfect, uniform and hand-built cases") {
    IdClassScores perfect;
    perfect.frames.resize(2);
    perfect.frames[0].push_back({{1.0, 0.0, 0.0}, 0});
    perfect.frames[1].push_back({{0.0, 1.0, 0.0}, 1});
    CHECK(motip_id_loss(perfect).loss == 0.0);

    IdClassScores uniform;
    uniform.frames.resize(1);
    const int k_plus_1 = 5;
    std::vector<double> u(k_plus_1, 1.0 / k_plus_1);
    uniform.frames[0].push_back({u, 2});
    CHECK(motip_id_loss(uniform).loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));

    // 2 frames x 2 objects: mean of per-object cross-entropies.
    IdClassScores hand;
    hand.frames.resize(2);
    hand.frames[0].push_back({{0.7, 0.2, 0.1}, 0});
    hand.frames[0].push_back({{0.1, 0.8, 0.1}, 1});
    hand.frames[1].push_back({{0.25, 0.25, 0.5}, 2});
    hand.frames[1].push_back({{0.6, 0.3, 0.1}, 1});
    const double expected =
        (-std::log(0.7) - std::log(0.8) - std::log(0.5) - std::log(0.3)) / 4.0;
    CHECK(motip_id_loss(hand).loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("motip id loss clamps zero true-class probability and flags it") {
    IdClassScores scores;
    scores.frames.resize(1);
    scores.frames[0].push_back({{0.0, 1.0}, 0});
    const IdLossResult res = motip_id_loss(scores);
    CHECK(res.clamped);
    CHECK(res.loss == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));

    IdClassScores bad;
    bad.frames.resize(1);
    bad.frames[0].push_back({{0.5, 0.6}, 0});  // sums to 1.1
    CHECK_THROWS_AS(motip_id_loss(bad), std::invalid_argument);
}

TEST_CASE("motip id loss is invariant to object order within a frame") {
    IdClassScores a;
    a.frames.resize(1);
    a.frames[0].push_back({{0.7, 0.2, 0.1}, 0});
    a.frames[0].push_back({{0.2, 0.5, 0.3}, 1});
    a.frames[0].push_back({{0.1, 0.1, 0.8}, 2});

    IdClassScores b;
    b.frames.resize(1);
    b.frames[0].push_back({{0.1, 0.1, 0.8}, 2});
    b.frames[0].push_back({{0.7, 0.2, 0.1}, 0});
    b.frames[0].push_back({{0.2, 0.5, 0.3}, 1});

    CHECK(motip_id_loss(a).loss == doctest::Approx(motip_id_loss(b).loss).epsilon(1e-15));
}

TEST_CASE("overall loss weighting") {
    CHECK(overall_loss(0.5, 1.5, {}) == doctest::Approx(2.0));
    CHECK(overall_loss(0.5, 1.5, {0.0, 1.0}) == doctest::Approx(1.5));
    CHECK(overall_loss(2.0, 3.0, {0.5, 2.0}) == doctest::Approx(7.0));
    LossWeights bad;
    bad.lambda_reid = -1.0;
    CHECK_THROWS_AS(overall_loss(1.0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("per-layer losses sum") {
    SimilarityPairs pairs;
    pairs.s_p = {0.8};
    pairs.s_n = {0.3};
    const double single = circle_loss(pairs, {}).loss;
    const double total = sum_layer_losses({pairs, pairs, pairs}, {});
    CHECK(total == doctest::Approx(3.0 * single).epsilon(1e-12));
}
