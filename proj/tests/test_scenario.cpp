#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fasttrack/config.hpp"
#include "fasttrack/mot_io.hpp"
#include "fasttrack/scenario.hpp"

using namespace fasttrack;

namespace {

ScenarioConfig noiseless_config() {
    ScenarioConfig cfg;
    cfg.num_objects = 3;
    cfg.num_frames = 20;
    cfg.pos_noise_sigma = 0.0;
    cfg.miss_prob = 0.0;
    cfg.false_pos_rate = 0.0;
    cfg.conf_sigma = 0.0;
    cfg.embed_noise_sigma = 0.0;
    cfg.seed = 99;
    return cfg;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("noiseless scenario: detections equal ground truth with distinct prototypes") {
    const auto frames = generate_scenario(noiseless_config());
    REQUIRE(frames.size() == 20);
    for (const auto& obs : frames) {
        REQUIRE(obs.detections.size() == obs.ground_truth.entries.size());
        for (std::size_t i = 0; i < obs.detections.size(); ++i) {
            const auto& det = obs.detections[i];
            const auto& gt = obs.ground_truth.entries[i];
            CHECK(det.box.left == doctest::Approx(gt.box.left).epsilon(1e-12));
            CHECK(det.box.top == doctest::Approx(gt.box.top).epsilon(1e-12));
            CHECK(det.confidence == doctest::Approx(0.9));
        }
    }

    // Same object keeps the same embedding; different objects differ.
    const auto& f0 = frames[0].detections;
    const auto& f1 = frames[1].detections;
    for (std::size_t i = 0; i < f0.size(); ++i) {
        for (std::size_t j = 0; j < f1.size(); ++j) {
            double cos = 0.0;
            for (std::size_t k = 0; k < f0[i].embedding.size(); ++k) {
                cos += f0[i].embedding[k] * f1[j].embedding[k];
            }
            if (i == j) {
                CHECK(cos == doctest::Approx(1.0).epsilon(1e-12));
            } else {
                CHECK(cos < 0.9);
            }
        }
    }
}

TEST_CASE("scenario generation is deterministic for a fixed seed") {
    ScenarioConfig cfg;
    cfg.num_objects = 4;
    cfg.num_frames = 15;
    cfg.miss_prob = 0.2;
    cfg.false_pos_rate = 0.5;
    cfg.seed = 1234;

    const auto a = generate_scenario(cfg);
    const auto b = generate_scenario(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t f = 0; f < a.size(); ++f) {
        REQUIRE(a[f].detections.size() == b[f].detections.size());
        for (std::size_t i = 0; i < a[f].detections.size(); ++i) {
            CHECK(a[f].detections[i].box.left == b[f].detections[i].box.left);
            CHECK(a[f].detections[i].confidence == b[f].detections[i].confidence);
            CHECK(a[f].detections[i].embedding == b[f].detections[i].embedding);
        }
    }

    cfg.seed = 1235;
    const auto c = generate_scenario(cfg);
    bool any_difference = false;
    for (std::size_t f = 0; f < a.size() && !any_difference; ++f) {
        if (a[f].detections.size() != c[f].detections.size()) {
            any_difference = true;
            break;
        }
        for (std::size_t i = 0; i < a[f].detections.size(); ++i) {
            if (a[f].detections[i].embedding != c[f].detections[i].embedding) {
                any_difference = true;
                break;
            }
        }
    }
    CHECK(any_difference);
}

TEST_CASE("embedding separability: same-identity cosine beats cross-identity by a margin") {
    // Per-dimension noise sigma 0.1 dilutes the unit prototype as the
    // dimension grows (noise norm ~ 0.1 sqrt(D)), so the margin floor is
    // regime-dependent.
    struct Regime {
        int embed_dim;
        double min_margin;
    };
    for (const Regime regime : {Regime{16, 0.5}, Regime{256, 0.2}}) {
        ScenarioConfig cfg;
        cfg.num_objects = 10;
        cfg.num_frames = 1000;  // 10^4 detections
        cfg.embed_dim = regime.embed_dim;
        cfg.embed_noise_sigma = 0.1;
        cfg.miss_prob = 0.0;
        cfg.false_pos_rate = 0.0;
        cfg.pos_noise_sigma = 0.0;
        cfg.seed = 7;
        const auto frames = generate_scenario(cfg);

        double same_sum = 0.0;
        long long same_n = 0;
        double cross_sum = 0.0;
        long long cross_n = 0;
        for (std::size_t f = 1; f < frames.size(); ++f) {
            const auto& prev = frames[f - 1].detections;
            const auto& cur = frames[f].detections;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                for (std::size_t j = 0; j < prev.size(); ++j) {
                    double cos = 0.0;
                    for (std::size_t k = 0; k < cur[i].embedding.size(); ++k) {
                        cos += cur[i].embedding[k] * prev[j].embedding[k];
                    }
                    if (i == j) {
                        same_sum += cos;
                        ++same_n;
                    } else {
                        cross_sum += cos;
                        ++cross_n;
                    }
                }
            }
        }
        const double mean_same = same_sum / static_cast<double>(same_n);
        const double mean_cross = cross_sum / static_cast<double>(cross_n);
        CHECK(mean_same > mean_cross + regime.min_margin);
    }
}

TEST_CASE("crossing scenario pairs objects that approach and reverse") {
    ScenarioConfig cfg;
    cfg.num_objects = 2;
    cfg.num_frames = 40;
    cfg.motion = MotionModel::crossing;
    cfg.pos_noise_sigma = 0.0;
    cfg.miss_prob = 0.0;
    cfg.conf_sigma = 0.0;
    cfg.embed_noise_sigma = 0.0;
    const auto frames = generate_scenario(cfg);

    auto gap_at = [&](int f) {
        const auto& e = frames[static_cast<std::size_t>(f)].ground_truth.entries;
        return std::abs(e[0].box.center_x() - e[1].box.center_x());
    };
    const int turn = cfg.num_frames / 2;
    CHECK(gap_at(0) > gap_at(turn - 1));      // approaching
    CHECK(gap_at(turn - 1) >= gap_at(turn));  // closest near the turn
    CHECK(gap_at(cfg.num_frames - 1) > gap_at(turn));  // separating again
}

TEST_CASE("boxes stay inside the arena even under jitter") {
    ScenarioConfig cfg;
    cfg.num_objects = 5;
    cfg.num_frames = 60;
    cfg.pos_noise_sigma = 30.0;
    cfg.false_pos_rate = 1.0;
    cfg.seed = 5;
    const auto frames = generate_scenario(cfg);
    for (const auto& obs : frames) {
        for (const auto& det : obs.detections) {
            CHECK(det.box.left >= 0.0);
            CHECK(det.box.top >= 0.0);
            CHECK(det.box.right() <= cfg.arena_width + 1e-9);
            CHECK(det.box.bottom() <= cfg.arena_height + 1e-9);
        }
    }
}

TEST_CASE("mot rows: write-then-read round trip on two-decimal values") {
    std::vector<MotRow> rows;
    for (int i = 0; i < 25; ++i) {
        rows.push_back({i + 1, i % 5, (i * 731 % 1000) / 100.0, (i * 137 % 1000) / 100.0,
                        (100 + i * 53 % 400) / 100.0, (100 + i * 97 % 400) / 100.0,
                        (i * 4 % 101) / 100.0});
    }
    const std::string path = temp_path("fasttrack_roundtrip.txt");
    write_mot_file(path, rows);
    const auto back = read_mot_file(path);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].frame == rows[i].frame);
        CHECK(back[i].id == rows[i].id);
        CHECK(back[i].left == rows[i].left);
        CHECK(back[i].top == rows[i].top);
        CHECK(back[i].width == rows[i].width);
        CHECK(back[i].height == rows[i].height);
        CHECK(back[i].conf == rows[i].conf);
    }
}

TEST_CASE("mot format: fixed layout, trailing newline, hand-written fixture") {
    const std::vector<MotRow> rows = {{1, 3, 10.0, 20.5, 30.25, 40.0, 0.9}};
    const std::string text = format_mot_rows(rows);
    CHECK(text == "1,3,10.00,20.50,30.25,40.00,0.90,-1,-1,-1\n");

    const std::string fixture =
        "1,1,912.00,484.00,97.00,109.00,0.90,-1,-1,-1\n"
        "1,2,412.00,490.00,93.00,100.00,0.80,-1,-1,-1\n"
        "2,1,914.00,485.00,97.00,109.00,0.95,-1,-1,-1\n";
    const auto parsed = parse_mot_text(fixture, "fixture");
    REQUIRE(parsed.size() == 3);
    CHECK(parsed[0].frame == 1);
    CHECK(parsed[0].id == 1);
    CHECK(parsed[0].left == doctest::Approx(912.0));
    CHECK(parsed[2].frame == 2);
    CHECK(parsed[2].conf == doctest::Approx(0.95));
}

TEST_CASE("mot parser reports the offending line number") {
    const std::string bad = "1,1,5.00,5.00,10.00,10.00,1.00,-1,-1,-1\nnot,a,row\n";
    try {
        parse_mot_text(bad, "stream");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("stream:2") != std::string::npos);
    }
}

TEST_CASE("embedding sidecar round-trips at full precision") {
    std::vector<EmbeddingRow> rows;
    rows.push_back({1, 0, {0.12345678901234567, -0.9876543210987654, 1e-17}});
    rows.push_back({1, 1, {-0.5, 0.25, 0.125}});
    rows.push_back({2, 0, {0.1, 0.2, 0.3}});
    const std::string path = temp_path("fasttrack_emb.txt");
    write_embedding_file(path, rows);
    const auto back = read_embedding_file(path);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].frame == rows[i].frame);
        CHECK(back[i].index == rows[i].index);
        CHECK(back[i].values == rows[i].values);  // bitwise through %.17g
    }
}

TEST_CASE("scenario config parsing: grammar, comments, unknown keys") {
    const std::string text =
        "# synthetic scene\n"
        "num_objects = 6\n"
        "num_frames = 120\n"
        "motion = crossing\n"
        "miss_prob = 0.1   # occasional dropouts\n"
        "seed = 42\n";
    const ScenarioConfig cfg = parse_scenario_config(text, "test");
    CHECK(cfg.num_objects == 6);
    CHECK(cfg.num_frames == 120);
    CHECK(cfg.motion == MotionModel::crossing);
    CHECK(cfg.miss_prob == doctest::Approx(0.1));
    CHECK(cfg.seed == 42);
    CHECK(cfg.embed_dim == 256);  // untouched default

    CHECK_THROWS_AS(parse_scenario_config("bogus_key = 1\n", "test"), ParseError);
    CHECK_THROWS_AS(parse_scenario_config("num_objects 5\n", "test"), ParseError);
    CHECK_THROWS_AS(parse_scenario_config("miss_prob = 1.5\n", "test"), std::invalid_argument);

    // format -> parse round trip
    const ScenarioConfig again = parse_scenario_config(format_config(cfg), "echo");
    CHECK(again.num_objects == cfg.num_objects);
    CHECK(again.motion == cfg.motion);
    CHECK(again.seed == cfg.seed);
}

TEST_CASE("association and attention config parsing") {
    const AssociationConfig assoc = parse_association_config(
        "lambda_fuse = 0.5\ntau_high = 0.7\nenable_bistage = false\n", "test");
    CHECK(assoc.lambda_fuse == doctest::Approx(0.5));
    CHECK(assoc.tau_high == doctest::Approx(0.7));
    CHECK(!assoc.enable_bistage);
    CHECK(assoc.eta_ema == doctest::Approx(0.9));  // default

    CHECK_THROWS_AS(parse_association_config("tau_low = 0.9\ntau_high = 0.2\n", "test"),
                    std::invalid_argument);

    const AttentionPipelineConfig attn =
        parse_attention_config("num_queries = 16\nq_pos_mode = mlp\n", "test");
    CHECK(attn.num_queries == 16);
    CHECK(attn.q_pos_mode == QPosMode::mlp);
    CHECK_THROWS_AS(parse_attention_config("q_pos_mode = bogus\n", "test"), ParseError);

    const AssociationConfig echoed =
        parse_association_config(format_config(assoc), "echo");
    CHECK(echoed.lambda_fuse == doctest::Approx(assoc.lambda_fuse));
    CHECK(echoed.enable_bistage == assoc.enable_bistage);
}
