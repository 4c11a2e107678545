#include <gtest/gtest.h>

#include <cmath>

#include "pathnet/dfc.hpp"
#include "pathnet/partitions.hpp"
#include "pathnet/synthgen.hpp"
#include "pathnet/training.hpp"

using namespace pathnet;

namespace {

PartitionScheme tiny_scheme(int communities, int rois_per_community) {
    PartitionScheme s;
    s.name = "tiny";
    s.num_communities = communities;
    s.num_rois = communities * rois_per_community;
    for (int r = 0; r < s.num_rois; ++r) s.assignment.push_back(r / rois_per_community);
    s.validate();
    return s;
}

SynthConfig base_config() {
    SynthConfig cfg;
    cfg.name = "t";
    cfg.scheme = tiny_scheme(3, 2);
    cfg.subjects_per_class = {2, 2};
    cfg.scan_length = 120;
    cfg.noise_std = 0.4;
    cfg.seed = 555;
    cfg.class_profiles.assign(2, {});
    return cfg;
}

}  // namespace

TEST(Synthgen, DeterministicUnderSeed) {
    const SynthConfig cfg = base_config();
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        EXPECT_EQ(a[s].subject_id, b[s].subject_id);
        for (std::size_t i = 0; i < a[s].values.numel(); ++i)
            EXPECT_EQ(a[s].values[i], b[s].values[i]);
    }
}

TEST(Synthgen, DifferentSeedsDiffer) {
    SynthConfig cfg = base_config();
    const auto a = generate_synthetic(cfg);
    cfg.seed = 556;
    const auto b = generate_synthetic(cfg);
    bool any_diff = false;
    for (std::size_t i = 0; i < a[0].values.numel(); ++i)
        any_diff = any_diff || a[0].values[i] != b[0].values[i];
    EXPECT_TRUE(any_diff);
}

TEST(Synthgen, LabelBalanceMatchesConfigExactly) {
    SynthConfig cfg = base_config();
    cfg.subjects_per_class = {3, 5};
    const auto data = generate_synthetic(cfg);
    int c0 = 0, c1 = 0;
    for (const auto& ts : data) (ts.label == 0 ? c0 : c1)++;
    EXPECT_EQ(c0, 3);
    EXPECT_EQ(c1, 5);
}

TEST(Synthgen, FullCouplingNoNoiseGivesUnitTrajectories) {
    // g == 1 with zero noise collapses every community onto one latent factor
    SynthConfig cfg = base_config();
    cfg.noise_std = 0.0;
    cfg.default_coupling = 1.0;
    cfg.subjects_per_class = {1, 1};
    const auto data = generate_synthetic(cfg);
    const WindowSpec spec{30, 15};
    for (const auto& ts : data) {
        for (const auto& path : extract_paths(ts, cfg.scheme, spec)) {
            for (double w : path.weights) EXPECT_NEAR(w, 1.0, 1e-9);
        }
    }
}

TEST(Synthgen, ZeroCouplingKeepsTrajectoriesSmall) {
    // independent factors: mean |w| stays below 0.15 (50 seeds, scan >= 200)
    double total = 0.0;
    long long count = 0;
    for (int seed = 0; seed < 50; ++seed) {
        SynthConfig cfg = base_config();
        cfg.scan_length = 200;
        cfg.noise_std = 0.5;
        cfg.default_coupling = 0.0;
        cfg.subjects_per_class = {1, 1};
        cfg.seed = 9000 + static_cast<uint64_t>(seed);
        const auto data = generate_synthetic(cfg);
        for (const auto& ts : data) {
            for (const auto& path : extract_paths(ts, cfg.scheme, {30, 15})) {
                for (double w : path.weights) {
                    total += std::fabs(w);
                    ++count;
                }
            }
        }
    }
    EXPECT_LT(total / static_cast<double>(count), 0.15);
}

TEST(Synthgen, OppositeSignProfilesSeparateClasses) {
    SynthConfig cfg = base_config();
    cfg.scheme = tiny_scheme(3, 2);
    cfg.subjects_per_class = {50, 50};
    cfg.scan_length = 200;
    cfg.noise_std = 0.3;
    cfg.seed = 424242;
    cfg.class_profiles.assign(2, {});
    cfg.class_profiles[0].push_back({0, 1, {{0.0, 0.8}}});
    cfg.class_profiles[1].push_back({0, 1, {{0.0, -0.8}}});
    const auto data = generate_synthetic(cfg);

    int correct_sign = 0;
    for (const auto& ts : data) {
        const auto paths = extract_paths(ts, cfg.scheme, {30, 15});
        const auto& w = paths[static_cast<std::size_t>(path_index(0, 1, 3))].weights;
        double mean = 0.0;
        for (double v : w) mean += v;
        mean /= static_cast<double>(w.size());
        if ((ts.label == 0 && mean > 0) || (ts.label == 1 && mean < 0)) ++correct_sign;
    }
    EXPECT_GT(static_cast<double>(correct_sign) / static_cast<double>(data.size()), 0.95);
}

TEST(Synthgen, StepProfileChangesCouplingMidScan) {
    SynthConfig cfg = base_config();
    cfg.subjects_per_class = {8, 8};
    cfg.scan_length = 240;
    cfg.noise_std = 0.2;
    cfg.class_profiles.assign(2, {});
    cfg.class_profiles[0].push_back({0, 1, {{0.0, 0.8}, {0.5, -0.8}}});
    cfg.class_profiles[1].push_back({0, 1, {{0.0, 0.8}}});
    const auto data = generate_synthetic(cfg);
    // class 0 subjects: first-window coupling positive, last-window negative
    double first = 0.0, last = 0.0;
    int n0 = 0;
    for (const auto& ts : data) {
        if (ts.label != 0) continue;
        const auto paths = extract_paths(ts, cfg.scheme, {30, 30});
        const auto& w = paths[static_cast<std::size_t>(path_index(0, 1, 3))].weights;
        first += w.front();
        last += w.back();
        ++n0;
    }
    EXPECT_GT(first / n0, 0.4);
    EXPECT_LT(last / n0, -0.4);
}

TEST(Synthgen, InfeasibleCouplingNamesThePair) {
    SynthConfig cfg = base_config();
    cfg.class_profiles[0].push_back({1, 2, {{0.0, 1.5}}});
    try {
        cfg.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("(1,2)"), std::string::npos);
    }
}

TEST(Synthgen, InflationInfeasibilityNamesThePair) {
    // |g * (1 + noise^2)| > 1 even though |g| <= 1
    SynthConfig cfg = base_config();
    cfg.noise_std = 0.6;
    cfg.class_profiles[0].push_back({0, 2, {{0.0, 0.9}}});
    try {
        generate_synthetic(cfg);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("(0,2)"), std::string::npos);
    }
}

TEST(Synthgen, SeparabilityDialIsMonotone) {
    // CV accuracy decays toward chance as the class gap shrinks
    const double gaps[3] = {0.8, 0.3, 0.0};
    double acc[3];
    for (int k = 0; k < 3; ++k) {
        SynthConfig cfg = base_config();
        cfg.subjects_per_class = {12, 12};
        cfg.scan_length = 150;
        cfg.noise_std = 0.3;
        cfg.seed = 31337;
        cfg.class_profiles.assign(2, {});
        if (gaps[k] > 0.0) {
            cfg.class_profiles[0].push_back({0, 1, {{0.0, gaps[k]}}});
            cfg.class_profiles[1].push_back({0, 1, {{0.0, -gaps[k]}}});
        }
        const auto raw = generate_synthetic(cfg);
        std::vector<SubjectPaths> data;
        for (const auto& ts : raw) {
            SubjectPaths sp;
            sp.subject_id = ts.subject_id;
            sp.label = ts.label;
            sp.num_communities = cfg.scheme.num_communities;
            sp.paths = extract_paths(ts, cfg.scheme, {30, 15});
            data.push_back(std::move(sp));
        }
        ModelConfig mcfg;
        mcfg.d = 8;
        mcfg.heads = 2;
        mcfg.layers = 1;
        mcfg.num_classes = 2;
        TrainConfig tcfg;
        tcfg.epochs = 20;
        tcfg.folds = 3;
        tcfg.patience = 0;
        tcfg.seed = 77;
        tcfg.jobs = 2;
        acc[k] = run_cv(data, mcfg, tcfg).mean.acc;
    }
    EXPECT_GT(acc[0], 0.85);
    EXPECT_GE(acc[0] + 0.10, acc[1]);
    EXPECT_GE(acc[1] + 0.10, acc[2]);
    EXPECT_LT(acc[2], 0.75);
}
