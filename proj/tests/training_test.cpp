#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pathnet/metrics.hpp"
#include "pathnet/model.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/training.hpp"

using namespace pathnet;

namespace {

// Class signal on path (0,1): class 0 trends positive, class 1 negative.
std::vector<SubjectPaths> toy_dataset(int per_class, int communities, int timesteps,
                                      uint64_t seed, double gap) {
    std::vector<SubjectPaths> out;
    Rng rng(seed);
    for (int cls = 0; cls < 2; ++cls) {
        for (int s = 0; s < per_class; ++s) {
            SubjectPaths sp;
            sp.subject_id = "toy-c" + std::to_string(cls) + "-s" + std::to_string(s);
            sp.label = cls;
            sp.num_communities = communities;
            for (int i = 0; i < communities; ++i) {
                for (int j = i + 1; j < communities; ++j) {
                    PathTrajectory p;
                    p.i = i;
                    p.j = j;
                    for (int t = 0; t < timesteps; ++t) {
                        double w = 0.25 * rng.normal();
                        if (i == 0 && j == 1) w += (cls == 0 ? gap : -gap);
                        p.weights.push_back(std::clamp(w, -1.0, 1.0));
                    }
                    sp.paths.push_back(std::move(p));
                }
            }
            out.push_back(std::move(sp));
        }
    }
    return out;
}

std::vector<int> all_indices(std::size_t n) {
    std::vector<int> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    return idx;
}

}  // namespace

TEST(CrossEntropy, UniformPredictionIsLogC) {
    Var probs = Var::constant(Tensor({3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    EXPECT_NEAR(cross_entropy(probs, 0).value()[0], 1.0986122886681098, 1e-15);
}

TEST(CrossEntropy, CertainCorrectPredictionIsZero) {
    Var probs = Var::constant(Tensor({2}, {0.0, 1.0}));
    EXPECT_DOUBLE_EQ(cross_entropy(probs, 1).value()[0], 0.0);
}

TEST(CrossEntropy, HandComputedValue) {
    Var probs = Var::constant(Tensor({2}, {0.7, 0.3}));
    EXPECT_NEAR(cross_entropy(probs, 1).value()[0], 1.2039728043259361, 1e-15);
}

TEST(StratifiedKfold, BalancedTenSubjectsFiveFolds) {
    std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    const FoldSplit split = stratified_kfold(labels, 5, 7);
    for (int f = 0; f < 5; ++f) {
        int c0 = 0, c1 = 0;
        for (int i : split.test[f]) (labels[i] == 0 ? c0 : c1)++;
        EXPECT_EQ(c0, 1);
        EXPECT_EQ(c1, 1);
        EXPECT_EQ(split.train[f].size(), 8u);
    }
}

TEST(StratifiedKfold, FourSubjectsTwoFolds) {
    std::vector<int> labels{0, 0, 1, 1};
    const FoldSplit split = stratified_kfold(labels, 2, 11);
    for (int f = 0; f < 2; ++f) {
        int c0 = 0, c1 = 0;
        for (int i : split.test[f]) (labels[i] == 0 ? c0 : c1)++;
        EXPECT_EQ(c0, 1);
        EXPECT_EQ(c1, 1);
    }
}

TEST(StratifiedKfold, LargeImbalancedCohort) {
    // 479 + 466 subjects over 5 folds: sizes 189 +- 1, class ratio +- 1
    std::vector<int> labels;
    for (int i = 0; i < 479; ++i) labels.push_back(1);
    for (int i = 0; i < 466; ++i) labels.push_back(0);
    const FoldSplit split = stratified_kfold(labels, 5, 13);
    for (int f = 0; f < 5; ++f) {
        int c0 = 0, c1 = 0;
        for (int i : split.test[f]) (labels[i] == 0 ? c0 : c1)++;
        const int total = c0 + c1;
        EXPECT_GE(total, 188);
        EXPECT_LE(total, 190);
        EXPECT_GE(c1, 95);
        EXPECT_LE(c1, 96);
        EXPECT_GE(c0, 93);
        EXPECT_LE(c0, 94);
    }
}

TEST(StratifiedKfold, PartitionsWithoutLeakage) {
    std::vector<int> labels;
    Rng rng(17);
    for (int i = 0; i < 37; ++i) labels.push_back(static_cast<int>(rng.below(3)));
    for (int i = 0; i < 9; ++i) labels.push_back(i % 3);  // each class >= folds
    const FoldSplit split = stratified_kfold(labels, 3, 55);
    std::set<int> seen;
    for (int f = 0; f < split.folds(); ++f) {
        std::set<int> train(split.train[f].begin(), split.train[f].end());
        for (int i : split.test[f]) {
            EXPECT_EQ(train.count(i), 0u) << "subject " << i << " leaks in fold " << f;
            EXPECT_EQ(seen.count(i), 0u) << "subject " << i << " tested twice";
            seen.insert(i);
        }
        EXPECT_EQ(split.train[f].size() + split.test[f].size(), labels.size());
    }
    EXPECT_EQ(seen.size(), labels.size());
}

TEST(StratifiedKfold, DeterministicUnderSeed) {
    std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const FoldSplit a = stratified_kfold(labels, 3, 99);
    const FoldSplit b = stratified_kfold(labels, 3, 99);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.train, b.train);
}

TEST(StratifiedKfold, SmallClassIsConfigError) {
    std::vector<int> labels{0, 0, 0, 0, 0, 1, 1};  // class 1 has 2 < 5 folds
    EXPECT_THROW(stratified_kfold(labels, 5, 1), ConfigError);
}

TEST(Optimizer, PlainSgdStepIsExact) {
    Tensor p({3}, {1.0, -2.0, 0.5});
    Tensor g({3}, {0.5, 0.25, -1.0});
    Optimizer opt(OptimizerKind::Sgd, 0.1, 0.0);
    opt.step({&p}, {g});
    EXPECT_DOUBLE_EQ(p[0], 1.0 - 0.1 * 0.5);
    EXPECT_DOUBLE_EQ(p[1], -2.0 - 0.1 * 0.25);
    EXPECT_DOUBLE_EQ(p[2], 0.5 - 0.1 * -1.0);
}

TEST(Optimizer, ZeroLearningRateLeavesParamsUnchanged) {
    Tensor p({2}, {3.0, -4.0});
    Optimizer opt(OptimizerKind::SgdMomentum, 0.0, 0.9);
    for (int step = 0; step < 10; ++step) {
        opt.step({&p}, {Tensor({2}, {1.0, -2.0})});
    }
    EXPECT_DOUBLE_EQ(p[0], 3.0);
    EXPECT_DOUBLE_EQ(p[1], -4.0);
}

TEST(Optimizer, MomentumMatchesClosedFormRecurrence) {
    Tensor p({1}, {0.0});
    const double lr = 0.1, mu = 0.9;
    Optimizer opt(OptimizerKind::SgdMomentum, lr, mu);
    const double grads[3] = {1.0, -0.5, 2.0};
    double v = 0.0, expect = 0.0;
    for (double g : grads) {
        opt.step({&p}, {Tensor({1}, {g})});
        v = mu * v + g;
        expect -= lr * v;
        EXPECT_DOUBLE_EQ(p[0], expect);
    }
}

TEST(Optimizer, AdaptiveMatchesAdamRecurrence) {
    Tensor p({1}, {1.0});
    const double lr = 0.01;
    Optimizer opt(OptimizerKind::Adaptive, lr, 0.9);
    const double grads[3] = {0.3, -0.7, 0.1};
    double m = 0, v = 0, expect = 1.0;
    int t = 0;
    for (double g : grads) {
        opt.step({&p}, {Tensor({1}, {g})});
        ++t;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1 - std::pow(0.9, t));
        const double vh = v / (1 - std::pow(0.999, t));
        expect -= lr * mh / (std::sqrt(vh) + 1e-8);
        EXPECT_NEAR(p[0], expect, 1e-15);
    }
}

TEST(TrainModel, LossStrictlyDecreasesOverFirstFiveEpochs) {
    // smoke contract on a fixed tiny batch with the default config
    const auto data = toy_dataset(2, 3, 6, 5150, 0.8);
    ModelConfig mcfg;  // defaults: d=32, heads=4, layers=6, dropout=0.1
    mcfg.num_classes = 2;
    TrainConfig tcfg;  // defaults: lr=0.1, momentum sgd, batch 32
    tcfg.epochs = 5;
    tcfg.seed = 21;
    tcfg.jobs = 1;
    const TrainOutcome out = train_model(data, all_indices(data.size()), mcfg, tcfg);
    ASSERT_EQ(out.loss_curve.size(), 5u);
    for (std::size_t e = 1; e < out.loss_curve.size(); ++e) {
        EXPECT_LT(out.loss_curve[e], out.loss_curve[e - 1])
            << "epoch " << e << ": " << out.loss_curve[e] << " vs " << out.loss_curve[e - 1];
    }
}

TEST(TrainModel, OverfitsEightSeparableSubjects) {
    const auto data = toy_dataset(4, 3, 8, 6060, 0.7);
    ModelConfig mcfg;
    mcfg.d = 16;
    mcfg.heads = 2;
    mcfg.layers = 2;
    mcfg.num_classes = 2;
    TrainConfig tcfg;
    tcfg.epochs = 200;
    tcfg.patience = 0;  // run the full budget
    tcfg.seed = 31;
    tcfg.jobs = 2;
    const TrainOutcome out = train_model(data, all_indices(data.size()), mcfg, tcfg);
    const EvalOutcome eval = eval_model(out.params, data, all_indices(data.size()), 2);
    EXPECT_DOUBLE_EQ(eval.metrics.acc, 1.0);
}

TEST(TrainModel, NanLossAbortsWithNumericError) {
    auto data = toy_dataset(2, 2, 4, 777, 0.5);
    for (auto& p : data[0].paths)
        for (auto& w : p.weights) w = 1e308;  // overflow on the first forward
    ModelConfig mcfg;
    mcfg.d = 8;
    mcfg.heads = 2;
    mcfg.layers = 1;
    mcfg.num_classes = 2;
    TrainConfig tcfg;
    tcfg.epochs = 2;
    tcfg.patience = 0;
    tcfg.jobs = 1;
    EXPECT_THROW(train_model(data, all_indices(data.size()), mcfg, tcfg), NumericError);
}

TEST(Dataset, MixedLengthsRejected) {
    auto data = toy_dataset(2, 3, 6, 888, 0.5);
    for (auto& p : data[1].paths) p.weights.pop_back();
    EXPECT_THROW(validate_training_dataset(data), DataError);
}

TEST(RunCv, ProducesOneRowPerFoldAndAggregates) {
    const auto data = toy_dataset(6, 3, 5, 999, 0.8);
    ModelConfig mcfg;
    mcfg.d = 8;
    mcfg.heads = 2;
    mcfg.layers = 1;
    mcfg.num_classes = 2;
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.folds = 3;
    tcfg.patience = 0;
    tcfg.jobs = 2;
    const CvResult cv = run_cv(data, mcfg, tcfg);
    EXPECT_EQ(cv.per_fold.size(), 3u);
    EXPECT_GE(cv.mean.acc, 0.0);
    EXPECT_LE(cv.mean.acc, 1.0);
}

TEST(RunCv, BitIdenticalAcrossRuns) {
    const auto data = toy_dataset(5, 3, 5, 1111, 0.6);
    ModelConfig mcfg;
    mcfg.d = 8;
    mcfg.heads = 2;
    mcfg.layers = 1;
    mcfg.num_classes = 2;
    TrainConfig tcfg;
    tcfg.epochs = 4;
    tcfg.folds = 2;
    tcfg.patience = 0;
    tcfg.seed = 2222;
    tcfg.jobs = 2;  // parallelism must not affect results
    const CvResult a = run_cv(data, mcfg, tcfg);
    TrainConfig serial = tcfg;
    serial.jobs = 1;
    const CvResult b = run_cv(data, mcfg, serial);
    ASSERT_EQ(a.per_fold.size(), b.per_fold.size());
    for (std::size_t f = 0; f < a.per_fold.size(); ++f) {
        EXPECT_EQ(a.per_fold[f].acc, b.per_fold[f].acc);
        EXPECT_EQ(a.per_fold[f].auc, b.per_fold[f].auc);
        EXPECT_EQ(a.per_fold[f].f1, b.per_fold[f].f1);
        EXPECT_EQ(a.per_fold[f].sen, b.per_fold[f].sen);
        EXPECT_EQ(a.per_fold[f].spe, b.per_fold[f].spe);
    }
}

TEST(TrainModel, EarlyStoppingStopsOnPlateau) {
    // gap 0: nothing to learn, validation loss plateaus quickly
    const auto data = toy_dataset(10, 3, 5, 3333, 0.0);
    ModelConfig mcfg;
    mcfg.d = 8;
    mcfg.heads = 2;
    mcfg.layers = 1;
    mcfg.num_classes = 2;
    TrainConfig tcfg;
    tcfg.epochs = 60;
    tcfg.patience = 3;
    tcfg.val_fraction = 0.2;
    tcfg.seed = 4;
    tcfg.jobs = 2;
    const TrainOutcome out = train_model(data, all_indices(data.size()), mcfg, tcfg);
    EXPECT_FALSE(out.val_curve.empty());
    EXPECT_LT(out.epochs_run, 60);
}
