#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "pathnet/checkpoint.hpp"
#include "pathnet/gradcheck.hpp"
#include "pathnet/io.hpp"
#include "pathnet/model.hpp"
#include "pathnet/rng.hpp"

using namespace pathnet;
namespace fs = std::filesystem;

namespace {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor& t) {
    Mat m(static_cast<std::size_t>(t.rows()), std::vector<double>(t.cols()));
    for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
    return m;
}

Mat mm(const Mat& a, const Mat& b) {
    Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

Mat softmax_rows_o(Mat s) {
    for (auto& row : s) {
        double mx = row[0];
        for (double v : row) mx = std::max(mx, v);
        double denom = 0.0;
        for (auto& v : row) {
            v = std::exp(v - mx);
            denom += v;
        }
        for (auto& v : row) v /= denom;
    }
    return s;
}

Mat layernorm_rows_o(const Mat& x, const Tensor& gain, const Tensor& bias) {
    Mat out = x;
    const std::size_t d = x[0].size();
    for (auto& row : out) {
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + 1e-5);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = gain[j] * (row[j] - mean) * inv + bias[j];
    }
    return out;
}

// Independent step-by-step encoder: QKV projections, per-head scaled
// dot-product attention, concat, output projection, residual + layer norm,
// optional FFN sublayer. Plain loops only.
Mat oracle_encoder(const Mat& x, const LayerParams& lp, int heads, int d) {
    const Mat q = mm(x, to_mat(lp.wq));
    const Mat k = mm(x, to_mat(lp.wk));
    const Mat v = mm(x, to_mat(lp.wv));
    const int dh = d / heads;
    const std::size_t T = x.size();
    Mat cat(T, std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int h = 0; h < heads; ++h) {
        Mat scores(T, std::vector<double>(T, 0.0));
        for (std::size_t i = 0; i < T; ++i)
            for (std::size_t j = 0; j < T; ++j) {
                double s = 0.0;
                for (int p = 0; p < dh; ++p) s += q[i][h * dh + p] * k[j][h * dh + p];
                scores[i][j] = s / std::sqrt(static_cast<double>(dh));
            }
        const Mat probs = softmax_rows_o(scores);
        for (std::size_t i = 0; i < T; ++i)
            for (int p = 0; p < dh; ++p) {
                double s = 0.0;
                for (std::size_t j = 0; j < T; ++j) s += probs[i][j] * v[j][h * dh + p];
                cat[i][h * dh + p] = s;
            }
    }
    Mat attn = mm(cat, to_mat(lp.wo));
    Mat z = x;
    for (std::size_t i = 0; i < T; ++i)
        for (int j = 0; j < d; ++j) z[i][j] += attn[i][j];
    z = layernorm_rows_o(z, lp.ln1_g, lp.ln1_b);
    if (!lp.has_ffn) return z;
    Mat f = mm(z, to_mat(lp.ffn_w1));
    for (auto& row : f)
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] += lp.ffn_b1[j];
            if (row[j] < 0) row[j] = 0;
        }
    f = mm(f, to_mat(lp.ffn_w2));
    Mat z2 = z;
    for (std::size_t i = 0; i < T; ++i)
        for (int j = 0; j < d; ++j) z2[i][j] += f[i][j] + lp.ffn_b2[static_cast<std::size_t>(j)];
    return layernorm_rows_o(z2, lp.ln2_g, lp.ln2_b);
}

Tensor random_matrix(int rows, int cols, uint64_t seed) {
    Rng rng(seed);
    Tensor t({rows, cols});
    for (auto& v : t.vec()) v = rng.uniform(-1, 1);
    return t;
}

std::vector<std::vector<double>> random_trajectories(int paths, int timesteps, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(paths));
    for (auto& traj : out) {
        traj.resize(static_cast<std::size_t>(timesteps));
        for (auto& w : traj) w = rng.uniform(-1, 1);
    }
    return out;
}

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.dropout = 0.0;
    cfg.num_classes = 2;
    return cfg;
}

}  // namespace

TEST(PositionalEncoding, TimeZeroIsSinCosPattern) {
    const Tensor pe = sinusoidal_positional_encoding(3, 8);
    for (int j = 0; j < 8; j += 2) {
        EXPECT_DOUBLE_EQ(pe(0, j), 0.0);
        EXPECT_DOUBLE_EQ(pe(0, j + 1), 1.0);
    }
}

TEST(EmbedPath, EqualWeightsDifferOnlyByPosition) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 3);
    ParamVars pv(params, false);
    Var x = embed_path({0.37, 0.37}, pv);
    const Tensor pe = sinusoidal_positional_encoding(2, cfg.d);
    for (int j = 0; j < cfg.d; ++j) {
        EXPECT_NEAR(x.value()(0, j) - pe(0, j), x.value()(1, j) - pe(1, j), 1e-15);
    }
}

TEST(EmbedPath, ZeroWeightsGivePositionalTable) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 3);  // embed_b initialized to zero
    ParamVars pv(params, false);
    Var x = embed_path({0.0, 0.0, 0.0}, pv);
    const Tensor pe = sinusoidal_positional_encoding(3, cfg.d);
    for (std::size_t i = 0; i < pe.numel(); ++i) EXPECT_DOUBLE_EQ(x.value()[i], pe[i]);
}

TEST(EncoderLayer, MatchesStraightLineOracleSingleHead) {
    ModelConfig cfg;
    cfg.d = 4;
    cfg.heads = 1;
    cfg.layers = 1;
    cfg.dropout = 0.0;
    cfg.num_classes = 2;
    cfg.use_ffn = false;  // attention sublayer only
    ModelParams params = ModelParams::init(cfg, 11);
    ParamVars pv(params, false);
    Tensor x = random_matrix(3, 4, 21);
    Var out = encoder_layer(Var::constant(x), pv.encoder[0], cfg, 3);
    const Mat expect = oracle_encoder(to_mat(x), params.encoder[0], 1, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_NEAR(out.value()(i, j), expect[i][j], 1e-12);
}

TEST(EncoderLayer, MatchesStraightLineOracleMultiHeadWithFfn) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 13);
    ParamVars pv(params, false);
    Tensor x = random_matrix(5, cfg.d, 22);
    Var out = encoder_layer(Var::constant(x), pv.encoder[0], cfg, 5);
    const Mat expect = oracle_encoder(to_mat(x), params.encoder[0], cfg.heads, cfg.d);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < cfg.d; ++j) EXPECT_NEAR(out.value()(i, j), expect[i][j], 1e-12);
}

TEST(EncoderLayer, SingleTokenIsLayerNormChain) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 17);
    ParamVars pv(params, false);
    Tensor x = random_matrix(1, cfg.d, 23);
    Var out = encoder_layer(Var::constant(x), pv.encoder[0], cfg, 1);
    const Mat expect = oracle_encoder(to_mat(x), params.encoder[0], cfg.heads, cfg.d);
    for (int j = 0; j < cfg.d; ++j) EXPECT_NEAR(out.value()(0, j), expect[0][j], 1e-12);
}

TEST(EncoderLayer, EqualKeysGiveUniformAttention) {
    // force all keys equal via wk = 0; attention output rows must coincide
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 19);
    for (auto& v : params.encoder[0].wk.vec()) v = 0.0;
    ParamVars pv(params, false);
    Tensor x = random_matrix(4, cfg.d, 29);
    Var attn = multi_head_attention(Var::constant(x), pv.encoder[0], cfg, 4);
    for (int i = 1; i < 4; ++i)
        for (int j = 0; j < cfg.d; ++j)
            EXPECT_NEAR(attn.value()(i, j), attn.value()(0, j), 1e-12);
}

TEST(TemporalPool, SingleTimestepReturnsTheRow) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 31);
    ParamVars pv(params, false);
    Tensor z = random_matrix(1, cfg.d, 37);
    PoolResult pr = temporal_pool(Var::constant(z), pv, 1);
    EXPECT_DOUBLE_EQ(pr.weights.value()[0], 1.0);
    for (int j = 0; j < cfg.d; ++j) EXPECT_DOUBLE_EQ(pr.pooled.value()(0, j), z(0, j));
}

TEST(TemporalPool, IdenticalRowsPoolToThatRow) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 41);
    ParamVars pv(params, false);
    Tensor z({4, cfg.d});
    Rng rng(43);
    for (int j = 0; j < cfg.d; ++j) {
        const double v = rng.uniform(-1, 1);
        for (int i = 0; i < 4; ++i) z(i, j) = v;
    }
    PoolResult pr = temporal_pool(Var::constant(z), pv, 4);
    for (int j = 0; j < cfg.d; ++j) EXPECT_NEAR(pr.pooled.value()(0, j), z(0, j), 1e-12);
}

TEST(TemporalPool, WeightsFormSimplex) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 47);
    ParamVars pv(params, false);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor z = random_matrix(12, cfg.d, 100 + trial);
        PoolResult pr = temporal_pool(Var::constant(z), pv, 6);  // 2 blocks of 6
        for (int b = 0; b < 2; ++b) {
            double s = 0.0;
            for (int t = 0; t < 6; ++t) {
                const double w = pr.weights.value()[static_cast<std::size_t>(b * 6 + t)];
                EXPECT_GE(w, 0.0);
                s += w;
            }
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(TemporalPool, DisabledEqualsArithmeticMeanExactly) {
    ModelConfig cfg = small_config();
    cfg.use_temporal_pool = false;
    ModelParams params = ModelParams::init(cfg, 53);
    ParamVars pv(params, false);
    Tensor z = random_matrix(6, cfg.d, 59);
    PoolResult pr = temporal_pool(Var::constant(z), pv, 3);
    for (int b = 0; b < 2; ++b) {
        for (int j = 0; j < cfg.d; ++j) {
            double mean = 0.0;
            for (int t = 0; t < 3; ++t) mean += z(b * 3 + t, j);
            mean /= 3;
            EXPECT_EQ(pr.pooled.value()(b, j), mean);
        }
    }
}

TEST(CrossPathFuse, DisabledIsExactIdentity) {
    ModelConfig cfg = small_config();
    cfg.use_global_fusion = false;
    ModelParams params = ModelParams::init(cfg, 61);
    ParamVars pv(params, false);
    Var h = Var::constant(random_matrix(5, cfg.d, 67));
    Var fused = cross_path_fuse(h, pv);
    EXPECT_EQ(fused.node().get(), h.node().get());
}

TEST(CrossPathFuse, SingleTokenMatchesOracle) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 71);
    ParamVars pv(params, false);
    Tensor h = random_matrix(1, cfg.d, 73);
    Var fused = cross_path_fuse(Var::constant(h), pv);
    const Mat expect = oracle_encoder(to_mat(h), params.fusion[0], cfg.heads, cfg.d);
    for (int j = 0; j < cfg.d; ++j) EXPECT_NEAR(fused.value()(0, j), expect[0][j], 1e-12);
}

TEST(CrossPathFuse, IdenticalRowsStayIdentical) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 79);
    ParamVars pv(params, false);
    Tensor h({6, cfg.d});
    Rng rng(83);
    for (int j = 0; j < cfg.d; ++j) {
        const double v = rng.uniform(-1, 1);
        for (int i = 0; i < 6; ++i) h(i, j) = v;
    }
    Var fused = cross_path_fuse(Var::constant(h), pv);
    for (int i = 1; i < 6; ++i)
        for (int j = 0; j < cfg.d; ++j) EXPECT_EQ(fused.value()(i, j), fused.value()(0, j));
}

TEST(CrossPathFuse, RowPermutationPermutesOutput) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 89);
    ParamVars pv(params, false);
    Tensor h = random_matrix(5, cfg.d, 97);
    Var fused = cross_path_fuse(Var::constant(h), pv);

    const std::vector<int> perm{3, 0, 4, 1, 2};
    Tensor hp({5, cfg.d});
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < cfg.d; ++j) hp(i, j) = h(perm[static_cast<std::size_t>(i)], j);
    Var fused_p = cross_path_fuse(Var::constant(hp), pv);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < cfg.d; ++j)
            EXPECT_NEAR(fused_p.value()(i, j), fused.value()(perm[static_cast<std::size_t>(i)], j),
                        1e-9);
}

TEST(AttentionPool, SinglePathIsIdentity) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 101);
    ParamVars pv(params, false);
    Tensor h = random_matrix(1, cfg.d, 103);
    AttentionPoolResult ap = attention_pool(Var::constant(h), pv);
    EXPECT_DOUBLE_EQ(ap.weights.value()[0], 1.0);
    for (int j = 0; j < cfg.d; ++j) EXPECT_DOUBLE_EQ(ap.pooled.value()(0, j), h(0, j));
}

TEST(AttentionPool, IdenticalRowsGiveUniformWeights) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 107);
    ParamVars pv(params, false);
    Tensor h({5, cfg.d});
    Rng rng(109);
    for (int j = 0; j < cfg.d; ++j) {
        const double v = rng.uniform(-1, 1);
        for (int i = 0; i < 5; ++i) h(i, j) = v;
    }
    AttentionPoolResult ap = attention_pool(Var::constant(h), pv);
    for (int l = 0; l < 5; ++l) EXPECT_NEAR(ap.weights.value()[l], 0.2, 1e-15);
}

TEST(AttentionPool, WeightsFormSimplex) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 113);
    ParamVars pv(params, false);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor h = random_matrix(9, cfg.d, 200 + trial);
        AttentionPoolResult ap = attention_pool(Var::constant(h), pv);
        double s = 0.0;
        for (int l = 0; l < 9; ++l) {
            EXPECT_GE(ap.weights.value()[l], 0.0);
            s += ap.weights.value()[l];
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Classify, ZeroParametersGiveUniform) {
    ModelConfig cfg = small_config();
    cfg.num_classes = 4;
    ModelParams params = ModelParams::init(cfg, 127);
    for (auto& v : params.cls_w.vec()) v = 0.0;
    ParamVars pv(params, false);
    Var probs = classify(Var::constant(random_matrix(1, cfg.d, 131)), pv);
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(probs.value()[c], 0.25, 1e-15);
}

TEST(Classify, LargeBiasSaturates) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 137);
    for (auto& v : params.cls_w.vec()) v = 0.0;
    params.cls_b[0] = 10.0;
    params.cls_b[1] = -10.0;
    ParamVars pv(params, false);
    Var probs = classify(Var::constant(random_matrix(1, cfg.d, 139)), pv);
    EXPECT_NEAR(probs.value()[0], 1.0, 1e-8);
    EXPECT_NEAR(probs.value()[1], 0.0, 1e-8);
}

TEST(Forward, SinglePathReturnsSimplexPoint) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 149);
    ParamVars pv(params, false);
    ForwardResult res = forward_subject(random_trajectories(1, 5, 151), pv);
    double s = 0.0;
    for (int c = 0; c < cfg.num_classes; ++c) {
        EXPECT_GE(res.probs.value()[c], 0.0);
        s += res.probs.value()[c];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Forward, ShapeContractAcrossConfigs) {
    const int combos[][4] = {{3, 4, 8, 2}, {4, 2, 12, 3}, {2, 7, 6, 1}, {5, 3, 16, 4}};
    for (const auto& combo : combos) {
        ModelConfig cfg;
        cfg.d = combo[2];
        cfg.heads = combo[3];
        cfg.layers = 2;
        cfg.dropout = 0.0;
        cfg.num_classes = 3;
        ModelParams params = ModelParams::init(cfg, 157);
        ParamVars pv(params, false);
        const int L = num_paths(combo[0]);
        ForwardResult res = forward_subject(random_trajectories(L, combo[1], 163), pv);
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += res.probs.value()[c];
        EXPECT_NEAR(s, 1.0, 1e-12);
        EXPECT_EQ(res.path_weights.value().numel(), static_cast<std::size_t>(L));
    }
}

TEST(Forward, EvalModeIsBitDeterministic) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 167);
    ParamVars pv1(params, false), pv2(params, false);
    const auto traj = random_trajectories(3, 6, 173);
    ForwardResult a = forward_subject(traj, pv1);
    ForwardResult b = forward_subject(traj, pv2);
    for (std::size_t i = 0; i < a.probs.value().numel(); ++i)
        EXPECT_EQ(a.probs.value()[i], b.probs.value()[i]);
    for (std::size_t i = 0; i < a.pooled.value().numel(); ++i)
        EXPECT_EQ(a.pooled.value()[i], b.pooled.value()[i]);
}

TEST(Forward, SubjectsAreIndependent) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 179);
    const auto t1 = random_trajectories(3, 6, 181);
    const auto t2 = random_trajectories(3, 6, 191);
    ParamVars pv(params, false);
    const Tensor first_alone = forward_subject(t1, pv).probs.value();
    // run the other subject first, then repeat
    forward_subject(t2, pv);
    const Tensor first_again = forward_subject(t1, pv).probs.value();
    for (std::size_t i = 0; i < first_alone.numel(); ++i)
        EXPECT_EQ(first_alone[i], first_again[i]);
}

TEST(Forward, PathOrderInvarianceOfPooledRepresentation) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 193);
    ParamVars pv(params, false);
    const auto traj = random_trajectories(6, 5, 197);
    const Tensor z = forward_subject(traj, pv).pooled.value();

    std::vector<std::vector<double>> shuffled = traj;
    std::swap(shuffled[0], shuffled[4]);
    std::swap(shuffled[2], shuffled[5]);
    const Tensor z2 = forward_subject(shuffled, pv).pooled.value();
    for (std::size_t i = 0; i < z.numel(); ++i) EXPECT_NEAR(z[i], z2[i], 1e-9);
}

TEST(Forward, TrainingDropoutChangesOutputEvalDoesNot) {
    ModelConfig cfg = small_config();
    cfg.dropout = 0.3;
    ModelParams params = ModelParams::init(cfg, 199);
    ParamVars pv(params, false);
    const auto traj = random_trajectories(3, 6, 211);
    const Tensor eval1 = forward_subject(traj, pv).probs.value();
    const Tensor eval2 = forward_subject(traj, pv).probs.value();
    for (std::size_t i = 0; i < eval1.numel(); ++i) EXPECT_EQ(eval1[i], eval2[i]);

    DropoutState drop;
    drop.seed = 5;
    drop.active = true;
    const Tensor train1 = forward_subject(traj, pv, &drop).probs.value();
    bool differs = false;
    for (std::size_t i = 0; i < eval1.numel(); ++i) differs = differs || train1[i] != eval1[i];
    EXPECT_TRUE(differs);

    // identical dropout seed -> identical training output
    DropoutState drop2;
    drop2.seed = 5;
    drop2.active = true;
    const Tensor train2 = forward_subject(traj, pv, &drop2).probs.value();
    for (std::size_t i = 0; i < train1.numel(); ++i) EXPECT_EQ(train1[i], train2[i]);
}

TEST(Forward, MixedTrajectoryLengthsAreRejected) {
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 223);
    ParamVars pv(params, false);
    std::vector<std::vector<double>> traj{{0.1, 0.2, 0.3}, {0.1, 0.2}};
    EXPECT_THROW(forward_subject(traj, pv), ContractError);
}

TEST(Params, CountIsPureFunctionOfConfig) {
    ModelConfig cfg = small_config();
    const std::size_t n1 = ModelParams::init(cfg, 1).param_count();
    const std::size_t n2 = ModelParams::init(cfg, 2).param_count();
    EXPECT_EQ(n1, n2);

    ModelConfig no_tp = cfg;
    no_tp.use_temporal_pool = false;
    EXPECT_EQ(ModelParams::init(no_tp, 1).param_count(),
              n1 - static_cast<std::size_t>(cfg.d * cfg.d + cfg.d));

    ModelConfig no_ge = cfg;
    no_ge.use_global_fusion = false;
    EXPECT_LT(ModelParams::init(no_ge, 1).param_count(), n1);
}

TEST(Params, SharedAcrossAnyNumberOfPaths) {
    // one parameter set serves L = 1 and L = 15 alike
    ModelConfig cfg = small_config();
    ModelParams params = ModelParams::init(cfg, 227);
    ParamVars pv(params, false);
    forward_subject(random_trajectories(1, 4, 229), pv);
    forward_subject(random_trajectories(15, 4, 233), pv);
    SUCCEED();
}

TEST(Forward, FullGradientCheckSmall) {
    const GradCheckResult res = gradcheck_forward(2025);
    EXPECT_TRUE(res.pass) << res.name << " max rel err " << res.max_rel_err;
    EXPECT_LT(res.max_rel_err, 1e-4);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    ModelConfig cfg = small_config();
    cfg.num_classes = 3;
    ModelParams params = ModelParams::init(cfg, 239);
    const fs::path dir = fs::temp_directory_path() / "pathnet_model_test";
    fs::create_directories(dir);
    const fs::path p1 = dir / "a.ckpt";
    const fs::path p2 = dir / "b.ckpt";
    save_checkpoint(p1, params);
    ModelParams loaded = load_checkpoint(p1);
    save_checkpoint(p2, loaded);
    EXPECT_EQ(read_text_file(p1), read_text_file(p2));

    std::vector<Tensor*> orig = params.tensors();
    std::vector<Tensor*> back = loaded.tensors();
    ASSERT_EQ(orig.size(), back.size());
    for (std::size_t k = 0; k < orig.size(); ++k) {
        ASSERT_EQ(orig[k]->numel(), back[k]->numel());
        for (std::size_t i = 0; i < orig[k]->numel(); ++i)
            EXPECT_EQ((*orig[k])[i], (*back[k])[i]);
    }
}

TEST(Checkpoint, RejectsCorruptedFile) {
    const fs::path dir = fs::temp_directory_path() / "pathnet_model_test";
    fs::create_directories(dir);
    const fs::path p = dir / "bad.ckpt";
    write_text_file(p, "not a checkpoint\n");
    EXPECT_THROW(load_checkpoint(p), DataError);
}
