#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathnet/autodiff.hpp"
#include "pathnet/model.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/tensor.hpp"
#include "pathnet/training.hpp"

namespace pathnet {

// Central-difference gradient verification. A scalar-valued function of some
// tensors is evaluated analytically (one backward pass) and numerically
// (2 forward passes per coordinate, h = 1e-5).

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t coords = 0;
    bool pass = true;
    double tolerance = 1e-4;
};

using ScalarFn = std::function<Var(const std::vector<Var>&)>;

namespace detail {

// Relative error with near-zero handling: when both gradients are tiny the
// central difference is dominated by roundoff, so compare absolutely.
inline double grad_rel_err(double analytic, double numeric) {
    const double denom = std::max(std::fabs(analytic), std::fabs(numeric));
    if (denom < 1e-6) return std::fabs(analytic - numeric) < 1e-8 ? 0.0 : 1.0;
    return std::fabs(analytic - numeric) / denom;
}

}  // namespace detail

inline GradCheckResult check_gradients(const std::string& name, const ScalarFn& fn,
                                       std::vector<Tensor> inputs, double h = 1e-5,
                                       double tolerance = 1e-4) {
    GradCheckResult res;
    res.name = name;
    res.tolerance = tolerance;

    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const auto& t : inputs) vars.push_back(Var::leaf(t, true));
    Var root = fn(vars);
    if (root.value().numel() != 1) {
        throw ContractError("check_gradients(" + name + "): fn must return a scalar");
    }
    backward(root);
    std::vector<Tensor> analytic;
    analytic.reserve(vars.size());
    for (const auto& v : vars) analytic.push_back(v.grad());

    auto eval_at = [&](const std::vector<Tensor>& pts) {
        std::vector<Var> leaves;
        leaves.reserve(pts.size());
        for (const auto& t : pts) leaves.push_back(Var::leaf(t, false));
        return fn(leaves).value()[0];
    };

    for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < inputs[k].numel(); ++i) {
            const double orig = inputs[k][i];
            inputs[k][i] = orig + h;
            const double fp = eval_at(inputs);
            inputs[k][i] = orig - h;
            const double fm = eval_at(inputs);
            inputs[k][i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double err = detail::grad_rel_err(analytic[k][i], numeric);
            res.max_rel_err = std::max(res.max_rel_err, err);
            ++res.coords;
        }
    }
    res.pass = res.max_rel_err < tolerance;
    return res;
}

// A scalar readout that exercises every output coordinate with distinct
// weights, so a wrong entry anywhere in the op's backward shows up.
inline Var weighted_readout(const Var& y, uint64_t seed) {
    Rng rng(seed);
    Tensor w(y.value().shape());
    for (auto& v : w.vec()) v = rng.uniform(-1.0, 1.0);
    return sum(mul(y, Var::constant(std::move(w))));
}

// ---------------------------------------------------------------------------
// standard suite: every differentiable op at random small shapes, then the
// composed model forward

inline std::vector<GradCheckResult> gradcheck_op_suite(uint64_t seed, int trials = 10) {
    std::vector<GradCheckResult> results;
    Rng shape_rng(mix_seed(seed, 0x6cULL));

    auto rand_tensor = [&](std::vector<int> shape, uint64_t s, double lo = -1.5,
                           double hi = 1.5) {
        Rng r(mix_seed(seed, 0xda7aULL, s));
        Tensor t(std::move(shape));
        for (auto& v : t.vec()) v = r.uniform(lo, hi);
        return t;
    };

    auto run = [&](const std::string& name, const ScalarFn& fn, std::vector<Tensor> inputs) {
        GradCheckResult r = check_gradients(name, fn, std::move(inputs));
        results.push_back(r);
    };

    for (int trial = 0; trial < trials; ++trial) {
        const uint64_t t = static_cast<uint64_t>(trial);
        const int m = 2 + static_cast<int>(shape_rng.below(3));
        const int k = 2 + static_cast<int>(shape_rng.below(3));
        const int n = 2 + static_cast<int>(shape_rng.below(3));
        const std::string tag = "#" + std::to_string(trial);

        run("matmul " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(matmul(v[0], v[1]), mix_seed(seed, 1, t));
            },
            {rand_tensor({m, k}, t * 100 + 0), rand_tensor({k, n}, t * 100 + 1)});

        run("add " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(add(v[0], v[1]), mix_seed(seed, 2, t));
            },
            {rand_tensor({m, n}, t * 100 + 2), rand_tensor({m, n}, t * 100 + 3)});

        run("sub " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(sub(v[0], v[1]), mix_seed(seed, 3, t));
            },
            {rand_tensor({m, n}, t * 100 + 4), rand_tensor({m, n}, t * 100 + 5)});

        run("mul " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(mul(v[0], v[1]), mix_seed(seed, 4, t));
            },
            {rand_tensor({m, n}, t * 100 + 6), rand_tensor({m, n}, t * 100 + 7)});

        run("scale " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(scale(v[0], -0.7), mix_seed(seed, 5, t));
            },
            {rand_tensor({m, n}, t * 100 + 8)});

        run("tanh " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(tanh(v[0]), mix_seed(seed, 6, t));
            },
            {rand_tensor({m, n}, t * 100 + 9)});

        // keep relu inputs away from the kink
        {
            Tensor x = rand_tensor({m, n}, t * 100 + 10);
            for (auto& v : x.vec()) {
                if (std::fabs(v) < 0.2) v = v < 0 ? v - 0.2 : v + 0.2;
            }
            run("relu " + tag,
                [&](const std::vector<Var>& v) {
                    return weighted_readout(relu(v[0]), mix_seed(seed, 7, t));
                },
                {std::move(x)});
        }

        run("dropout " + tag,
            [&, t](const std::vector<Var>& v) {
                return weighted_readout(dropout(v[0], 0.4, mix_seed(seed, 0xd0ULL, t)),
                                        mix_seed(seed, 8, t));
            },
            {rand_tensor({m, n}, t * 100 + 11)});

        run("transpose " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(transpose(v[0]), mix_seed(seed, 9, t));
            },
            {rand_tensor({m, n}, t * 100 + 12)});

        run("add_rowvec " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(add_rowvec(v[0], v[1]), mix_seed(seed, 10, t));
            },
            {rand_tensor({m, n}, t * 100 + 13), rand_tensor({n}, t * 100 + 14)});

        run("softmax rows " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(softmax(v[0], 1), mix_seed(seed, 11, t));
            },
            {rand_tensor({m, n}, t * 100 + 15)});

        run("softmax cols " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(softmax(v[0], 0), mix_seed(seed, 12, t));
            },
            {rand_tensor({m, n}, t * 100 + 16)});

        run("layer_norm " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(layer_norm(v[0], v[1], v[2], 1e-5),
                                        mix_seed(seed, 13, t));
            },
            {rand_tensor({m, n}, t * 100 + 17), rand_tensor({n}, t * 100 + 18, 0.5, 1.5),
             rand_tensor({n}, t * 100 + 19)});

        run("stack/slice/concat " + tag,
            [&](const std::vector<Var>& v) {
                Var stacked = stack_rows({v[0], v[1]});
                Var left = col_slice(stacked, 0, n / 2);
                Var right = col_slice(stacked, n / 2, n - n / 2);
                return weighted_readout(concat_cols({right, left}), mix_seed(seed, 14, t));
            },
            {rand_tensor({n}, t * 100 + 20), rand_tensor({n}, t * 100 + 21)});

        run("mean_rows " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(mean_rows(v[0]), mix_seed(seed, 15, t));
            },
            {rand_tensor({m, n}, t * 100 + 22)});

        run("block_mean_rows " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(block_mean_rows(v[0], m), mix_seed(seed, 16, t));
            },
            {rand_tensor({2 * m, n}, t * 100 + 23)});

        run("reshape/pick/log " + tag,
            [&](const std::vector<Var>& v) {
                Var flat = reshape(v[0], {m * n});
                return scale(log_floor(pick(flat, 1), 1e-12), -1.0);
            },
            {rand_tensor({m, n}, t * 100 + 24, 0.5, 2.0)});

        run("block_softmax " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(block_softmax(v[0], m), mix_seed(seed, 17, t));
            },
            {rand_tensor({3 * m}, t * 100 + 25)});

        run("block_attention " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(
                    block_attention(v[0], v[1], v[2], m, 1.0 / std::sqrt(double(k))),
                    mix_seed(seed, 18, t));
            },
            {rand_tensor({2 * m, k}, t * 100 + 26), rand_tensor({2 * m, k}, t * 100 + 27),
             rand_tensor({2 * m, k}, t * 100 + 28)});

        run("block_weighted_sum " + tag,
            [&](const std::vector<Var>& v) {
                return weighted_readout(block_weighted_sum(v[0], v[1], m),
                                        mix_seed(seed, 19, t));
            },
            {rand_tensor({2 * m, n}, t * 100 + 29), rand_tensor({2 * m}, t * 100 + 30)});

        run("softmax vec + cross_entropy " + tag,
            [&](const std::vector<Var>& v) { return cross_entropy(softmax(v[0], 0), 1); },
            {rand_tensor({4}, t * 100 + 31)});
    }
    return results;
}

// Gradient of the full composed forward + cross-entropy loss with respect to
// every parameter tensor and the trajectory inputs.
inline GradCheckResult gradcheck_forward(uint64_t seed, int communities = 3, int timesteps = 4,
                                         int d = 8, int heads = 2, int layers = 1) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.heads = heads;
    cfg.layers = layers;
    cfg.dropout = 0.0;  // kinks off for finite differences
    cfg.num_classes = 2;
    ModelParams params = ModelParams::init(cfg, mix_seed(seed, 0xf0ULL));

    const int L = num_paths(communities);
    Rng rng(mix_seed(seed, 0x70ULL));
    std::vector<std::vector<double>> trajectories(static_cast<std::size_t>(L));
    for (auto& traj : trajectories) {
        traj.resize(static_cast<std::size_t>(timesteps));
        for (auto& w : traj) w = rng.uniform(-1.0, 1.0);
    }

    // flatten parameters + trajectory input into the generic checker
    std::vector<Tensor> inputs;
    params.visit([&](const std::string&, const Tensor& t) { inputs.push_back(t); });
    std::vector<double> flat;
    for (const auto& traj : trajectories) flat.insert(flat.end(), traj.begin(), traj.end());
    inputs.push_back(Tensor({L * timesteps}, flat));

    ScalarFn fn = [&](const std::vector<Var>& v) -> Var {
        const std::vector<Var> leaves(v.begin(), v.end() - 1);
        ParamVars bound = ParamVars::from_vars(cfg, leaves);
        Var x = embed_paths(v.back().value().vec(), timesteps, bound);
        Var enc = x;
        for (const auto& lv : bound.encoder) enc = encoder_layer(enc, lv, cfg, timesteps);
        Var h = temporal_pool(enc, bound, timesteps).pooled;
        Var fused = cross_path_fuse(h, bound);
        Var z = attention_pool(fused, bound).pooled;
        Var probs = classify(z, bound);
        return cross_entropy(probs, 1);
    };
    return check_gradients("forward N=" + std::to_string(communities) +
                               " T=" + std::to_string(timesteps) + " d=" + std::to_string(d) +
                               " heads=" + std::to_string(heads) +
                               " layers=" + std::to_string(layers),
                           fn, inputs);
}

struct GradCheckReport {
    std::vector<GradCheckResult> results;
    double max_rel_err = 0.0;
    bool pass = true;
    double seconds = 0.0;
};

inline GradCheckReport run_gradcheck(uint64_t seed, int trials = 10) {
    const auto start = std::chrono::steady_clock::now();
    GradCheckReport report;
    report.results = gradcheck_op_suite(seed, trials);
    report.results.push_back(gradcheck_forward(seed));
    for (const auto& r : report.results) {
        report.max_rel_err = std::max(report.max_rel_err, r.max_rel_err);
        report.pass = report.pass && r.pass;
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace pathnet
