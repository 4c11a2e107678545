#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pathnet/autodiff.hpp"
#include "pathnet/common.hpp"
#include "pathnet/dfc.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/model.hpp"
#include "pathnet/parallel.hpp"
#include "pathnet/rng.hpp"

namespace pathnet {

enum class OptimizerKind { Sgd, SgdMomentum, Adaptive };

inline std::string optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::Sgd: return "sgd";
        case OptimizerKind::SgdMomentum: return "sgd_momentum";
        case OptimizerKind::Adaptive: return "adaptive";
    }
    return "?";
}

inline OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "sgd_momentum") return OptimizerKind::SgdMomentum;
    if (name == "adaptive") return OptimizerKind::Adaptive;
    throw ConfigError("unknown optimizer '" + name + "' (sgd | sgd_momentum | adaptive)");
}

struct TrainConfig {
    double learning_rate = 0.1;
    int batch_size = 32;
    int epochs = 100;
    OptimizerKind optimizer = OptimizerKind::SgdMomentum;
    double momentum = 0.9;
    uint64_t seed = 42;
    int folds = 5;
    int patience = 10;          // early-stop patience in epochs; 0 disables
    double val_fraction = 0.1;  // training-split holdout used for early stopping
    bool class_weights = false;
    int jobs = 0;               // worker cap; 0 = hardware concurrency

    void validate() const {
        if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
        if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (folds < 2) throw ConfigError("train: folds must be >= 2");
        if (patience < 0) throw ConfigError("train: patience must be >= 0");
        if (val_fraction < 0.0 || val_fraction > 0.5) {
            throw ConfigError("train: val_fraction must be in [0, 0.5]");
        }
        if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("train: momentum in [0,1)");
    }
};

// -log(probs[label]) with a 1e-12 floor inside the log.
inline Var cross_entropy(const Var& probs, int label) {
    const int classes = static_cast<int>(probs.value().numel());
    if (label < 0 || label >= classes) {
        throw ContractError("cross_entropy: label " + std::to_string(label) +
                            " out of range for " + std::to_string(classes) + " classes");
    }
    return scale(log_floor(pick(probs, static_cast<std::size_t>(label)), 1e-12), -1.0);
}

// ---------------------------------------------------------------------------
// stratified k-fold

struct FoldSplit {
    std::vector<std::vector<int>> train;
    std::vector<std::vector<int>> test;
    int folds() const { return static_cast<int>(test.size()); }
};

inline FoldSplit stratified_kfold(const std::vector<int>& labels, int folds, uint64_t seed) {
    if (folds < 2) throw ConfigError("stratified_kfold: folds must be >= 2");
    int num_classes = 0;
    for (int l : labels) num_classes = std::max(num_classes, l + 1);
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));

    FoldSplit split;
    split.train.assign(static_cast<std::size_t>(folds), {});
    split.test.assign(static_cast<std::size_t>(folds), {});
    for (int c = 0; c < num_classes; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (static_cast<int>(members.size()) < folds) {
            throw ConfigError("stratified_kfold: class " + std::to_string(c) + " has " +
                              std::to_string(members.size()) + " subjects, fewer than " +
                              std::to_string(folds) + " folds");
        }
        Rng rng(mix_seed(seed, 0xf01dULL, static_cast<uint64_t>(c)));
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(members[i - 1], members[j]);
        }
        for (std::size_t k = 0; k < members.size(); ++k)
            split.test[k % static_cast<std::size_t>(folds)].push_back(members[k]);
    }
    for (int f = 0; f < folds; ++f) {
        auto& test = split.test[static_cast<std::size_t>(f)];
        std::sort(test.begin(), test.end());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!std::binary_search(test.begin(), test.end(), static_cast<int>(i)))
                split.train[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));
        }
    }
    return split;
}

// ---------------------------------------------------------------------------
// dataset checks

inline int dataset_num_classes(const std::vector<SubjectPaths>& data) {
    int c = 0;
    for (const auto& s : data) c = std::max(c, s.label + 1);
    return c;
}

// Training requires uniform T and a consistent community count across the run.
inline void validate_training_dataset(const std::vector<SubjectPaths>& data) {
    if (data.empty()) throw DataError("empty dataset");
    const int T = data[0].T();
    const int N = data[0].num_communities;
    for (const auto& s : data) {
        if (s.T() != T) {
            throw DataError("mixed trajectory lengths: subject " + s.subject_id + " has T=" +
                            std::to_string(s.T()) + ", expected T=" + std::to_string(T) +
                            " (subject " + data[0].subject_id + ")");
        }
        if (s.num_communities != N) {
            throw DataError("mixed community counts: subject " + s.subject_id);
        }
        if (s.label < 0) throw DataError("negative label: subject " + s.subject_id);
    }
    const int classes = dataset_num_classes(data);
    std::vector<int> counts(static_cast<std::size_t>(classes), 0);
    for (const auto& s : data) ++counts[static_cast<std::size_t>(s.label)];
    for (int c = 0; c < classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw DataError("no subjects with label " + std::to_string(c) +
                            " but higher labels exist");
        }
    }
}

// ---------------------------------------------------------------------------
// optimizers

class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, double momentum)
        : kind_(kind), lr_(lr), momentum_(momentum) {}

    void step(std::vector<Tensor*> params, const std::vector<Tensor>& grads) {
        if (params.size() != grads.size()) throw ContractError("optimizer: size mismatch");
        if (state_.empty() && kind_ != OptimizerKind::Sgd) {
            state_.resize(params.size());
            state2_.resize(params.size());
            for (std::size_t k = 0; k < params.size(); ++k) {
                state_[k] = Tensor::zeros(params[k]->shape());
                state2_[k] = Tensor::zeros(params[k]->shape());
            }
        }
        ++t_;
        for (std::size_t k = 0; k < params.size(); ++k) {
            Tensor& p = *params[k];
            const Tensor& g = grads[k];
            switch (kind_) {
                case OptimizerKind::Sgd:
                    for (std::size_t i = 0; i < p.numel(); ++i) p[i] -= lr_ * g[i];
                    break;
                case OptimizerKind::SgdMomentum: {
                    Tensor& v = state_[k];
                    for (std::size_t i = 0; i < p.numel(); ++i) {
                        v[i] = momentum_ * v[i] + g[i];
                        p[i] -= lr_ * v[i];
                    }
                    break;
                }
                case OptimizerKind::Adaptive: {
                    // Adam with beta1=0.9, beta2=0.999, eps=1e-8
                    Tensor& m = state_[k];
                    Tensor& v = state2_[k];
                    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
                    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
                    for (std::size_t i = 0; i < p.numel(); ++i) {
                        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                        p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
                    }
                    break;
                }
            }
        }
    }

private:
    OptimizerKind kind_;
    double lr_;
    double momentum_;
    long long t_ = 0;
    std::vector<Tensor> state_;
    std::vector<Tensor> state2_;
};

// ---------------------------------------------------------------------------
// training loop

struct TrainOutcome {
    ModelParams params;
    std::vector<double> loss_curve;  // mean training CE per epoch
    std::vector<double> val_curve;   // validation CE per epoch (empty if no holdout)
    int epochs_run = 0;
};

namespace detail {

struct SubjectGrad {
    double loss = 0.0;
    std::vector<Tensor> grads;
};

// Mean loss and averaged gradients over one batch. Each subject builds an
// independent graph; reduction is in subject order, so results are
// schedule-independent.
inline std::pair<double, std::vector<Tensor>> batch_gradients(
    const ModelParams& params, const std::vector<SubjectPaths>& data,
    const std::vector<int>& batch, const std::vector<double>& class_weight, uint64_t drop_seed,
    int jobs) {
    std::vector<SubjectGrad> slots(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t k) {
        const SubjectPaths& subject = data[static_cast<std::size_t>(batch[k])];
        ParamVars pv(params, /*requires_grad=*/true);
        DropoutState drop;
        drop.seed = mix_seed(drop_seed, static_cast<uint64_t>(batch[k]));
        drop.active = true;
        ForwardResult res = forward_subject(subject.trajectory_matrix(), pv, &drop);
        Var loss = cross_entropy(res.probs, subject.label);
        if (!class_weight.empty()) {
            loss = scale(loss, class_weight[static_cast<std::size_t>(subject.label)]);
        }
        backward(loss);
        slots[k].loss = loss.value()[0];
        slots[k].grads = pv.grads();
    });
    const double inv = 1.0 / static_cast<double>(batch.size());
    double mean_loss = 0.0;
    std::vector<Tensor> total = std::move(slots[0].grads);
    mean_loss += slots[0].loss;
    for (std::size_t k = 1; k < slots.size(); ++k) {
        mean_loss += slots[k].loss;
        for (std::size_t g = 0; g < total.size(); ++g) {
            double* acc = total[g].data();
            const double* src = slots[k].grads[g].data();
            for (std::size_t i = 0; i < total[g].numel(); ++i) acc[i] += src[i];
        }
    }
    for (auto& g : total)
        for (auto& v : g.vec()) v *= inv;
    return {mean_loss * inv, std::move(total)};
}

inline double mean_eval_loss(const ModelParams& params, const std::vector<SubjectPaths>& data,
                             const std::vector<int>& indices, int jobs) {
    std::vector<double> losses(indices.size());
    parallel_for(indices.size(), jobs, [&](std::size_t k) {
        const SubjectPaths& subject = data[static_cast<std::size_t>(indices[k])];
        ParamVars pv(params, /*requires_grad=*/false);
        ForwardResult res = forward_subject(subject.trajectory_matrix(), pv, nullptr);
        losses[k] = cross_entropy(res.probs, subject.label).value()[0];
    });
    double s = 0.0;
    for (double l : losses) s += l;
    return s / static_cast<double>(losses.size());
}

}  // namespace detail

// Trains on data[train_indices]. `stream` separates RNG streams of different
// folds / the final full-data model.
inline TrainOutcome train_model(const std::vector<SubjectPaths>& data,
                                std::vector<int> train_indices, const ModelConfig& mcfg,
                                const TrainConfig& tcfg, uint64_t stream = 0) {
    mcfg.validate();
    tcfg.validate();
    if (train_indices.empty()) throw ContractError("train_model: empty training set");

    // optional early-stopping holdout, stratified per class
    std::vector<int> fit_indices, val_indices;
    if (tcfg.patience > 0 && tcfg.val_fraction > 0.0) {
        int num_classes = 0;
        for (int i : train_indices) num_classes = std::max(num_classes, data[i].label + 1);
        std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
        for (int i : train_indices) by_class[static_cast<std::size_t>(data[i].label)].push_back(i);
        for (int c = 0; c < num_classes; ++c) {
            auto& members = by_class[static_cast<std::size_t>(c)];
            Rng rng(mix_seed(tcfg.seed, 0x7a1ULL, stream, static_cast<uint64_t>(c)));
            for (std::size_t i = members.size(); i > 1; --i) {
                const std::size_t j = rng.below(i);
                std::swap(members[i - 1], members[j]);
            }
            std::size_t nval = static_cast<std::size_t>(
                std::floor(tcfg.val_fraction * static_cast<double>(members.size())));
            for (std::size_t k = 0; k < members.size(); ++k) {
                (k < nval ? val_indices : fit_indices).push_back(members[k]);
            }
        }
        std::sort(fit_indices.begin(), fit_indices.end());
        std::sort(val_indices.begin(), val_indices.end());
    }
    const bool early_stop = !val_indices.empty();
    if (!early_stop) fit_indices = std::move(train_indices);

    std::vector<double> class_weight;
    if (tcfg.class_weights) {
        int num_classes = mcfg.num_classes;
        std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
        for (int i : fit_indices) counts[static_cast<std::size_t>(data[i].label)] += 1.0;
        class_weight.resize(static_cast<std::size_t>(num_classes));
        for (int c = 0; c < num_classes; ++c) {
            const double n = counts[static_cast<std::size_t>(c)];
            class_weight[static_cast<std::size_t>(c)] =
                n > 0.0 ? static_cast<double>(fit_indices.size()) / (num_classes * n) : 0.0;
        }
    }

    TrainOutcome out;
    out.params = ModelParams::init(mcfg, mix_seed(tcfg.seed, 0x1217ULL, stream));
    Optimizer opt(tcfg.optimizer, tcfg.learning_rate, tcfg.momentum);

    ModelParams best = out.params;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    std::vector<int> order = fit_indices;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(tcfg.seed, 0x5a0ULL, stream, static_cast<uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        int step = 0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size, ++step) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            std::vector<int> batch(order.begin() + start, order.begin() + end);
            const uint64_t drop_seed = mix_seed(tcfg.seed, stream, static_cast<uint64_t>(epoch),
                                                static_cast<uint64_t>(step));
            auto [loss, grads] =
                detail::batch_gradients(out.params, data, batch, class_weight, drop_seed,
                                        tcfg.jobs);
            if (!std::isfinite(loss)) {
                throw NumericError("NaN loss at epoch " + std::to_string(epoch) + " step " +
                                   std::to_string(step) +
                                   "; try a smaller learning rate or plain sgd");
            }
            opt.step(out.params.tensors(), grads);
            epoch_loss += loss * static_cast<double>(batch.size());
            seen += batch.size();
        }
        out.loss_curve.push_back(epoch_loss / static_cast<double>(seen));
        out.epochs_run = epoch + 1;

        if (early_stop) {
            const double val_loss =
                detail::mean_eval_loss(out.params, data, val_indices, tcfg.jobs);
            if (!std::isfinite(val_loss)) {
                throw NumericError("NaN validation loss at epoch " + std::to_string(epoch));
            }
            out.val_curve.push_back(val_loss);
            if (val_loss < best_val) {
                best_val = val_loss;
                best = out.params;
                since_best = 0;
            } else {
                ++since_best;
                if (since_best >= tcfg.patience) break;
            }
        }
    }
    if (early_stop) out.params = best;
    return out;
}

struct EvalOutcome {
    MetricsRow metrics;
    std::vector<std::string> subject_ids;
    std::vector<int> labels;
    std::vector<std::vector<double>> probs;   // [n x C]
    std::vector<std::vector<double>> pooled;  // [n x d] subject representations
};

inline EvalOutcome eval_model(const ModelParams& params, const std::vector<SubjectPaths>& data,
                              const std::vector<int>& indices, int jobs = 0) {
    if (indices.empty()) throw ContractError("eval_model: empty index set");
    EvalOutcome out;
    out.subject_ids.resize(indices.size());
    out.labels.resize(indices.size());
    out.probs.resize(indices.size());
    out.pooled.resize(indices.size());
    parallel_for(indices.size(), jobs, [&](std::size_t k) {
        const SubjectPaths& subject = data[static_cast<std::size_t>(indices[k])];
        ParamVars pv(params, /*requires_grad=*/false);
        ForwardResult res = forward_subject(subject.trajectory_matrix(), pv, nullptr);
        out.subject_ids[k] = subject.subject_id;
        out.labels[k] = subject.label;
        out.probs[k] = res.probs.value().vec();
        out.pooled[k] = res.pooled.value().vec();
    });
    out.metrics = evaluate_metrics(out.probs, out.labels, params.cfg.num_classes);
    return out;
}

struct CvResult {
    std::vector<MetricsRow> per_fold;
    MetricsRow mean;
    MetricsRow stdev;  // sample standard deviation across folds
    std::vector<int> epochs_run;
};

inline CvResult run_cv(const std::vector<SubjectPaths>& data, const ModelConfig& mcfg,
                       const TrainConfig& tcfg) {
    validate_training_dataset(data);
    std::vector<int> labels;
    labels.reserve(data.size());
    for (const auto& s : data) labels.push_back(s.label);
    const FoldSplit split = stratified_kfold(labels, tcfg.folds, tcfg.seed);

    CvResult cv;
    for (int f = 0; f < tcfg.folds; ++f) {
        TrainOutcome fold = train_model(data, split.train[static_cast<std::size_t>(f)], mcfg,
                                        tcfg, static_cast<uint64_t>(f));
        EvalOutcome eval =
            eval_model(fold.params, data, split.test[static_cast<std::size_t>(f)], tcfg.jobs);
        cv.per_fold.push_back(eval.metrics);
        cv.epochs_run.push_back(fold.epochs_run);
    }
    auto fold_mean = [&](auto select) {
        double s = 0.0;
        for (const auto& r : cv.per_fold) s += select(r);
        return s / static_cast<double>(cv.per_fold.size());
    };
    auto fold_std = [&](auto select, double mean) {
        if (cv.per_fold.size() < 2) return 0.0;
        double s = 0.0;
        for (const auto& r : cv.per_fold) s += (select(r) - mean) * (select(r) - mean);
        return std::sqrt(s / static_cast<double>(cv.per_fold.size() - 1));
    };
    auto acc = [](const MetricsRow& r) { return r.acc; };
    auto auc = [](const MetricsRow& r) { return r.auc; };
    auto f1 = [](const MetricsRow& r) { return r.f1; };
    auto sen = [](const MetricsRow& r) { return r.sen; };
    auto spe = [](const MetricsRow& r) { return r.spe; };
    cv.mean = {fold_mean(acc), fold_mean(auc), fold_mean(f1), fold_mean(sen), fold_mean(spe)};
    cv.stdev = {fold_std(acc, cv.mean.acc), fold_std(auc, cv.mean.auc), fold_std(f1, cv.mean.f1),
                fold_std(sen, cv.mean.sen), fold_std(spe, cv.mean.spe)};
    return cv;
}

}  // namespace pathnet
