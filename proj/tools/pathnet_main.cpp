// pathnet: dynamic community-pair connectivity trajectories -> transformer
// classification. One binary, subcommands cover the whole pipeline:
//   synth | extract | train | eval | gradcheck | ablate | report

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathnet/checkpoint.hpp"
#include "pathnet/config.hpp"
#include "pathnet/dfc.hpp"
#include "pathnet/gradcheck.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/model.hpp"
#include "pathnet/partitions.hpp"
#include "pathnet/report.hpp"
#include "pathnet/synthgen.hpp"
#include "pathnet/timeseries.hpp"
#include "pathnet/training.hpp"

namespace fs = std::filesystem;
using namespace pathnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string metrics_line(const std::string& tag, const MetricsRow& m) {
    return tag + "," + format_double(m.acc) + "," + format_double(m.auc) + "," +
           format_double(m.f1) + "," + format_double(m.sen) + "," + format_double(m.spe) + "\n";
}

void print_resolved(const std::string& command, const json& resolved) {
    std::cout << command << " config (hash " << config_hash(resolved)
              << "): " << resolved.dump() << "\n";
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<uint64_t> seed;
};

int cmd_synth(const SynthArgs& args) {
    json cfg_json = parse_json_file(args.config_path);
    if (args.seed) cfg_json["seed"] = *args.seed;
    SynthConfig cfg = synth_config_from_json(cfg_json, fs::path(args.config_path).parent_path());
    print_resolved("synth", cfg_json);

    const auto subjects = generate_synthetic(cfg);
    fs::create_directories(args.out_dir);
    std::vector<std::string> outputs;
    std::string labels_csv = "subject_id,label\n";
    for (const auto& ts : subjects) {
        const std::string name = ts.subject_id + ".roi.csv";
        save_roi_series(fs::path(args.out_dir) / name, ts);
        outputs.push_back(name);
        labels_csv += ts.subject_id + "," + std::to_string(ts.label) + "\n";
    }
    write_text_file(fs::path(args.out_dir) / "labels.csv", labels_csv);
    outputs.push_back("labels.csv");
    write_manifest(args.out_dir, "synth", config_hash(cfg_json), cfg.seed, {args.config_path},
                   outputs);
    std::cout << "synth: wrote " << subjects.size() << " subjects to " << args.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
    std::string data_dir;
    std::string scheme_path;
    std::string out_dir;
    int window = 30;
    int stride = 15;
};

int cmd_extract(const ExtractArgs& args) {
    WindowSpec spec{args.window, args.stride};
    spec.validate();
    const PartitionScheme scheme = load_scheme(args.scheme_path);
    json resolved{{"data", args.data_dir},
                  {"scheme", args.scheme_path},
                  {"window", window_spec_to_json(spec)}};
    print_resolved("extract", resolved);

    const auto dataset = load_roi_dataset(args.data_dir);
    fs::create_directories(args.out_dir);
    std::vector<std::string> outputs;
    std::string report = "subject_id,label,T,num_paths,degenerate_pairs\n";
    for (const auto& ts : dataset) {
        ExtractionStats stats;
        SubjectPaths sp;
        sp.subject_id = ts.subject_id;
        sp.label = ts.label;
        sp.num_communities = scheme.num_communities;
        sp.paths = extract_paths(ts, scheme, spec, &stats);
        const std::string name = ts.subject_id + ".paths.csv";
        save_trajectories(fs::path(args.out_dir) / name, sp);
        outputs.push_back(name);
        report += ts.subject_id + "," + std::to_string(ts.label) + "," +
                  std::to_string(sp.T()) + "," + std::to_string(sp.paths.size()) + "," +
                  std::to_string(stats.degenerate_pairs) + "\n";
    }
    write_text_file(fs::path(args.out_dir) / "extraction_report.csv", report);
    outputs.push_back("extraction_report.csv");
    write_manifest(args.out_dir, "extract", config_hash(resolved), 0,
                   {args.data_dir, args.scheme_path}, outputs);
    std::cout << "extract: " << dataset.size() << " subjects, " << num_paths(scheme.num_communities)
              << " paths each, to " << args.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainCliOverrides {
    std::optional<uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> epochs;
    std::optional<int> folds;
    std::optional<int> batch_size;
    std::optional<double> learning_rate;
    std::optional<std::string> optimizer;
    std::optional<std::string> data_dir;
    std::optional<bool> cv;
};

RunConfig load_run_config(const std::string& config_path, const TrainCliOverrides& ov) {
    RunConfig cfg = run_config_from_json(parse_json_file(config_path));
    const fs::path base = fs::path(config_path).parent_path();
    cfg.scheme_path = resolve_path(base, cfg.scheme_path);
    cfg.data_path = resolve_path(base, cfg.data_path);
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.train.seed = *ov.seed;
    }
    if (ov.jobs) cfg.train.jobs = *ov.jobs;
    if (ov.epochs) cfg.train.epochs = *ov.epochs;
    if (ov.folds) cfg.train.folds = *ov.folds;
    if (ov.batch_size) cfg.train.batch_size = *ov.batch_size;
    if (ov.learning_rate) cfg.train.learning_rate = *ov.learning_rate;
    if (ov.optimizer) cfg.train.optimizer = optimizer_from_name(*ov.optimizer);
    if (ov.data_dir) cfg.data_path = *ov.data_dir;
    if (ov.cv) cfg.cv = *ov.cv;
    return cfg;
}

std::vector<SubjectPaths> load_training_data(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw ConfigError("no data directory (config 'data' or --data)");
    auto data = load_trajectory_dataset(cfg.data_path);
    validate_training_dataset(data);
    return data;
}

void resolve_num_classes(ModelConfig& mcfg, const std::vector<SubjectPaths>& data) {
    const int derived = dataset_num_classes(data);
    if (mcfg.num_classes == 0) {
        mcfg.num_classes = derived;
    } else if (mcfg.num_classes < derived) {
        throw DataError("data contains labels up to " + std::to_string(derived - 1) +
                        " but model.num_classes is " + std::to_string(mcfg.num_classes));
    }
    mcfg.validate();
}

json summary_metrics(const MetricsRow& m) {
    return json{{"ACC", m.acc}, {"AUC", m.auc}, {"F1", m.f1}, {"SEN", m.sen}, {"SPE", m.spe}};
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const TrainCliOverrides& ov) {
    RunConfig cfg = load_run_config(config_path, ov);
    auto data = load_training_data(cfg);
    resolve_num_classes(cfg.model, data);
    const json resolved = cfg.to_json();
    print_resolved("train", resolved);
    const std::string hash = config_hash(resolved);

    fs::create_directories(out_dir);
    std::vector<std::string> outputs;
    json summary{{"config_hash", hash},
                 {"seed", cfg.seed},
                 {"version", kVersion},
                 {"subjects", data.size()},
                 {"num_classes", cfg.model.num_classes}};

    if (cfg.cv) {
        const CvResult cv = run_cv(data, cfg.model, cfg.train);
        std::string table = "fold,ACC,AUC,F1,SEN,SPE\n";
        json folds_json = json::array();
        for (std::size_t f = 0; f < cv.per_fold.size(); ++f) {
            table += metrics_line(std::to_string(f), cv.per_fold[f]);
            folds_json.push_back(summary_metrics(cv.per_fold[f]));
        }
        table += metrics_line("mean", cv.mean);
        table += metrics_line("std", cv.stdev);
        write_text_file(fs::path(out_dir) / "cv_metrics.csv", table);
        outputs.push_back("cv_metrics.csv");
        summary["cv"] = {{"folds", folds_json},
                         {"mean", summary_metrics(cv.mean)},
                         {"std", summary_metrics(cv.stdev)},
                         {"epochs_run", cv.epochs_run}};
        std::cout << "cv: mean ACC " << cv.mean.acc << ", AUC " << cv.mean.auc << " over "
                  << cfg.train.folds << " folds\n";
    }

    // final model on the full dataset
    std::vector<int> all_indices(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) all_indices[i] = static_cast<int>(i);
    const TrainOutcome final_model = train_model(data, all_indices, cfg.model, cfg.train,
                                                 static_cast<uint64_t>(cfg.train.folds));
    save_checkpoint(fs::path(out_dir) / "checkpoint.ckpt", final_model.params);
    outputs.push_back("checkpoint.ckpt");

    std::string curve = final_model.val_curve.empty() ? "epoch,train_loss\n"
                                                      : "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < final_model.loss_curve.size(); ++e) {
        curve += std::to_string(e) + "," + format_double(final_model.loss_curve[e]);
        if (!final_model.val_curve.empty()) curve += "," + format_double(final_model.val_curve[e]);
        curve += "\n";
    }
    write_text_file(fs::path(out_dir) / "loss_curve.csv", curve);
    outputs.push_back("loss_curve.csv");

    const EvalOutcome train_eval =
        eval_model(final_model.params, data, all_indices, cfg.train.jobs);
    write_text_file(fs::path(out_dir) / "train_metrics.csv",
                    "split,ACC,AUC,F1,SEN,SPE\n" + metrics_line("train", train_eval.metrics));
    outputs.push_back("train_metrics.csv");
    summary["final"] = {{"epochs_run", final_model.epochs_run},
                        {"train_metrics", summary_metrics(train_eval.metrics)}};

    write_text_file(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
    outputs.push_back("summary.json");
    write_manifest(out_dir, "train", hash, cfg.seed, {config_path, cfg.data_path}, outputs);
    std::cout << "train: final model on " << data.size() << " subjects, train ACC "
              << train_eval.metrics.acc << ", outputs in " << out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_eval(const std::string& checkpoint_path, const std::string& data_dir,
             const std::string& out_dir, int jobs) {
    if (!fs::exists(checkpoint_path)) {
        throw DataError("checkpoint not found: " + checkpoint_path);
    }
    const ModelParams params = load_checkpoint(checkpoint_path);
    auto data = load_trajectory_dataset(data_dir);
    validate_training_dataset(data);
    if (dataset_num_classes(data) > params.cfg.num_classes) {
        throw DataError("data labels exceed the checkpoint's class count");
    }
    json resolved{{"checkpoint", checkpoint_path}, {"data", data_dir}};
    print_resolved("eval", resolved);

    std::vector<int> all_indices(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) all_indices[i] = static_cast<int>(i);
    const EvalOutcome eval = eval_model(params, data, all_indices, jobs);

    fs::create_directories(out_dir);
    write_text_file(fs::path(out_dir) / "eval_metrics.csv",
                    "split,ACC,AUC,F1,SEN,SPE\n" + metrics_line("eval", eval.metrics));
    std::string preds = "subject_id,label,predicted";
    for (int c = 0; c < params.cfg.num_classes; ++c) preds += ",p" + std::to_string(c);
    preds += "\n";
    for (std::size_t i = 0; i < eval.subject_ids.size(); ++i) {
        preds += eval.subject_ids[i] + "," + std::to_string(eval.labels[i]) + "," +
                 std::to_string(argmax_class(eval.probs[i]));
        for (double p : eval.probs[i]) preds += "," + format_double(p);
        preds += "\n";
    }
    write_text_file(fs::path(out_dir) / "predictions.csv", preds);
    write_manifest(out_dir, "eval", config_hash(resolved), 0, {checkpoint_path, data_dir},
                   {"eval_metrics.csv", "predictions.csv"});
    std::cout << "eval: ACC " << eval.metrics.acc << ", AUC " << eval.metrics.auc << " on "
              << data.size() << " subjects\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_gradcheck(uint64_t seed, int trials, const std::string& out_dir) {
    const GradCheckReport report = run_gradcheck(seed, trials);
    std::string table = "check,coords,max_rel_err,pass\n";
    for (const auto& r : report.results) {
        table += r.name + "," + std::to_string(r.coords) + "," + format_double(r.max_rel_err) +
                 "," + (r.pass ? "1" : "0") + "\n";
        if (!r.pass) {
            std::cout << "FAIL " << r.name << " max rel err " << r.max_rel_err << "\n";
        }
    }
    std::cout << "gradcheck: " << report.results.size() << " checks, max rel err "
              << report.max_rel_err << ", " << (report.pass ? "PASS" : "FAIL") << " ("
              << report.seconds << " s)\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(fs::path(out_dir) / "gradcheck_report.csv", table);
        json resolved{{"seed", seed}, {"trials", trials}};
        write_manifest(out_dir, "gradcheck", config_hash(resolved), seed, {},
                       {"gradcheck_report.csv"});
    }
    return report.pass ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------------------

int cmd_ablate(const std::string& config_path, const std::string& out_dir,
               const TrainCliOverrides& ov) {
    RunConfig cfg = load_run_config(config_path, ov);
    auto data = load_training_data(cfg);
    resolve_num_classes(cfg.model, data);
    const json resolved = cfg.to_json();
    print_resolved("ablate", resolved);

    struct Row {
        const char* name;
        bool ge, mha, tp;
    };
    // cumulative ladder: path modeling, +global fusion, +multi-head, +temporal pool
    const Row rows[] = {{"pm", false, false, false},
                        {"pm+ge", true, false, false},
                        {"pm+ge+mha", true, true, false},
                        {"pm+ge+mha+tp", true, true, true}};

    // switch-binding check: with fusion off, the fused output must equal its
    // input exactly
    {
        ModelConfig probe = cfg.model;
        probe.use_global_fusion = false;
        probe.use_multihead = false;
        probe.use_temporal_pool = false;
        ModelParams params = ModelParams::init(probe, cfg.seed);
        ParamVars pv(params, false);
        Var x = embed_paths(
            [&] {
                std::vector<double> flat;
                for (const auto& t : data[0].trajectory_matrix())
                    flat.insert(flat.end(), t.begin(), t.end());
                return flat;
            }(),
            data[0].T(), pv);
        for (const auto& lv : pv.encoder) x = encoder_layer(x, lv, probe, data[0].T());
        Var h = temporal_pool(x, pv, data[0].T()).pooled;
        Var fused = cross_path_fuse(h, pv);
        if (fused.node() != h.node()) {
            throw ContractError("ablate: fusion-off output is not its input");
        }
        std::cout << "ablate: fusion-off identity check OK\n";
    }

    std::string table = "config,PM,GE,MHA,TP,ACC,AUC,F1,SEN,SPE\n";
    for (const Row& row : rows) {
        ModelConfig mcfg = cfg.model;
        mcfg.use_path_modeling = true;
        mcfg.use_global_fusion = row.ge;
        mcfg.use_multihead = row.mha;
        mcfg.use_temporal_pool = row.tp;
        const CvResult cv = run_cv(data, mcfg, cfg.train);
        table += std::string(row.name) + ",1," + (row.ge ? "1" : "0") + "," +
                 (row.mha ? "1" : "0") + "," + (row.tp ? "1" : "0") + "," +
                 format_double(cv.mean.acc) + "," + format_double(cv.mean.auc) + "," +
                 format_double(cv.mean.f1) + "," + format_double(cv.mean.sen) + "," +
                 format_double(cv.mean.spe) + "\n";
        std::cout << "ablate " << row.name << ": ACC " << cv.mean.acc << ", AUC " << cv.mean.auc
                  << "\n";
    }
    fs::create_directories(out_dir);
    write_text_file(fs::path(out_dir) / "ablation.csv", table);
    write_manifest(out_dir, "ablate", config_hash(resolved), cfg.seed,
                   {config_path, cfg.data_path}, {"ablation.csv"});
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_report(const std::string& checkpoint_path, const std::string& data_dir,
               const std::string& out_dir, int jobs) {
    if (!fs::exists(checkpoint_path)) {
        throw DataError("checkpoint not found: " + checkpoint_path);
    }
    const ModelParams params = load_checkpoint(checkpoint_path);
    auto data = load_trajectory_dataset(data_dir);
    validate_training_dataset(data);
    json resolved{{"checkpoint", checkpoint_path}, {"data", data_dir}};
    print_resolved("report", resolved);

    std::vector<int> all_indices(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) all_indices[i] = static_cast<int>(i);
    const EvalOutcome eval = eval_model(params, data, all_indices, jobs);

    const auto order = class_sorted_order(eval.subject_ids, eval.labels);
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<std::vector<double>> reps;
    for (std::size_t k : order) {
        ids.push_back(eval.subject_ids[k]);
        labels.push_back(eval.labels[k]);
        reps.push_back(eval.pooled[k]);
    }
    const Tensor sim = cosine_similarity_matrix(reps);
    fs::create_directories(out_dir);
    write_similarity_csv(fs::path(out_dir) / "similarity.csv", ids, labels, sim);
    const SimilaritySummary s = similarity_summary(sim, labels);
    write_text_file(fs::path(out_dir) / "similarity_summary.csv",
                    "within_class,between_class\n" + format_double(s.within_class) + "," +
                        format_double(s.between_class) + "\n");
    write_manifest(out_dir, "report", config_hash(resolved), 0, {checkpoint_path, data_dir},
                   {"similarity.csv", "similarity_summary.csv"});
    std::cout << "report: " << ids.size() << " subjects, within-class sim " << s.within_class
              << ", between-class " << s.between_class << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathnet: community-pair connectivity trajectory classification"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic ROI dataset");
    synth->add_option("--config", synth_args.config_path, "synth config JSON")->required();
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    uint64_t synth_seed = 0;
    auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "override config seed");

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "extract path trajectories via sliding windows");
    extract->add_option("--data", extract_args.data_dir, "ROI time-series directory")->required();
    extract->add_option("--scheme", extract_args.scheme_path, "partition map file")->required();
    extract->add_option("--out", extract_args.out_dir, "output directory")->required();
    extract->add_option("--window", extract_args.window, "window length (samples)");
    extract->add_option("--stride", extract_args.stride, "window stride (samples)");

    std::string train_config, train_out;
    TrainCliOverrides train_ov;
    uint64_t ov_seed = 0;
    int ov_jobs = 0, ov_epochs = 0, ov_folds = 0, ov_batch = 0;
    double ov_lr = 0.0;
    std::string ov_opt, ov_data;
    bool ov_no_cv = false;
    auto add_train_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", train_config, "run config JSON")->required();
        cmd->add_option("--out", train_out, "output directory")->required();
        cmd->add_option("--seed", ov_seed, "override seed");
        cmd->add_option("--jobs", ov_jobs, "worker cap");
        cmd->add_option("--epochs", ov_epochs, "override epochs");
        cmd->add_option("--folds", ov_folds, "override folds");
        cmd->add_option("--batch-size", ov_batch, "override batch size");
        cmd->add_option("--lr", ov_lr, "override learning rate");
        cmd->add_option("--optimizer", ov_opt, "sgd | sgd_momentum | adaptive");
        cmd->add_option("--data", ov_data, "override data directory");
    };
    auto* train = app.add_subcommand("train", "k-fold CV plus a final full-data model");
    add_train_opts(train);
    train->add_flag("--no-cv", ov_no_cv, "skip cross-validation");

    std::string eval_ckpt, eval_data, eval_out;
    int eval_jobs = 0;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a trajectory dataset");
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--data", eval_data, "trajectory directory")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--jobs", eval_jobs, "worker cap");

    uint64_t gc_seed = 7;
    int gc_trials = 10;
    std::string gc_out;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gradcheck->add_option("--seed", gc_seed, "seed");
    gradcheck->add_option("--trials", gc_trials, "random instances per op");
    gradcheck->add_option("--out", gc_out, "optional report directory");

    std::string ablate_config, ablate_out;
    auto* ablate = app.add_subcommand("ablate", "cumulative module ablation table");
    ablate->add_option("--config", ablate_config, "run config JSON")->required();
    ablate->add_option("--out", ablate_out, "output directory")->required();
    uint64_t ab_seed = 0;
    int ab_jobs = 0, ab_epochs = 0, ab_folds = 0;
    auto* ab_seed_opt = ablate->add_option("--seed", ab_seed, "override seed");
    auto* ab_jobs_opt = ablate->add_option("--jobs", ab_jobs, "worker cap");
    auto* ab_epochs_opt = ablate->add_option("--epochs", ab_epochs, "override epochs");
    auto* ab_folds_opt = ablate->add_option("--folds", ab_folds, "override folds");
    std::string ab_data;
    auto* ab_data_opt = ablate->add_option("--data", ab_data, "override data directory");

    std::string report_ckpt, report_data, report_out;
    int report_jobs = 0;
    auto* report = app.add_subcommand("report", "representation similarity matrix CSV");
    report->add_option("--checkpoint", report_ckpt, "checkpoint file")->required();
    report->add_option("--data", report_data, "trajectory directory")->required();
    report->add_option("--out", report_out, "output directory")->required();
    report->add_option("--jobs", report_jobs, "worker cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*synth) {
            if (synth_seed_opt->count()) synth_args.seed = synth_seed;
            return cmd_synth(synth_args);
        }
        if (*extract) return cmd_extract(extract_args);
        if (*train) {
            if (train->count("--seed")) train_ov.seed = ov_seed;
            if (train->count("--jobs")) train_ov.jobs = ov_jobs;
            if (train->count("--epochs")) train_ov.epochs = ov_epochs;
            if (train->count("--folds")) train_ov.folds = ov_folds;
            if (train->count("--batch-size")) train_ov.batch_size = ov_batch;
            if (train->count("--lr")) train_ov.learning_rate = ov_lr;
            if (train->count("--optimizer")) train_ov.optimizer = ov_opt;
            if (train->count("--data")) train_ov.data_dir = ov_data;
            if (ov_no_cv) train_ov.cv = false;
            return cmd_train(train_config, train_out, train_ov);
        }
        if (*eval) return cmd_eval(eval_ckpt, eval_data, eval_out, eval_jobs);
        if (*gradcheck) return cmd_gradcheck(gc_seed, gc_trials, gc_out);
        if (*ablate) {
            TrainCliOverrides ov;
            if (ab_seed_opt->count()) ov.seed = ab_seed;
            if (ab_jobs_opt->count()) ov.jobs = ab_jobs;
            if (ab_epochs_opt->count()) ov.epochs = ab_epochs;
            if (ab_folds_opt->count()) ov.folds = ab_folds;
            if (ab_data_opt->count()) ov.data_dir = ab_data;
            return cmd_ablate(ablate_config, ablate_out, ov);
        }
        if (*report) return cmd_report(report_ckpt, report_data, report_out, report_jobs);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
