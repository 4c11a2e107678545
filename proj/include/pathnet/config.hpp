#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathnet/common.hpp"
#include "pathnet/dfc.hpp"
#include "pathnet/io.hpp"
#include "pathnet/model.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/synthgen.hpp"
#include "pathnet/training.hpp"

namespace pathnet {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                                const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(context + ": unknown key '" + key + "'");
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// model / window / train config <-> JSON

inline ModelConfig model_config_from_json(const json& j) {
    detail::reject_unknown_keys(
        j,
        {"d", "heads", "layers", "dropout", "num_classes", "use_ffn", "fusion_layers",
         "use_path_modeling", "use_global_fusion", "use_multihead", "use_temporal_pool"},
        "model config");
    ModelConfig m;
    m.d = j.value("d", m.d);
    m.heads = j.value("heads", m.heads);
    m.layers = j.value("layers", m.layers);
    m.dropout = j.value("dropout", m.dropout);
    m.num_classes = j.value("num_classes", 0);  // 0 = derive from data labels
    m.use_ffn = j.value("use_ffn", m.use_ffn);
    m.fusion_layers = j.value("fusion_layers", m.fusion_layers);
    m.use_path_modeling = j.value("use_path_modeling", m.use_path_modeling);
    m.use_global_fusion = j.value("use_global_fusion", m.use_global_fusion);
    m.use_multihead = j.value("use_multihead", m.use_multihead);
    m.use_temporal_pool = j.value("use_temporal_pool", m.use_temporal_pool);
    return m;
}

inline json model_config_to_json(const ModelConfig& m) {
    return json{{"d", m.d},
                {"heads", m.heads},
                {"layers", m.layers},
                {"dropout", m.dropout},
                {"num_classes", m.num_classes},
                {"use_ffn", m.use_ffn},
                {"fusion_layers", m.fusion_layers},
                {"use_path_modeling", m.use_path_modeling},
                {"use_global_fusion", m.use_global_fusion},
                {"use_multihead", m.use_multihead},
                {"use_temporal_pool", m.use_temporal_pool}};
}

inline WindowSpec window_spec_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"length", "stride"}, "window config");
    WindowSpec w;
    w.window_length = j.value("length", w.window_length);
    w.stride = j.value("stride", w.stride);
    return w;
}

inline json window_spec_to_json(const WindowSpec& w) {
    return json{{"length", w.window_length}, {"stride", w.stride}};
}

inline TrainConfig train_config_from_json(const json& j) {
    detail::reject_unknown_keys(j,
                                {"learning_rate", "batch_size", "epochs", "optimizer", "momentum",
                                 "folds", "patience", "val_fraction", "class_weights", "jobs"},
                                "train config");
    TrainConfig t;
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.epochs = j.value("epochs", t.epochs);
    if (j.contains("optimizer")) t.optimizer = optimizer_from_name(j["optimizer"]);
    t.momentum = j.value("momentum", t.momentum);
    t.folds = j.value("folds", t.folds);
    t.patience = j.value("patience", t.patience);
    t.val_fraction = j.value("val_fraction", t.val_fraction);
    t.class_weights = j.value("class_weights", t.class_weights);
    t.jobs = j.value("jobs", t.jobs);
    return t;
}

inline json train_config_to_json(const TrainConfig& t) {
    return json{{"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"epochs", t.epochs},
                {"optimizer", optimizer_name(t.optimizer)},
                {"momentum", t.momentum},
                {"folds", t.folds},
                {"patience", t.patience},
                {"val_fraction", t.val_fraction},
                {"class_weights", t.class_weights},
                {"jobs", t.jobs}};
}

// ---------------------------------------------------------------------------
// run config: one file covering window, model, train, scheme, data, seed

struct RunConfig {
    uint64_t seed = 42;
    std::string scheme_path;
    std::string data_path;
    WindowSpec window;
    ModelConfig model;
    TrainConfig train;
    bool cv = true;  // run k-fold CV in addition to the final full-data model

    json to_json() const {
        return json{{"seed", seed},          {"scheme", scheme_path}, {"data", data_path},
                    {"window", window_spec_to_json(window)},
                    {"model", model_config_to_json(model)},
                    {"train", train_config_to_json(train)},
                    {"cv", cv}};
    }
};

inline RunConfig run_config_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"seed", "scheme", "data", "window", "model", "train", "cv"},
                                "run config");
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.scheme_path = j.value("scheme", c.scheme_path);
    c.data_path = j.value("data", c.data_path);
    if (j.contains("window")) c.window = window_spec_from_json(j["window"]);
    if (j.contains("model")) {
        c.model = model_config_from_json(j["model"]);
    } else {
        c.model.num_classes = 0;
    }
    if (j.contains("train")) c.train = train_config_from_json(j["train"]);
    c.cv = j.value("cv", c.cv);
    c.train.seed = c.seed;
    return c;
}

inline json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("invalid JSON in " + path.string());
    return j;
}

inline std::string config_hash(const json& resolved) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(resolved.dump())));
    return buf;
}

// Paths inside a config file resolve relative to the file's directory.
inline std::string resolve_path(const std::filesystem::path& base_dir, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return fp.string();
    return (base_dir / fp).lexically_normal().string();
}

// ---------------------------------------------------------------------------
// synth config

inline SynthConfig synth_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    detail::reject_unknown_keys(j,
                                {"name", "scheme", "subjects_per_class", "scan_length",
                                 "noise_std", "default_coupling", "seed", "profiles"},
                                "synth config");
    SynthConfig c;
    c.name = j.value("name", c.name);
    if (!j.contains("scheme")) throw ConfigError("synth config: 'scheme' is required");
    c.scheme = load_scheme(resolve_path(base_dir, j["scheme"].get<std::string>()));
    if (!j.contains("subjects_per_class")) {
        throw ConfigError("synth config: 'subjects_per_class' is required");
    }
    c.subjects_per_class = j["subjects_per_class"].get<std::vector<int>>();
    c.scan_length = j.value("scan_length", c.scan_length);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.default_coupling = j.value("default_coupling", c.default_coupling);
    c.seed = j.value("seed", c.seed);
    c.class_profiles.assign(static_cast<std::size_t>(c.num_classes()), {});
    if (j.contains("profiles")) {
        for (const auto& pj : j["profiles"]) {
            detail::reject_unknown_keys(pj, {"class", "pair", "steps"}, "synth profile");
            const int cls = pj.at("class").get<int>();
            if (cls < 0 || cls >= c.num_classes()) {
                throw ConfigError("synth config: profile class " + std::to_string(cls) +
                                  " out of range");
            }
            PairProfile prof;
            const auto pair = pj.at("pair").get<std::vector<int>>();
            if (pair.size() != 2) throw ConfigError("synth config: 'pair' must be [i,j]");
            prof.i = pair[0];
            prof.j = pair[1];
            for (const auto& sj : pj.at("steps")) {
                detail::reject_unknown_keys(sj, {"from", "g"}, "synth profile step");
                prof.steps.push_back({sj.at("from").get<double>(), sj.at("g").get<double>()});
            }
            c.class_profiles[static_cast<std::size_t>(cls)].push_back(std::move(prof));
        }
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// run manifest, written next to every command's outputs

inline void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                           const std::string& cfg_hash, uint64_t seed,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    json m{{"tool", "pathnet"},   {"version", kVersion}, {"command", command},
           {"config_hash", cfg_hash}, {"seed", seed},    {"inputs", inputs},
           {"outputs", outputs},  {"created_utc", stamp}};
    write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace pathnet
