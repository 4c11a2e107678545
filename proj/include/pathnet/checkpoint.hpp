#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>

#include "pathnet/config.hpp"
#include "pathnet/io.hpp"
#include "pathnet/model.hpp"

namespace pathnet {

// Checkpoint container: structured text, self-describing, bit-exact.
//
//   pathnet-checkpoint v1
//   config <model config as one JSON line>
//   tensor <name> <dim0> [dim1 ...]
//   <hex-encoded IEEE-754 bit patterns, space separated>
//   ...
//   end
//
// Values are the raw 64-bit patterns, so save/load round-trips exactly.

namespace detail {

inline std::string encode_u64_hex(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
    return buf;
}

inline double decode_u64_hex(const std::string& s, const std::string& ctx) {
    if (s.size() != 16) throw DataError(ctx + ": bad hex value '" + s + "'");
    uint64_t bits = 0;
    for (char c : s) {
        bits <<= 4;
        if (c >= '0' && c <= '9') bits |= static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') bits |= static_cast<uint64_t>(c - 'a' + 10);
        else throw DataError(ctx + ": bad hex value '" + s + "'");
    }
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    std::string out = "pathnet-checkpoint v1\n";
    out += "config " + model_config_to_json(params.cfg).dump() + "\n";
    params.visit([&](const std::string& name, const Tensor& t) {
        out += "tensor " + name;
        for (int d : t.shape()) out += " " + std::to_string(d);
        out += "\n";
        for (std::size_t i = 0; i < t.numel(); ++i) {
            if (i) out += ' ';
            out += detail::encode_u64_hex(t[i]);
        }
        out += "\n";
    });
    out += "end\n";
    write_text_file(path, out);
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
    const std::string ctx = "checkpoint " + path.string();
    const auto lines = read_lines(path);
    if (lines.size() < 3 || lines[0] != "pathnet-checkpoint v1") {
        throw DataError(ctx + ": not a pathnet-checkpoint v1 file");
    }
    if (lines[1].rfind("config ", 0) != 0) throw DataError(ctx + ": missing config line");
    json cfg_json = json::parse(lines[1].substr(7), nullptr, false);
    if (cfg_json.is_discarded()) throw DataError(ctx + ": bad config JSON");
    const ModelConfig cfg = model_config_from_json(cfg_json);
    cfg.validate();

    // materialize the parameter skeleton for this config, then fill by name
    ModelParams params = ModelParams::init(cfg, 0);
    std::size_t n = 2;
    params.visit([&](const std::string& name, Tensor& t) {
        if (n + 1 >= lines.size()) throw DataError(ctx + ": truncated at tensor " + name);
        std::istringstream head(lines[n++]);
        std::string tag, got_name;
        head >> tag >> got_name;
        if (tag != "tensor" || got_name != name) {
            throw DataError(ctx + ": expected tensor " + name + ", found '" + lines[n - 1] + "'");
        }
        std::vector<int> shape;
        int d;
        while (head >> d) shape.push_back(d);
        if (shape != t.shape()) {
            throw DataError(ctx + ": tensor " + name + " has shape " + Tensor::shape_str(shape) +
                            ", expected " + t.shape_str());
        }
        std::istringstream vals(lines[n++]);
        std::string hex;
        for (std::size_t i = 0; i < t.numel(); ++i) {
            if (!(vals >> hex)) throw DataError(ctx + ": tensor " + name + " has too few values");
            t[i] = detail::decode_u64_hex(hex, ctx);
        }
        if (vals >> hex) throw DataError(ctx + ": tensor " + name + " has too many values");
    });
    if (n >= lines.size() || lines[n] != "end") throw DataError(ctx + ": missing end marker");
    return params;
}

}  // namespace pathnet
