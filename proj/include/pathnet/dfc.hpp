#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/io.hpp"
#include "pathnet/partitions.hpp"
#include "pathnet/tensor.hpp"
#include "pathnet/timeseries.hpp"

namespace pathnet {

struct WindowSpec {
    int window_length = 30;
    int stride = 15;

    void validate() const {
        if (window_length < 2) throw ConfigError("window length must be >= 2");
        if (stride < 1) throw ConfigError("window stride must be >= 1");
    }
};

// T = floor((scan - window) / stride) + 1; trailing samples that do not fill
// a final window are dropped.
inline int window_count(int scan_length, const WindowSpec& spec) {
    spec.validate();
    if (scan_length < spec.window_length) {
        throw DataError("scan length " + std::to_string(scan_length) +
                        " shorter than window length " + std::to_string(spec.window_length));
    }
    return (scan_length - spec.window_length) / spec.stride + 1;
}

// Zero-variance windows make Pearson undefined; such pairs score 0 and are
// counted here so extraction reports can surface them.
struct ExtractionStats {
    long long degenerate_pairs = 0;
};

inline double pearson(const double* x, const double* y, int n, ExtractionStats* stats = nullptr) {
    if (n < 2) throw ContractError("pearson: need at least 2 samples");
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (stats) ++stats->degenerate_pairs;
        return 0.0;
    }
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y,
                      ExtractionStats* stats = nullptr) {
    if (x.size() != y.size()) throw ContractError("pearson: length mismatch");
    return pearson(x.data(), y.data(), static_cast<int>(x.size()), stats);
}

// Length-T trajectory of connectivity weights for one community pair, i < j.
struct PathTrajectory {
    int i = 0;
    int j = 0;
    std::vector<double> weights;
};

namespace detail {

// Full ROI-by-ROI correlation matrix for window t (standardize each row once,
// then dot products).
inline Tensor window_roi_correlation(const RoiTimeSeries& ts, const WindowSpec& spec, int t,
                                     ExtractionStats* stats) {
    const int rois = ts.num_rois();
    const int w = spec.window_length;
    const int start = t * spec.stride;
    Tensor z({rois, w});
    std::vector<bool> degenerate(static_cast<std::size_t>(rois), false);
    for (int r = 0; r < rois; ++r) {
        double mean = 0.0;
        for (int s = 0; s < w; ++s) mean += ts.values(r, start + s);
        mean /= w;
        double ss = 0.0;
        for (int s = 0; s < w; ++s) {
            const double d = ts.values(r, start + s) - mean;
            z(r, s) = d;
            ss += d * d;
        }
        if (ss == 0.0) {
            degenerate[static_cast<std::size_t>(r)] = true;
        } else {
            const double inv = 1.0 / std::sqrt(ss);
            for (int s = 0; s < w; ++s) z(r, s) *= inv;
        }
    }
    Tensor corr({rois, rois});
    for (int p = 0; p < rois; ++p) {
        corr(p, p) = degenerate[static_cast<std::size_t>(p)] ? 0.0 : 1.0;
        if (degenerate[static_cast<std::size_t>(p)] && stats) {
            // self-pair of a constant window is degenerate too
            ++stats->degenerate_pairs;
        }
        for (int q = p + 1; q < rois; ++q) {
            double r = 0.0;
            if (degenerate[static_cast<std::size_t>(p)] ||
                degenerate[static_cast<std::size_t>(q)]) {
                if (stats) ++stats->degenerate_pairs;
            } else {
                for (int s = 0; s < w; ++s) r += z(p, s) * z(q, s);
                if (r > 1.0) r = 1.0;
                if (r < -1.0) r = -1.0;
            }
            corr(p, q) = r;
            corr(q, p) = r;
        }
    }
    return corr;
}

}  // namespace detail

// Community-pair connectivity for window t:
//   W[i][j] = (1 / (|C_i||C_j|)) * sum_{p in C_i} sum_{q in C_j} r_{p,q}
// Symmetric; the diagonal is computed but excluded from path extraction.
inline Tensor window_connectivity(const RoiTimeSeries& ts, const PartitionScheme& scheme,
                                  const WindowSpec& spec, int t,
                                  ExtractionStats* stats = nullptr) {
    const int T = window_count(ts.scan_length(), spec);
    if (t < 0 || t >= T) {
        throw ContractError("window_connectivity: window " + std::to_string(t) +
                            " outside [0," + std::to_string(T) + ")");
    }
    if (ts.num_rois() != scheme.num_rois) {
        throw DataError("subject " + ts.subject_id + " has " + std::to_string(ts.num_rois()) +
                        " ROIs but scheme '" + scheme.name + "' expects " +
                        std::to_string(scheme.num_rois));
    }
    const Tensor corr = detail::window_roi_correlation(ts, spec, t, stats);
    const auto members = scheme.community_members();
    const int N = scheme.num_communities;
    Tensor w({N, N});
    for (int i = 0; i < N; ++i) {
        for (int j = i; j < N; ++j) {
            double sum = 0.0;
            for (int p : members[static_cast<std::size_t>(i)])
                for (int q : members[static_cast<std::size_t>(j)]) sum += corr(p, q);
            const double denom = static_cast<double>(members[static_cast<std::size_t>(i)].size()) *
                                 static_cast<double>(members[static_cast<std::size_t>(j)].size());
            w(i, j) = sum / denom;
            w(j, i) = w(i, j);
        }
    }
    return w;
}

// All binom(N,2) path trajectories, ordered by path_index.
inline std::vector<PathTrajectory> extract_paths(const RoiTimeSeries& ts,
                                                 const PartitionScheme& scheme,
                                                 const WindowSpec& spec,
                                                 ExtractionStats* stats = nullptr) {
    int T = 0;
    try {
        T = window_count(ts.scan_length(), spec);
    } catch (const DataError& e) {
        throw DataError(std::string("subject ") + ts.subject_id + ": " + e.what());
    }
    const int N = scheme.num_communities;
    std::vector<PathTrajectory> paths(static_cast<std::size_t>(num_paths(N)));
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            auto& p = paths[static_cast<std::size_t>(path_index(i, j, N))];
            p.i = i;
            p.j = j;
            p.weights.resize(static_cast<std::size_t>(T));
        }
    }
    for (int t = 0; t < T; ++t) {
        const Tensor w = window_connectivity(ts, scheme, spec, t, stats);
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                paths[static_cast<std::size_t>(path_index(i, j, N))]
                    .weights[static_cast<std::size_t>(t)] = w(i, j);
    }
    return paths;
}

// One subject's extracted paths; the unit consumed by training.
struct SubjectPaths {
    std::string subject_id;
    int label = 0;
    int num_communities = 0;
    std::vector<PathTrajectory> paths;

    int T() const { return paths.empty() ? 0 : static_cast<int>(paths[0].weights.size()); }

    std::vector<std::vector<double>> trajectory_matrix() const {
        std::vector<std::vector<double>> m;
        m.reserve(paths.size());
        for (const auto& p : paths) m.push_back(p.weights);
        return m;
    }
};

// Trajectory file: subject header, column header, then one row per path in
// path_index order.
//
//   subject_id,<id>,label,<class>,num_communities,<N>
//   i,j,w0,...,w{T-1}
//   <i>,<j>,<w...>
inline void save_trajectories(const std::filesystem::path& path, const SubjectPaths& sp) {
    std::string out = "subject_id," + sp.subject_id + ",label," + std::to_string(sp.label) +
                      ",num_communities," + std::to_string(sp.num_communities) + "\n";
    out += "i,j";
    for (int t = 0; t < sp.T(); ++t) out += ",w" + std::to_string(t);
    out += "\n";
    for (const auto& p : sp.paths) {
        out += std::to_string(p.i) + "," + std::to_string(p.j);
        for (double w : p.weights) {
            out += ',';
            out += format_double(w);
        }
        out += "\n";
    }
    write_text_file(path, out);
}

inline SubjectPaths load_trajectories(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    const std::string ctx = "trajectory file " + path.string();
    if (lines.size() < 3) throw DataError(ctx + ": truncated");
    const auto header = split_csv_line(lines[0]);
    if (header.size() != 6 || header[0] != "subject_id" || header[2] != "label" ||
        header[4] != "num_communities") {
        throw DataError(ctx + ": bad subject header");
    }
    SubjectPaths sp;
    sp.subject_id = header[1];
    sp.label = static_cast<int>(parse_long(header[3], ctx));
    sp.num_communities = static_cast<int>(parse_long(header[5], ctx));
    const int expected = num_paths(sp.num_communities);

    for (std::size_t n = 2; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto fields = split_csv_line(lines[n]);
        if (fields.size() < 3) throw DataError(ctx + ": malformed row " + std::to_string(n + 1));
        PathTrajectory p;
        p.i = static_cast<int>(parse_long(fields[0], ctx));
        p.j = static_cast<int>(parse_long(fields[1], ctx));
        for (std::size_t k = 2; k < fields.size(); ++k)
            p.weights.push_back(parse_double(fields[k], ctx));
        sp.paths.push_back(std::move(p));
    }
    if (static_cast<int>(sp.paths.size()) != expected) {
        throw DataError(ctx + ": " + std::to_string(sp.paths.size()) + " paths, expected " +
                        std::to_string(expected) + " for N=" +
                        std::to_string(sp.num_communities));
    }
    for (std::size_t k = 0; k < sp.paths.size(); ++k) {
        const auto& p = sp.paths[k];
        if (path_index(p.i, p.j, sp.num_communities) != static_cast<int>(k)) {
            throw DataError(ctx + ": paths out of path_index order at row " + std::to_string(k));
        }
        if (p.weights.size() != sp.paths[0].weights.size()) {
            throw DataError(ctx + ": ragged trajectory lengths");
        }
    }
    return sp;
}

inline std::vector<SubjectPaths> load_trajectory_dataset(const std::filesystem::path& dir) {
    std::vector<SubjectPaths> out;
    for (const auto& file : list_files(dir, ".paths.csv")) out.push_back(load_trajectories(file));
    if (out.empty()) throw DataError("no .paths.csv files in " + dir.string());
    return out;
}

}  // namespace pathnet
