#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/io.hpp"
#include "pathnet/tensor.hpp"

namespace pathnet {

// Cosine similarity of subject representations. Diagonal is exactly 1;
// zero-norm vectors score 0 against everything else.
inline Tensor cosine_similarity_matrix(const std::vector<std::vector<double>>& reps) {
    const int n = static_cast<int>(reps.size());
    if (n == 0) throw ContractError("cosine_similarity_matrix: no representations");
    std::vector<double> norms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : reps[static_cast<std::size_t>(i)]) s += v * v;
        norms[static_cast<std::size_t>(i)] = std::sqrt(s);
    }
    Tensor sim({n, n});
    for (int i = 0; i < n; ++i) {
        sim(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < reps[static_cast<std::size_t>(i)].size(); ++k)
                dot += reps[static_cast<std::size_t>(i)][k] * reps[static_cast<std::size_t>(j)][k];
            const double denom = norms[static_cast<std::size_t>(i)] *
                                 norms[static_cast<std::size_t>(j)];
            const double c = denom > 0.0 ? dot / denom : 0.0;
            sim(i, j) = c;
            sim(j, i) = c;
        }
    }
    return sim;
}

// Order for the report: by class, then subject id.
inline std::vector<std::size_t> class_sorted_order(const std::vector<std::string>& ids,
                                                   const std::vector<int>& labels) {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (labels[a] != labels[b]) return labels[a] < labels[b];
        return ids[a] < ids[b];
    });
    return order;
}

// CSV: header 'subject_id,label,<id...>', one row per subject.
inline void write_similarity_csv(const std::filesystem::path& path,
                                 const std::vector<std::string>& ids,
                                 const std::vector<int>& labels, const Tensor& sim) {
    const int n = sim.rows();
    std::string out = "subject_id,label";
    for (int j = 0; j < n; ++j) out += "," + ids[static_cast<std::size_t>(j)];
    out += "\n";
    for (int i = 0; i < n; ++i) {
        out += ids[static_cast<std::size_t>(i)] + "," +
               std::to_string(labels[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            out += ',';
            out += format_double(sim(i, j));
        }
        out += "\n";
    }
    write_text_file(path, out);
}

struct SimilaritySummary {
    double within_class = 0.0;
    double between_class = 0.0;
};

inline SimilaritySummary similarity_summary(const Tensor& sim, const std::vector<int>& labels) {
    double win = 0.0, btw = 0.0;
    long long nw = 0, nb = 0;
    const int n = sim.rows();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
                win += sim(i, j);
                ++nw;
            } else {
                btw += sim(i, j);
                ++nb;
            }
        }
    }
    return {nw ? win / static_cast<double>(nw) : 0.0, nb ? btw / static_cast<double>(nb) : 0.0};
}

}  // namespace pathnet
