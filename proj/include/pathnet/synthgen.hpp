#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/partitions.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/tensor.hpp"
#include "pathnet/timeseries.hpp"

namespace pathnet {

// Piecewise-constant target coupling: value g holds from `from_frac` of the
// scan until the next step.
struct CouplingStep {
    double from_frac = 0.0;
    double g = 0.0;
};

struct PairProfile {
    int i = 0;
    int j = 0;
    std::vector<CouplingStep> steps;
};

// Labeled synthetic ROI time series whose class signal lives in time-varying
// community-pair coupling. Construction: one unit-variance latent factor per
// community, factor innovations mixed per sample so that the factor
// correlation matrix matches the target; ROI p in community c is
// f_c + noise_std * eps_p. The expected cross-community ROI Pearson
// correlation then equals g exactly (attenuation cancels by construction).
struct SynthConfig {
    std::string name = "synth";
    PartitionScheme scheme;
    std::vector<int> subjects_per_class;
    int scan_length = 300;
    double noise_std = 0.3;
    double default_coupling = 0.0;
    std::vector<std::vector<PairProfile>> class_profiles;  // [class][...]
    uint64_t seed = 42;

    int num_classes() const { return static_cast<int>(subjects_per_class.size()); }

    void validate() const {
        scheme.validate();
        if (num_classes() < 2) throw ConfigError("synth: at least 2 classes required");
        for (std::size_t c = 0; c < subjects_per_class.size(); ++c) {
            if (subjects_per_class[c] < 1) {
                throw ConfigError("synth: class " + std::to_string(c) + " has no subjects");
            }
        }
        if (scan_length < 2) throw ConfigError("synth: scan_length must be >= 2");
        if (noise_std < 0.0) throw ConfigError("synth: noise_std must be >= 0");
        if (std::fabs(default_coupling) > 1.0) {
            throw ConfigError("synth: |default_coupling| > 1 is infeasible");
        }
        if (!class_profiles.empty() &&
            class_profiles.size() != subjects_per_class.size()) {
            throw ConfigError("synth: profiles must cover every class");
        }
        const int N = scheme.num_communities;
        for (std::size_t c = 0; c < class_profiles.size(); ++c) {
            for (const auto& p : class_profiles[c]) {
                if (p.i < 0 || p.j >= N || p.i >= p.j) {
                    throw ConfigError("synth: bad pair (" + std::to_string(p.i) + "," +
                                      std::to_string(p.j) + ") for N=" + std::to_string(N));
                }
                double prev = -1.0;
                for (const auto& s : p.steps) {
                    if (std::fabs(s.g) > 1.0) {
                        throw ConfigError("synth: coupling |g| > 1 for pair (" +
                                          std::to_string(p.i) + "," + std::to_string(p.j) +
                                          ") is infeasible");
                    }
                    if (s.from_frac < 0.0 || s.from_frac >= 1.0 || s.from_frac <= prev) {
                        throw ConfigError("synth: step fractions for pair (" +
                                          std::to_string(p.i) + "," + std::to_string(p.j) +
                                          ") must be ascending in [0,1)");
                    }
                    prev = s.from_frac;
                }
                if (p.steps.empty() || p.steps.front().from_frac != 0.0) {
                    throw ConfigError("synth: profile for pair (" + std::to_string(p.i) + "," +
                                      std::to_string(p.j) + ") must start at fraction 0");
                }
            }
        }
    }
};

namespace detail {

// Cholesky with a zero-pivot tolerance so exactly-singular targets (e.g. all
// couplings 1, one shared factor) still factor. Indefinite input fails.
inline std::vector<double> tolerant_cholesky(const std::vector<double>& r, int n,
                                             const std::string& context) {
    std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        double d = r[static_cast<std::size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) d -= l[static_cast<std::size_t>(j) * n + k] *
                                         l[static_cast<std::size_t>(j) * n + k];
        if (d < -1e-8) {
            throw ConfigError(context + ": coupling matrix is not positive semidefinite");
        }
        const double pivot = std::sqrt(std::max(d, 0.0));
        l[static_cast<std::size_t>(j) * n + j] = pivot;
        for (int i = j + 1; i < n; ++i) {
            double off = r[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k) off -= l[static_cast<std::size_t>(i) * n + k] *
                                               l[static_cast<std::size_t>(j) * n + k];
            if (pivot > 1e-12) {
                l[static_cast<std::size_t>(i) * n + j] = off / pivot;
            } else if (std::fabs(off) > 1e-8) {
                throw ConfigError(context + ": coupling matrix is not positive semidefinite");
            }
        }
    }
    return l;
}

}  // namespace detail

// Coupling g(i,j) for class c at scan sample u, resolved from profiles.
inline double coupling_at(const SynthConfig& cfg, int cls, int i, int j, int sample) {
    const double frac = static_cast<double>(sample) / static_cast<double>(cfg.scan_length);
    if (static_cast<std::size_t>(cls) < cfg.class_profiles.size()) {
        for (const auto& p : cfg.class_profiles[static_cast<std::size_t>(cls)]) {
            if (p.i == i && p.j == j) {
                double g = p.steps.front().g;
                for (const auto& s : p.steps) {
                    if (frac >= s.from_frac) g = s.g;
                }
                return g;
            }
        }
    }
    return cfg.default_coupling;
}

inline std::vector<RoiTimeSeries> generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const int N = cfg.scheme.num_communities;
    const int rois = cfg.scheme.num_rois;
    const int scan = cfg.scan_length;
    const double sigma = cfg.noise_std;
    const double inflate = 1.0 + sigma * sigma;

    // segment boundaries per class (sample indices where any pair's g changes)
    std::vector<std::vector<int>> class_bounds(static_cast<std::size_t>(cfg.num_classes()));
    for (int c = 0; c < cfg.num_classes(); ++c) {
        std::vector<int> bounds{0};
        if (static_cast<std::size_t>(c) < cfg.class_profiles.size()) {
            for (const auto& p : cfg.class_profiles[static_cast<std::size_t>(c)])
                for (const auto& s : p.steps)
                    bounds.push_back(static_cast<int>(s.from_frac * scan));
        }
        std::sort(bounds.begin(), bounds.end());
        bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
        class_bounds[static_cast<std::size_t>(c)] = std::move(bounds);
    }

    // per class, per segment: mixing matrix L with L L^T = factor correlation
    std::vector<std::vector<std::vector<double>>> mixers(
        static_cast<std::size_t>(cfg.num_classes()));
    for (int c = 0; c < cfg.num_classes(); ++c) {
        for (int b : class_bounds[static_cast<std::size_t>(c)]) {
            std::vector<double> r(static_cast<std::size_t>(N) * N, 0.0);
            for (int i = 0; i < N; ++i) r[static_cast<std::size_t>(i) * N + i] = 1.0;
            for (int i = 0; i < N; ++i) {
                for (int j = i + 1; j < N; ++j) {
                    const double g = coupling_at(cfg, c, i, j, b);
                    const double rho = g * inflate;
                    if (std::fabs(rho) > 1.0) {
                        throw ConfigError(
                            "synth: coupling infeasible for pair (" + std::to_string(i) + "," +
                            std::to_string(j) + "): |g*(1+noise_std^2)| = " +
                            std::to_string(std::fabs(rho)) + " > 1");
                    }
                    r[static_cast<std::size_t>(i) * N + j] = rho;
                    r[static_cast<std::size_t>(j) * N + i] = rho;
                }
            }
            mixers[static_cast<std::size_t>(c)].push_back(detail::tolerant_cholesky(
                r, N, "class " + std::to_string(c) + " segment at sample " + std::to_string(b)));
        }
    }

    std::vector<RoiTimeSeries> out;
    int width = 1;
    for (int n = *std::max_element(cfg.subjects_per_class.begin(),
                                   cfg.subjects_per_class.end());
         n >= 10; n /= 10)
        ++width;
    for (int c = 0; c < cfg.num_classes(); ++c) {
        const auto& bounds = class_bounds[static_cast<std::size_t>(c)];
        for (int s = 0; s < cfg.subjects_per_class[static_cast<std::size_t>(c)]; ++s) {
            Rng rng(mix_seed(cfg.seed, 0x5e7aULL, static_cast<uint64_t>(c),
                             static_cast<uint64_t>(s)));
            // latent community factors, sample-major
            Tensor factors({N, scan});
            std::vector<double> z(static_cast<std::size_t>(N));
            std::size_t seg = 0;
            for (int u = 0; u < scan; ++u) {
                while (seg + 1 < bounds.size() && u >= bounds[seg + 1]) ++seg;
                const auto& l = mixers[static_cast<std::size_t>(c)][seg];
                for (int i = 0; i < N; ++i) z[static_cast<std::size_t>(i)] = rng.normal();
                for (int i = 0; i < N; ++i) {
                    double f = 0.0;
                    for (int k = 0; k <= i; ++k)
                        f += l[static_cast<std::size_t>(i) * N + k] * z[static_cast<std::size_t>(k)];
                    factors(i, u) = f;
                }
            }
            RoiTimeSeries ts;
            std::string idx = std::to_string(s);
            while (static_cast<int>(idx.size()) < width) idx.insert(idx.begin(), '0');
            ts.subject_id = cfg.name + "-c" + std::to_string(c) + "-s" + idx;
            ts.label = c;
            ts.values = Tensor({rois, scan});
            for (int p = 0; p < rois; ++p) {
                const int community = cfg.scheme.assignment[static_cast<std::size_t>(p)];
                for (int u = 0; u < scan; ++u) {
                    ts.values(p, u) = factors(community, u) + sigma * rng.normal();
                }
            }
            out.push_back(std::move(ts));
        }
    }
    return out;
}

}  // namespace pathnet
