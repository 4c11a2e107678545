#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/io.hpp"

namespace pathnet {

// Static functional partition: every ROI belongs to exactly one community.
struct PartitionScheme {
    std::string name;
    int num_rois = 0;
    int num_communities = 0;
    std::vector<int> assignment;  // assignment[roi] = community in [0, N)

    void validate() const {
        if (num_communities < 2) {
            throw DataError("partition '" + name + "': at least 2 communities required, got " +
                            std::to_string(num_communities));
        }
        if (static_cast<int>(assignment.size()) != num_rois) {
            throw DataError("partition '" + name + "': " + std::to_string(assignment.size()) +
                            " assignments for " + std::to_string(num_rois) + " ROIs");
        }
        std::vector<int> sizes(static_cast<std::size_t>(num_communities), 0);
        for (int roi = 0; roi < num_rois; ++roi) {
            const int c = assignment[static_cast<std::size_t>(roi)];
            if (c < 0 || c >= num_communities) {
                throw DataError("partition '" + name + "': ROI " + std::to_string(roi) +
                                " assigned to community " + std::to_string(c) +
                                " outside [0," + std::to_string(num_communities) + ")");
            }
            ++sizes[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < num_communities; ++c) {
            if (sizes[static_cast<std::size_t>(c)] == 0) {
                throw DataError("partition '" + name + "': community " + std::to_string(c) +
                                " of declared " + std::to_string(num_communities) + " is empty");
            }
        }
    }

    std::vector<int> community_sizes() const {
        std::vector<int> sizes(static_cast<std::size_t>(num_communities), 0);
        for (int c : assignment) ++sizes[static_cast<std::size_t>(c)];
        return sizes;
    }

    std::vector<std::vector<int>> community_members() const {
        std::vector<std::vector<int>> members(static_cast<std::size_t>(num_communities));
        for (int roi = 0; roi < num_rois; ++roi)
            members[static_cast<std::size_t>(assignment[static_cast<std::size_t>(roi)])]
                .push_back(roi);
        return members;
    }
};

inline int num_paths(int communities) { return communities * (communities - 1) / 2; }

// Linear index of the unordered pair (i, j), i < j, in row-major upper
// triangle order; bijective onto [0, N(N-1)/2).
inline int path_index(int i, int j, int communities) {
    if (i < 0 || j >= communities || i >= j) {
        throw ContractError("path_index: need 0 <= i < j < N, got i=" + std::to_string(i) +
                            " j=" + std::to_string(j) + " N=" + std::to_string(communities));
    }
    return i * communities - i * (i + 1) / 2 + (j - i - 1);
}

inline std::pair<int, int> path_pair(int index, int communities) {
    if (index < 0 || index >= num_paths(communities)) {
        throw ContractError("path_pair: index " + std::to_string(index) + " out of range for N=" +
                            std::to_string(communities));
    }
    int i = 0;
    int row_len = communities - 1;
    while (index >= row_len) {
        index -= row_len;
        ++i;
        --row_len;
    }
    return {i, i + 1 + index};
}

// Partition map file: UTF-8 comma-delimited text.
//
//   name,<scheme name>
//   num_rois,<R>
//   num_communities,<N>
//   roi,community
//   <roi index>,<community index>     (R rows, any order, each ROI once)
//
// Community indices are 0-based only.
inline PartitionScheme load_scheme(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    const std::string ctx = "partition file " + path.string();
    std::size_t n = 0;
    auto next_line = [&]() -> const std::string& {
        while (n < lines.size() && lines[n].empty()) ++n;
        if (n >= lines.size()) throw DataError(ctx + ": truncated");
        return lines[n++];
    };
    auto header_value = [&](const char* key) -> std::string {
        const auto fields = split_csv_line(next_line());
        if (fields.size() != 2 || fields[0] != key) {
            throw DataError(ctx + ": expected '" + key + ",<value>' near line " +
                            std::to_string(n));
        }
        return fields[1];
    };

    PartitionScheme scheme;
    scheme.name = header_value("name");
    scheme.num_rois = static_cast<int>(parse_long(header_value("num_rois"), ctx));
    scheme.num_communities = static_cast<int>(parse_long(header_value("num_communities"), ctx));
    if (scheme.num_rois < 1) throw DataError(ctx + ": num_rois must be >= 1");
    const auto header = split_csv_line(next_line());
    if (header.size() != 2 || header[0] != "roi" || header[1] != "community") {
        throw DataError(ctx + ": expected column header 'roi,community'");
    }

    scheme.assignment.assign(static_cast<std::size_t>(scheme.num_rois), -1);
    for (int r = 0; r < scheme.num_rois; ++r) {
        const auto fields = split_csv_line(next_line());
        if (fields.size() != 2) throw DataError(ctx + ": malformed row near line " +
                                                std::to_string(n));
        const int roi = static_cast<int>(parse_long(fields[0], ctx));
        const int community = static_cast<int>(parse_long(fields[1], ctx));
        if (roi < 0 || roi >= scheme.num_rois) {
            throw DataError(ctx + ": ROI index " + std::to_string(roi) + " outside [0," +
                            std::to_string(scheme.num_rois) + ")");
        }
        if (scheme.assignment[static_cast<std::size_t>(roi)] != -1) {
            throw DataError(ctx + ": duplicate entry for ROI " + std::to_string(roi));
        }
        scheme.assignment[static_cast<std::size_t>(roi)] = community;
    }
    while (n < lines.size()) {
        if (!lines[n].empty()) throw DataError(ctx + ": unexpected trailing content at line " +
                                               std::to_string(n + 1));
        ++n;
    }
    scheme.validate();
    return scheme;
}

inline void save_scheme(const std::filesystem::path& path, const PartitionScheme& scheme) {
    std::string out = "name," + scheme.name + "\n";
    out += "num_rois," + std::to_string(scheme.num_rois) + "\n";
    out += "num_communities," + std::to_string(scheme.num_communities) + "\n";
    out += "roi,community\n";
    for (int roi = 0; roi < scheme.num_rois; ++roi) {
        out += std::to_string(roi) + "," +
               std::to_string(scheme.assignment[static_cast<std::size_t>(roi)]) + "\n";
    }
    write_text_file(path, out);
}

}  // namespace pathnet
