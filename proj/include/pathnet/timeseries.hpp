#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/io.hpp"
#include "pathnet/tensor.hpp"

namespace pathnet {

// Per-subject ROI signal matrix [num_rois x scan_length].
struct RoiTimeSeries {
    std::string subject_id;
    int label = 0;
    Tensor values;

    int num_rois() const { return values.rows(); }
    int scan_length() const { return values.cols(); }
};

// ROI time-series file: header row with the subject id and label, then one
// row of comma-delimited samples per ROI.
//
//   subject_id,<id>,label,<class index>
//   <v_0>,...,<v_{S-1}>          (one row per ROI)
inline void save_roi_series(const std::filesystem::path& path, const RoiTimeSeries& ts) {
    std::string out = "subject_id," + ts.subject_id + ",label," + std::to_string(ts.label) + "\n";
    const int rois = ts.num_rois(), scan = ts.scan_length();
    for (int r = 0; r < rois; ++r) {
        for (int s = 0; s < scan; ++s) {
            if (s) out += ',';
            out += format_double(ts.values(r, s));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

inline RoiTimeSeries load_roi_series(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    const std::string ctx = "time-series file " + path.string();
    if (lines.empty()) throw DataError(ctx + ": empty file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() != 4 || header[0] != "subject_id" || header[2] != "label") {
        throw DataError(ctx + ": expected header 'subject_id,<id>,label,<class>'");
    }
    RoiTimeSeries ts;
    ts.subject_id = header[1];
    ts.label = static_cast<int>(parse_long(header[3], ctx));
    if (ts.label < 0) throw DataError(ctx + ": negative label");

    std::vector<double> data;
    int scan = -1, rois = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (scan == -1) scan = static_cast<int>(fields.size());
        if (static_cast<int>(fields.size()) != scan) {
            throw DataError(ctx + ": ragged row " + std::to_string(i + 1) + " (" +
                            std::to_string(fields.size()) + " values, expected " +
                            std::to_string(scan) + ")");
        }
        for (const auto& f : fields) {
            const double v = parse_double(f, ctx);
            if (!std::isfinite(v)) {
                throw DataError(ctx + ": non-finite value in subject " + ts.subject_id);
            }
            data.push_back(v);
        }
        ++rois;
    }
    if (rois == 0) throw DataError(ctx + ": no ROI rows");
    ts.values = Tensor({rois, scan}, std::move(data));
    return ts;
}

inline std::vector<RoiTimeSeries> load_roi_dataset(const std::filesystem::path& dir) {
    std::vector<RoiTimeSeries> out;
    for (const auto& file : list_files(dir, ".roi.csv")) out.push_back(load_roi_series(file));
    if (out.empty()) throw DataError("no .roi.csv files in " + dir.string());
    return out;
}

}  // namespace pathnet
