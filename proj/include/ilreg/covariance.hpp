#pragma once

#include <string>
#include <vector>

#include "ilreg/error.hpp"
#include "ilreg/image.hpp"
#include "ilreg/math.hpp"

namespace ilreg {

// Pixel population selector for the statistics:
//   full_frame       every pixel of both images
//   model_silhouette pixels covered by the projection (the default elsewhere)
//   photo_mask       projection coverage intersected with the photo mask
enum class MaskMode { full_frame, model_silhouette, photo_mask };

inline const char* to_string(MaskMode m) {
    switch (m) {
        case MaskMode::full_frame: return "full";
        case MaskMode::model_silhouette: return "silhouette";
        case MaskMode::photo_mask: return "photo";
    }
    return "?";
}

inline MaskMode mask_mode_from_string(const std::string& s) {
    if (s == "full" || s == "full_frame") return MaskMode::full_frame;
    if (s == "silhouette" || s == "model_silhouette") return MaskMode::model_silhouette;
    if (s == "photo" || s == "photo_mask") return MaskMode::photo_mask;
    throw ConfigError("unknown mask mode '" + s + "'");
}

// Population (divide-by-|P|) means and covariance blocks over the paired
// pixel samples X (photo, n channels) and Y (projection, m channels).
struct CovStats {
    std::vector<double> mean_x;  // n
    std::vector<double> mean_y;  // m
    MatX c_xx;                   // n x n
    MatX c_yy;                   // m x m
    MatX c_xy;                   // n x m; c_yx is its transpose
    long long count = 0;

    int n() const { return static_cast<int>(mean_x.size()); }
    int m() const { return static_cast<int>(mean_y.size()); }

    CovStats swapped() const {
        CovStats s;
        s.mean_x = mean_y;
        s.mean_y = mean_x;
        s.c_xx = c_yy;
        s.c_yy = c_xx;
        s.c_xy = c_xy.transposed();
        s.count = count;
        return s;
    }
};

// Two-pass statistics: means first, then centered second moments, accumulated
// in row-major pixel order. Single-pass update formulas are deliberately not
// used here; this is the reference path.
inline CovStats covariance_stats(const AttributeImage& photo, const AttributeImage& proj,
                                 MaskMode mode) {
    if (!photo.same_dims(proj))
        throw ShapeError("photo and projection dimensions differ");
    const int n = photo.channels;
    const int m = proj.channels;
    if (n <= 0 || m <= 0) throw ShapeError("images must carry at least one channel");

    const size_t npix = photo.mask.size();
    auto active = [&](size_t i) -> bool {
        switch (mode) {
            case MaskMode::full_frame: return true;
            case MaskMode::model_silhouette: return proj.mask[i] != 0;
            case MaskMode::photo_mask: return proj.mask[i] != 0 && photo.mask[i] != 0;
        }
        return false;
    };

    CovStats stats;
    stats.mean_x.assign(static_cast<size_t>(n), 0.0);
    stats.mean_y.assign(static_cast<size_t>(m), 0.0);
    long long count = 0;
    for (size_t i = 0; i < npix; ++i) {
        if (!active(i)) continue;
        ++count;
        for (int c = 0; c < n; ++c)
            stats.mean_x[static_cast<size_t>(c)] += photo.data[i * static_cast<size_t>(n) + c];
        for (int c = 0; c < m; ++c)
            stats.mean_y[static_cast<size_t>(c)] += proj.data[i * static_cast<size_t>(m) + c];
    }
    if (count == 0) throw EmptyPopulationError("empty pixel population for the requested mask mode");
    for (auto& v : stats.mean_x) v /= static_cast<double>(count);
    for (auto& v : stats.mean_y) v /= static_cast<double>(count);

    stats.c_xx = MatX(n, n);
    stats.c_yy = MatX(m, m);
    stats.c_xy = MatX(n, m);
    std::vector<double> dx(static_cast<size_t>(n)), dy(static_cast<size_t>(m));
    for (size_t i = 0; i < npix; ++i) {
        if (!active(i)) continue;
        for (int c = 0; c < n; ++c)
            dx[static_cast<size_t>(c)] =
                photo.data[i * static_cast<size_t>(n) + c] - stats.mean_x[static_cast<size_t>(c)];
        for (int c = 0; c < m; ++c)
            dy[static_cast<size_t>(c)] =
                proj.data[i * static_cast<size_t>(m) + c] - stats.mean_y[static_cast<size_t>(c)];
        for (int r = 0; r < n; ++r) {
            for (int c = r; c < n; ++c)
                stats.c_xx(r, c) += dx[static_cast<size_t>(r)] * dx[static_cast<size_t>(c)];
            for (int c = 0; c < m; ++c)
                stats.c_xy(r, c) += dx[static_cast<size_t>(r)] * dy[static_cast<size_t>(c)];
        }
        for (int r = 0; r < m; ++r)
            for (int c = r; c < m; ++c)
                stats.c_yy(r, c) += dy[static_cast<size_t>(r)] * dy[static_cast<size_t>(c)];
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) {
            stats.c_xx(r, c) *= inv;
            stats.c_xx(c, r) = stats.c_xx(r, c);
        }
    for (int r = 0; r < m; ++r)
        for (int c = r; c < m; ++c) {
            stats.c_yy(r, c) *= inv;
            stats.c_yy(c, r) = stats.c_yy(r, c);
        }
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < m; ++c) stats.c_xy(r, c) *= inv;
    stats.count = count;
    return stats;
}

}  // namespace ilreg
