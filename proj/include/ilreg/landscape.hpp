#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "ilreg/error.hpp"
#include "ilreg/loss.hpp"
#include "ilreg/pose.hpp"

namespace ilreg {

// Two-parameter sweep of the loss about a center pose, in normalized pose
// coordinates. Offsets are fractional: a parameter with center value c is
// evaluated at c*(1+o) for o in [-range, +range]; zero-valued centers use
// the additive fallback o*0.05. An odd step count keeps the center on-grid.
struct LandscapeSpec {
    int param_i = 0;
    int param_j = 1;
    double range = 0.20;
    int steps = 41;

    void validate() const {
        if (param_i == param_j) throw ConfigError("landscape parameters must differ");
        if (param_i < 0 || param_i > 6 || param_j < 0 || param_j > 6)
            throw ConfigError("landscape parameter index out of range 0..6");
        if (!(range > 0.0)) throw ConfigError("landscape range must be positive");
        if (steps < 1) throw ConfigError("landscape needs at least one step");
    }
};

struct LandscapeCell {
    double offset_i = 0.0;
    double offset_j = 0.0;
    double loss = 0.0;
    std::string status = "ok";  // or the error tag for unevaluable cells
};

namespace detail {

inline double offset_parameter(double center, double o) {
    return center != 0.0 ? center * (1.0 + o) : o * 0.05;
}

}  // namespace detail

// Cells are produced in fixed row-major order (param_i offsets outermost),
// error cells carry the worst-case sentinel loss and a tag instead of "ok".
inline std::vector<LandscapeCell> run_landscape(const AttributeImage& photo, const Mesh& mesh,
                                                const Pose& center_pose, const LandscapeSpec& spec,
                                                const CameraConfig& cam,
                                                const LossOptions& loss_opts = {}) {
    spec.validate();
    const NormalizedPose center = normalize_pose(center_pose, cam);
    const double sentinel = worst_case_loss(photo.channels);

    std::vector<double> offsets;
    offsets.reserve(static_cast<size_t>(spec.steps));
    if (spec.steps == 1) {
        offsets.push_back(0.0);
    } else {
        for (int t = 0; t < spec.steps; ++t)
            offsets.push_back(-spec.range +
                              2.0 * spec.range * t / static_cast<double>(spec.steps - 1));
    }

    std::vector<LandscapeCell> cells;
    cells.reserve(offsets.size() * offsets.size());
    for (double oi : offsets) {
        for (double oj : offsets) {
            LandscapeCell cell;
            cell.offset_i = oi;
            cell.offset_j = oj;
            NormalizedPose np = center;
            np[static_cast<size_t>(spec.param_i)] =
                detail::offset_parameter(center[static_cast<size_t>(spec.param_i)], oi);
            np[static_cast<size_t>(spec.param_j)] =
                detail::offset_parameter(center[static_cast<size_t>(spec.param_j)], oj);
            try {
                const Pose pose = denormalize_pose(np, cam);
                cell.loss = pose_loss(photo, mesh, pose, cam, loss_opts);
            } catch (const TooFewPixelsError&) {
                cell.loss = sentinel;
                cell.status = "too_few_pixels";
            } catch (const SingularCovarianceError&) {
                cell.loss = sentinel;
                cell.status = "singular_covariance";
            } catch (const EmptyPopulationError&) {
                cell.loss = sentinel;
                cell.status = "empty_population";
            } catch (const DomainError&) {
                cell.loss = sentinel;
                cell.status = "invalid_pose";
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// One CSV row per cell: i_offset, j_offset, loss, status. 9 significant
// digits, no header, so a steps^2 grid is exactly steps^2 lines.
inline void write_landscape_csv(const std::vector<LandscapeCell>& cells, std::ostream& out) {
    char buf[128];
    for (const auto& cell : cells) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%s\n", cell.offset_i, cell.offset_j,
                      cell.loss, cell.status.c_str());
        out << buf;
    }
}

}  // namespace ilreg
