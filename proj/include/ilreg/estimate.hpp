#pragma once

#include <cmath>
#include <vector>

#include "ilreg/error.hpp"
#include "ilreg/loss.hpp"
#include "ilreg/nelder_mead.hpp"
#include "ilreg/pose.hpp"

namespace ilreg {

struct TraceRow {
    int iter = 0;
    double loss = 0.0;
    double diameter = 0.0;
};

struct EstimateResult {
    Pose best_pose;
    double best_loss = 0.0;
    int evals = 0;
    int restarts_used = 0;
    std::vector<TraceRow> trace;
};

namespace detail {

// Keep psi strictly inside the unit disk so every simplex vertex stays
// evaluable; the z component of the axle direction degenerates at the rim.
inline void project_psi(std::array<double, 7>& v) {
    const double r2 = v[4] * v[4] + v[5] * v[5];
    const double limit = 1.0 - 1e-9;
    if (r2 > limit * limit) {
        const double scale = limit / std::sqrt(r2);
        v[4] *= scale;
        v[5] *= scale;
    }
}

}  // namespace detail

// Minimize the pose loss over the normalized pose parameters with downhill
// simplex runs, reinitializing the simplex at each converged minimum while
// the previous run still improved by more than tol_f. Orthographic starts
// are promoted to the large-f initialization (last normalized component 1)
// unless freeze_orthographic keeps the parallel projection and optimizes the
// remaining six parameters.
inline EstimateResult estimate_pose(const AttributeImage& photo, const Mesh& mesh,
                                    const Pose& init_pose, const CameraConfig& cam,
                                    const SimplexConfig& cfg = {}, const LossOptions& loss_opts = {},
                                    bool freeze_orthographic = false) {
    cfg.validate();
    // Surface unevaluable starts immediately rather than letting the search
    // wander from a sentinel.
    pose_loss(photo, mesh, init_pose, cam, loss_opts);

    NormalizedPose start_np = normalize_pose(init_pose, cam);
    const bool frozen_ortho = freeze_orthographic && init_pose.orthographic();
    if (!frozen_ortho && init_pose.orthographic()) start_np[6] = 1.0;  // f = 10 * width
    const size_t dims = frozen_ortho ? 6 : 7;

    const double sentinel = worst_case_loss(photo.channels);
    auto to_pose_params = [&](const std::vector<double>& x) {
        NormalizedPose np;
        for (size_t i = 0; i < dims; ++i) np[i] = x[i];
        if (frozen_ortho) np[6] = 0.0;
        detail::project_psi(np.v);
        return np;
    };
    auto objective = [&](const std::vector<double>& x) -> double {
        const NormalizedPose np = to_pose_params(x);
        try {
            const Pose pose = denormalize_pose(np, cam);
            return pose_loss(photo, mesh, pose, cam, loss_opts);
        } catch (const DomainError&) {
            return sentinel;
        } catch (const NumericError&) {
            return sentinel;
        }
    };

    EstimateResult result;
    std::vector<double> current(start_np.v.begin(), start_np.v.begin() + static_cast<long>(dims));
    double current_value = objective(current);
    int total_evals = 1;
    int iter_base = 0;

    // Scale the initial simplex to each parameter's magnitude (the focal
    // component routinely sits an order of magnitude above the others), so
    // the first reflections probe comparable relative changes per axis.
    SimplexConfig cfg_scaled = cfg;
    if (cfg_scaled.init_steps.empty()) {
        cfg_scaled.init_steps.resize(dims);
        for (size_t i = 0; i < dims; ++i)
            cfg_scaled.init_steps[i] = cfg.init_step * std::max(std::fabs(current[i]), 1.0);
    }

    SimplexResult best{current, current_value, 0};
    for (int run = 0;; ++run) {
        int last_iter = 0;
        auto on_iter = [&](int iter, double value, double diam) {
            last_iter = iter;
            result.trace.push_back({iter_base + iter, value, diam});
        };
        const SimplexResult r = nelder_mead(objective, current, cfg_scaled, on_iter);
        total_evals += r.evals;
        iter_base += last_iter + 1;
        const double improvement = current_value - r.value;
        if (r.value < best.value) best = r;
        if (run >= cfg.restarts || !(improvement > cfg.tol_f)) break;
        result.restarts_used = run + 1;
        current = best.argmin;
        current_value = best.value;
    }

    const NormalizedPose final_np = to_pose_params(best.argmin);
    result.best_pose = denormalize_pose(final_np, cam);
    result.best_loss = best.value;
    result.evals = total_evals;
    return result;
}

}  // namespace ilreg
