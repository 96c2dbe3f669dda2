#include <doctest.h>

#include <cmath>

#include "ilreg/estimate.hpp"

#include "support/test_meshes.hpp"
#include "support/test_rng.hpp"
#include "support/test_scenes.hpp"

using namespace ilreg;
using namespace ilreg::testing;

namespace {

const CameraConfig kCam{320, 240, 2.0, 2.0};

Scene box_car_scene(double f = 1600.0) {
    return make_scene(make_box_car(), Pose{{160, 120}, {80, -30}, {0.25, 0.125}, f}, kCam);
}

// Tolerances matched to an 8-bit-quantized photo: coarse value spread with
// the simplex-diameter gate carrying the convergence quality.
SimplexConfig recovery_config(const NormalizedPose& start) {
    SimplexConfig cfg;
    cfg.tol_f = 3e-3;
    cfg.tol_x = 1e-2;
    cfg.init_steps.resize(7);
    for (size_t i = 0; i < 7; ++i)
        cfg.init_steps[i] = 0.1 * std::max(std::fabs(start[i]), 0.15);
    return cfg;
}

void quantize_8bit(AttributeImage& img) {
    for (auto& v : img.data) v = std::lround(v * 255.0) / 255.0;
}

}  // namespace

TEST_CASE("starting at the optimum converges immediately without restarts") {
    const Scene s = box_car_scene();
    const EstimateResult r = estimate_pose(s.photo, s.mesh, s.pose, kCam, {}, full_frame_opts());
    CHECK(r.best_loss < 1e-6);
    CHECK(std::fabs(r.best_pose.mu.x - s.pose.mu.x) < kCam.width * 0.01);
    CHECK(std::fabs(r.best_pose.mu.y - s.pose.mu.y) < kCam.height * 0.01);
    // no improvement beyond tol_f on the first run means no reinitializations
    CHECK(r.restarts_used == 0);
}

TEST_CASE("recovers a perturbed pose to within 1% normalized error") {
    const CameraConfig cam{640, 480, 2.0, 2.0};
    Scene s = make_scene(make_box_car(), Pose{{320, 240}, {190, -70}, {0.55, 0.15}, 1600.0}, cam);
    quantize_8bit(s.photo);
    const NormalizedPose truth = normalize_pose(s.pose, cam);

    Rng rng(77);
    NormalizedPose np = truth;
    for (size_t i = 0; i < 7; ++i) np[i] *= 1.0 + rng.uniform(-0.05, 0.05);
    const Pose init = denormalize_pose(np, cam);

    const EstimateResult r =
        estimate_pose(s.photo, s.mesh, init, cam, recovery_config(np), full_frame_opts());
    CHECK(r.best_loss < 1e-3);
    const NormalizedPose got = normalize_pose(r.best_pose, cam);
    for (size_t i = 0; i < 7; ++i) {
        const double scale = std::max(std::fabs(truth[i]), 0.05);
        CHECK(std::fabs(got[i] - truth[i]) / scale < 0.01);
    }
    // on the order of the reported 100-200 evaluations per minimization
    CHECK(r.evals < 1000);
}

TEST_CASE("trace is monotone and the result re-evaluates to the same loss") {
    const Scene s = box_car_scene();
    Pose init = s.pose;
    init.mu.x += 8;
    init.delta.y -= 5;
    const EstimateResult r = estimate_pose(s.photo, s.mesh, init, kCam, {}, full_frame_opts());

    REQUIRE_FALSE(r.trace.empty());
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : r.trace) {
        CHECK(row.loss <= prev);
        prev = row.loss;
    }

    const double re = pose_loss(s.photo, s.mesh, r.best_pose, kCam, full_frame_opts());
    CHECK(std::fabs(re - r.best_loss) < 1e-12);
    CHECK(r.evals > 0);
}

TEST_CASE("restart never finishes worse than its starting loss") {
    const Scene s = box_car_scene();
    Pose init = s.pose;
    init.mu.x += 12;
    init.psi.x -= 0.04;
    SimplexConfig cfg;
    cfg.restarts = 3;
    const EstimateResult r = estimate_pose(s.photo, s.mesh, init, kCam, cfg, full_frame_opts());
    const double init_loss = pose_loss(s.photo, s.mesh, init, kCam, full_frame_opts());
    CHECK(r.best_loss <= init_loss);
    CHECK(r.restarts_used <= cfg.restarts);
}

TEST_CASE("silhouette-mode estimate still refines a near-truth start") {
    const Scene s = box_car_scene();
    Pose init = s.pose;
    init.mu.x += 1.5;  // inside the narrow silhouette-mode basin
    const EstimateResult r = estimate_pose(s.photo, s.mesh, init, kCam);
    CHECK(r.best_loss < pose_loss(s.photo, s.mesh, init, kCam));
}

TEST_CASE("orthographic init is promoted to the large-f start unless frozen") {
    const Scene s = make_scene(make_box_car(),
                               Pose{{160, 120}, {80, -30}, {0.25, 0.125}, kOrthographicF}, kCam);

    SUBCASE("promoted: the result carries a finite focal length") {
        NormalizedPose promoted = normalize_pose(s.pose, kCam);
        promoted[6] = 1.0;
        const double start_loss =
            pose_loss(s.photo, s.mesh, denormalize_pose(promoted, kCam), kCam, full_frame_opts());
        const EstimateResult r = estimate_pose(s.photo, s.mesh, s.pose, kCam,
                                               recovery_config(promoted), full_frame_opts());
        CHECK_FALSE(r.best_pose.orthographic());
        CHECK(r.best_pose.f > kCam.width);  // stays near the large-f init
        CHECK(r.best_loss <= start_loss);   // never worse than the promoted start
        CHECK(r.best_loss < 0.05);          // near-parallel fit to a parallel render
    }

    SUBCASE("frozen: stays orthographic") {
        const EstimateResult r = estimate_pose(s.photo, s.mesh, s.pose, kCam, {},
                                               full_frame_opts(), /*freeze_orthographic=*/true);
        CHECK(r.best_pose.orthographic());
        CHECK(r.best_loss < 1e-6);
    }
}

TEST_CASE("unevaluable init propagates the underlying error") {
    const Scene s = box_car_scene();
    Pose off = s.pose;
    off.mu = {-4000, -4000};
    CHECK_THROWS_AS(estimate_pose(s.photo, s.mesh, off, kCam), TooFewPixelsError);
}

TEST_CASE("estimate is deterministic end to end") {
    const Scene s = box_car_scene();
    Pose init = s.pose;
    init.mu.y -= 6;
    const EstimateResult a = estimate_pose(s.photo, s.mesh, init, kCam, {}, full_frame_opts());
    const EstimateResult b = estimate_pose(s.photo, s.mesh, init, kCam, {}, full_frame_opts());
    CHECK(a.best_loss == b.best_loss);
    CHECK(a.evals == b.evals);
    CHECK(a.best_pose.mu.x == b.best_pose.mu.x);
    CHECK(a.best_pose.f == b.best_pose.f);
}
