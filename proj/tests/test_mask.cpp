#include <doctest.h>

#include <cmath>

#include "ilreg/mask.hpp"

#include "support/test_meshes.hpp"

using namespace ilreg;
using namespace ilreg::testing;

namespace {

const CameraConfig kCam{320, 240, 2.0, 2.0};

}  // namespace

TEST_CASE("margin 1 reproduces the silhouette exactly") {
    const Mesh mesh = make_sphere(1.0, 16, 24);
    const Pose pose{{160, 120}, {70, 0}, {0.1, 0.1}, kOrthographicF};
    const AttributeImage attrs = rasterize_attributes(mesh, pose, kCam);
    const AttributeImage mask = generate_mask(mesh, pose, kCam, {1.0});
    CHECK(mask.mask == attrs.mask);
}

TEST_CASE("margin 1.2 on a disk scales the area by about 1.44") {
    // orthographic sphere projects to a disk
    const Mesh mesh = make_sphere(1.0, 24, 36);
    const Pose pose{{160, 120}, {70, 0}, {0.0, 0.0}, kOrthographicF};
    const AttributeImage attrs = rasterize_attributes(mesh, pose, kCam);
    const AttributeImage mask = generate_mask(mesh, pose, kCam, {1.2});
    const double ratio = static_cast<double>(mask.covered_count()) /
                         static_cast<double>(attrs.covered_count());
    CHECK(ratio == doctest::Approx(1.44).epsilon(0.05 / 1.44));
}

TEST_CASE("mask always contains the original silhouette") {
    const Mesh mesh = make_torus(1.0, 0.35, 24, 12);
    const Pose pose{{160, 120}, {80, 20}, {0.3, 0.3}, 1600.0};
    const AttributeImage attrs = rasterize_attributes(mesh, pose, kCam);
    const AttributeImage mask = generate_mask(mesh, pose, kCam, {1.3});
    for (size_t i = 0; i < attrs.mask.size(); ++i)
        if (attrs.mask[i]) CHECK(mask.mask[i] == 1);
    CHECK(mask.covered_count() > attrs.covered_count());
}

TEST_CASE("empty silhouette and bad margins raise") {
    const Mesh mesh = make_sphere(1.0, 8, 12);
    const Pose off{{-4000, -4000}, {70, 0}, {0, 0}, kOrthographicF};
    CHECK_THROWS_AS(generate_mask(mesh, off, kCam, {1.2}), EmptyPopulationError);
    const Pose pose{{160, 120}, {70, 0}, {0, 0}, kOrthographicF};
    CHECK_THROWS_AS(generate_mask(mesh, pose, kCam, {0.8}), ConfigError);
}
