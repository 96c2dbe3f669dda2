#pragma once

#include <cmath>

#include "ilreg/error.hpp"
#include "ilreg/image.hpp"
#include "ilreg/pose.hpp"
#include "ilreg/raster.hpp"

namespace ilreg {

struct MaskSpec {
    double margin = 1.2;  // silhouette scale factor about its centroid

    void validate() const {
        if (!(margin >= 1.0)) throw ConfigError("mask margin must be >= 1");
    }
};

// Background-exclusion mask: the silhouette of the model at the initial pose,
// scaled about its centroid by the margin. The original silhouette is always
// contained in the result. Returned as a 1-channel image with 0/1 values and
// a matching mask.
inline AttributeImage generate_mask(const Mesh& mesh, const Pose& init_pose,
                                    const CameraConfig& cam, const MaskSpec& spec = {}) {
    spec.validate();
    const AttributeImage attrs = rasterize_attributes(mesh, init_pose, cam);
    double cx = 0.0, cy = 0.0;
    long long covered = 0;
    for (int y = 0; y < attrs.height; ++y)
        for (int x = 0; x < attrs.width; ++x)
            if (attrs.covered(x, y)) {
                cx += x + 0.5;
                cy += y + 0.5;
                ++covered;
            }
    if (covered == 0) throw EmptyPopulationError("empty silhouette at the initial pose");
    cx /= static_cast<double>(covered);
    cy /= static_cast<double>(covered);

    AttributeImage out(attrs.width, attrs.height, 1);
    for (int y = 0; y < attrs.height; ++y) {
        for (int x = 0; x < attrs.width; ++x) {
            bool inside = attrs.covered(x, y);
            if (!inside) {
                // inverse map the pixel center into the unscaled silhouette
                const double sx = cx + (x + 0.5 - cx) / spec.margin;
                const double sy = cy + (y + 0.5 - cy) / spec.margin;
                const int xi = static_cast<int>(std::floor(sx));
                const int yi = static_cast<int>(std::floor(sy));
                inside = xi >= 0 && xi < attrs.width && yi >= 0 && yi < attrs.height &&
                         attrs.covered(xi, yi);
            }
            if (inside) {
                out.at(x, y, 0) = 1.0;
                out.set_covered(x, y, true);
            }
        }
    }
    return out;
}

}  // namespace ilreg
