#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "ilreg/error.hpp"
#include "ilreg/image.hpp"
#include "ilreg/math.hpp"
#include "ilreg/mesh.hpp"
#include "ilreg/pose.hpp"

namespace ilreg {

// Affine illumination: A = (I_a, I_d*L^T) applied to the 4-channel attribute
// vector (k_a, k_d * normal), plus the offset b. Any single- or multi-source
// Lambertian rendering of the attributes is of this form.
struct Lighting {
    std::array<double, 4> A{0.0, 0.0, 0.0, 0.0};
    double b = 0.0;
};

inline Lighting make_lighting(double ambient, double diffuse, const Vec3& light_dir,
                              double offset) {
    const Vec3 l = normalized(light_dir);
    return {{ambient, diffuse * l.x, diffuse * l.y, diffuse * l.z}, offset};
}

struct LightingComponents {
    double ambient = 0.0;   // I_a
    double diffuse = 0.0;   // I_d
    Vec3 light_dir{0, 0, 1};
    double offset = 0.0;    // I_0
};

inline LightingComponents lighting_components(const Lighting& light) {
    LightingComponents c;
    c.ambient = light.A[0];
    const Vec3 dl{light.A[1], light.A[2], light.A[3]};
    c.diffuse = dl.norm();
    if (c.diffuse > 0.0) c.light_dir = dl / c.diffuse;
    c.offset = light.b;
    return c;
}

// ---------------------------------------------------------------------------
// Software rasterizer: edge-function fill with a top-left rule, per-pixel
// z-buffer, no backface culling (scanned meshes are not consistently wound),
// pixel centers sampled at (x+0.5, y+0.5). Perspective-correct interpolation
// of reflectances and normals, with normals renormalized per pixel.
// ---------------------------------------------------------------------------

namespace detail {

struct RasterVertex {
    Vec2 screen;
    double z = 1.0;
    double inv_z = 1.0;
    double k_a = 0.0;
    double k_d = 0.0;
    Vec3 normal;  // camera space, unit
};

inline double edge_fn(const Vec2& s, const Vec2& e, const Vec2& p) {
    return (e.x - s.x) * (p.y - s.y) - (e.y - s.y) * (p.x - s.x);
}

// With positive doubled area in y-down screen coordinates, a zero edge value
// belongs to the triangle only on top (horizontal, running +x) and left
// (running -y) edges.
inline bool edge_top_left(const Vec2& s, const Vec2& e) {
    const double dy = e.y - s.y;
    if (dy == 0.0) return e.x - s.x > 0.0;
    return dy < 0.0;
}

}  // namespace detail

// Project the mesh at the given pose into the 4-channel attribute image
// (k_a, k_d*n_x, k_d*n_y, k_d*n_z) with a coverage mask. Uncovered pixels
// stay zero with mask=false; an empty footprint is not an error.
inline AttributeImage rasterize_attributes(const Mesh& mesh, const Pose& pose,
                                           const CameraConfig& cam) {
    const RegistrationMeta& meta = require_meta(mesh);
    const RigidTransform tf = pose_to_transform(pose, meta, cam);
    const bool ortho = pose.orthographic();

    const size_t nv = mesh.vertices.size();
    std::vector<Vec3> cam_pos(nv);
    std::vector<Vec3> cam_normal(nv);
    for (size_t i = 0; i < nv; ++i) {
        cam_pos[i] = tf.apply(mesh.vertices[i]);
        cam_normal[i] = tf.rotation * mesh.normals[i];
    }

    if (!ortho && nv > 0) {
        double min_z = std::numeric_limits<double>::infinity();
        for (const auto& p : cam_pos) min_z = std::min(min_z, p.z);
        if (!(min_z > 0.0)) throw DomainError("model is behind the camera");
        int guard = 0;
        while (min_z < pose.f) {
            if (!(cam.alpha > 1.0) || ++guard > 200)
                throw DomainError("model crosses the projection plane and cannot be rescaled");
            for (auto& p : cam_pos) p = p * cam.alpha;
            min_z *= cam.alpha;
        }
    }

    std::vector<detail::RasterVertex> verts(nv);
    for (size_t i = 0; i < nv; ++i) {
        detail::RasterVertex& v = verts[i];
        v.screen = perspective_project(cam_pos[i], cam, pose.f);
        v.z = cam_pos[i].z;
        v.inv_z = ortho ? 1.0 : 1.0 / cam_pos[i].z;
        v.k_a = mesh.k_a[i];
        v.k_d = mesh.k_d[i];
        v.normal = cam_normal[i];
    }

    AttributeImage img(cam.width, cam.height, 4);
    std::vector<double> zbuf(static_cast<size_t>(cam.width) * cam.height,
                             std::numeric_limits<double>::infinity());

    for (const auto& tri : mesh.triangles) {
        detail::RasterVertex a = verts[static_cast<size_t>(tri[0])];
        detail::RasterVertex b = verts[static_cast<size_t>(tri[1])];
        detail::RasterVertex c = verts[static_cast<size_t>(tri[2])];

        double area2 = detail::edge_fn(a.screen, b.screen, c.screen);
        if (area2 == 0.0) continue;
        if (area2 < 0.0) {
            std::swap(b, c);
            area2 = -area2;
        }
        // camera-space face normal, fallback for degenerate interpolation
        const Vec3 face_n = normalized(
            (cam_pos[static_cast<size_t>(tri[1])] - cam_pos[static_cast<size_t>(tri[0])])
                .cross(cam_pos[static_cast<size_t>(tri[2])] - cam_pos[static_cast<size_t>(tri[0])]));

        const double min_x = std::min({a.screen.x, b.screen.x, c.screen.x});
        const double max_x = std::max({a.screen.x, b.screen.x, c.screen.x});
        const double min_y = std::min({a.screen.y, b.screen.y, c.screen.y});
        const double max_y = std::max({a.screen.y, b.screen.y, c.screen.y});
        const int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(max_x)));
        const int y0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(max_y)));
        if (x0 > x1 || y0 > y1) continue;

        const bool tl0 = detail::edge_top_left(b.screen, c.screen);
        const bool tl1 = detail::edge_top_left(c.screen, a.screen);
        const bool tl2 = detail::edge_top_left(a.screen, b.screen);

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 pc{x + 0.5, y + 0.5};
                const double w0 = detail::edge_fn(b.screen, c.screen, pc);
                const double w1 = detail::edge_fn(c.screen, a.screen, pc);
                const double w2 = detail::edge_fn(a.screen, b.screen, pc);
                const bool in0 = w0 > 0.0 || (w0 == 0.0 && tl0);
                const bool in1 = w1 > 0.0 || (w1 == 0.0 && tl1);
                const bool in2 = w2 > 0.0 || (w2 == 0.0 && tl2);
                if (!(in0 && in1 && in2)) continue;

                const double l0 = w0 / area2;
                const double l1 = w1 / area2;
                const double l2 = w2 / area2;

                double z, k_a, k_d;
                Vec3 n;
                if (ortho) {
                    z = l0 * a.z + l1 * b.z + l2 * c.z;
                    k_a = l0 * a.k_a + l1 * b.k_a + l2 * c.k_a;
                    k_d = l0 * a.k_d + l1 * b.k_d + l2 * c.k_d;
                    n = a.normal * l0 + b.normal * l1 + c.normal * l2;
                } else {
                    const double denom = l0 * a.inv_z + l1 * b.inv_z + l2 * c.inv_z;
                    z = 1.0 / denom;
                    k_a = (l0 * a.k_a * a.inv_z + l1 * b.k_a * b.inv_z + l2 * c.k_a * c.inv_z) * z;
                    k_d = (l0 * a.k_d * a.inv_z + l1 * b.k_d * b.inv_z + l2 * c.k_d * c.inv_z) * z;
                    n = (a.normal * (l0 * a.inv_z) + b.normal * (l1 * b.inv_z) +
                         c.normal * (l2 * c.inv_z)) *
                        z;
                }

                const size_t pi = img.pixel_index(x, y);
                if (!(z < zbuf[pi])) continue;
                zbuf[pi] = z;

                const double nn = n.norm();
                const Vec3 unit_n = nn > 1e-9 ? n / nn : face_n;
                img.at(x, y, 0) = k_a;
                img.at(x, y, 1) = k_d * unit_n.x;
                img.at(x, y, 2) = k_d * unit_n.y;
                img.at(x, y, 3) = k_d * unit_n.z;
                img.mask[pi] = 1;
            }
        }
    }
    return img;
}

struct ShadeOptions {
    double background = 0.0;
    bool clamp = true;  // disable to test the linearity of the shading model
};

// Apparent intensity per covered pixel: I = A . M + b, the global affine
// function of the attribute vector. Output mask is copied from the input.
inline AttributeImage shade(const AttributeImage& attrs, const Lighting& light,
                            const ShadeOptions& opts = {}) {
    if (attrs.channels != 4) throw ShapeError("shade expects a 4-channel attribute image");
    AttributeImage out(attrs.width, attrs.height, 1);
    out.mask = attrs.mask;
    const size_t npix = out.mask.size();
    for (size_t i = 0; i < npix; ++i) {
        if (!attrs.mask[i]) {
            out.data[i] = opts.background;
            continue;
        }
        double v = light.b;
        for (int c = 0; c < 4; ++c) v += light.A[static_cast<size_t>(c)] * attrs.data[i * 4 + c];
        if (opts.clamp) v = std::clamp(v, 0.0, 1.0);
        out.data[i] = v;
    }
    return out;
}

}  // namespace ilreg
