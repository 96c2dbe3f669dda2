#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "ilreg/error.hpp"
#include "ilreg/math.hpp"
#include "ilreg/mesh.hpp"

namespace ilreg {

inline constexpr double kOrthographicF = std::numeric_limits<double>::infinity();

// Object-centric pose: projected rear wheel center mu (pixels), projected
// rear-to-front wheel vector delta (pixels), the x/y components of the unit
// rear-axle direction psi (its z component is -sqrt(1 - psi_x^2 - psi_y^2)),
// and the frustum focal length f in pixels (f = inf selects the parallel
// projection).
struct Pose {
    Vec2 mu;
    Vec2 delta;
    Vec2 psi;
    double f = kOrthographicF;

    bool orthographic() const { return std::isinf(f); }

    void validate() const {
        if (psi.x * psi.x + psi.y * psi.y > 1.0)
            throw DomainError("psi_x^2 + psi_y^2 exceeds 1");
        if (!(delta.norm() > 0.0)) throw DomainError("delta must be nonzero");
        if (!orthographic() && !(f > 0.0)) throw DomainError("focal length must be positive");
    }
};

inline Vec3 psi_vector(const Vec2& psi) {
    const double sq = 1.0 - psi.x * psi.x - psi.y * psi.y;
    if (sq < 0.0) throw DomainError("psi_x^2 + psi_y^2 exceeds 1");
    return {psi.x, psi.y, -std::sqrt(sq)};
}

// Camera/model placement conventions: pinhole camera at the origin looking
// along +z, principal point at the image center, y-down pixels. The model is
// placed so the rear wheel anchor sits at depth depth_factor * f; alpha is
// the scale applied when geometry would otherwise cross the projection plane.
struct CameraConfig {
    int width = 800;
    int height = 600;
    double depth_factor = 2.0;
    double alpha = 2.0;

    Vec2 center() const { return {width / 2.0, height / 2.0}; }

    void validate() const {
        if (width <= 0 || height <= 0) throw ConfigError("image dimensions must be positive");
        if (!(depth_factor > 1.0)) throw ConfigError("depth_factor must exceed 1");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    }
};

inline Vec2 perspective_project(const Vec3& p, const CameraConfig& cam, double f) {
    const Vec2 c = cam.center();
    if (std::isinf(f)) return {c.x + p.x, c.y + p.y};
    if (!(p.z > 0.0)) throw DomainError("point behind the camera (z <= 0)");
    return {c.x + f * p.x / p.z, c.y + f * p.y / p.z};
}

// Pose scaled by the photo dimensions so every component has a comparable
// range during optimization:
//   (mu_x/W, mu_y/H, delta_x/W, delta_y/H, psi_x, psi_y, 10*W/f)
// The last component is 0 for the orthographic sentinel and exactly 1 at the
// standard large-f initialization f = 10*W.
struct NormalizedPose {
    std::array<double, 7> v{};

    double operator[](size_t i) const { return v[i]; }
    double& operator[](size_t i) { return v[i]; }
};

inline NormalizedPose normalize_pose(const Pose& pose, const CameraConfig& cam) {
    pose.validate();
    cam.validate();
    NormalizedPose n;
    n.v = {pose.mu.x / cam.width,    pose.mu.y / cam.height, pose.delta.x / cam.width,
           pose.delta.y / cam.height, pose.psi.x,            pose.psi.y,
           pose.orthographic() ? 0.0 : 10.0 * cam.width / pose.f};
    return n;
}

inline Pose denormalize_pose(const NormalizedPose& n, const CameraConfig& cam) {
    cam.validate();
    if (n[4] * n[4] + n[5] * n[5] > 1.0)
        throw DomainError("normalized psi outside the unit disk");
    if (n[6] < 0.0) throw DomainError("normalized focal component must be >= 0");
    Pose pose;
    pose.mu = {n[0] * cam.width, n[1] * cam.height};
    pose.delta = {n[2] * cam.width, n[3] * cam.height};
    pose.psi = {n[4], n[5]};
    pose.f = n[6] == 0.0 ? kOrthographicF : 10.0 * cam.width / n[6];
    pose.validate();
    return pose;
}

// Rotation, uniform scale and translation mapping model coordinates into
// camera space.
struct RigidTransform {
    Mat3 rotation;
    double scale = 1.0;
    Vec3 translation;

    Vec3 apply(const Vec3& p) const { return rotation * p * scale + translation; }
};

namespace detail {

// Deterministic orthonormal basis of the plane normal to unit vector u,
// with {u, b1, b2} right-handed.
inline void plane_basis(const Vec3& u, Vec3& b1, Vec3& b2) {
    const Vec3 seed = std::fabs(u.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    b1 = normalized(seed - u * seed.dot(u));
    b2 = u.cross(b1);
}

}  // namespace detail

// Solve for the rigid transform realizing a pose against the mesh anchors.
// Postconditions (checked by tests, not re-verified here):
//   (a) R * axle_dir = (psi_x, psi_y, -sqrt(1-psi_x^2-psi_y^2))
//   (b) proj(front) - proj(rear) = delta
//   (c) proj(rear) = mu
//   (d) R is a proper rotation
// The rotation angle about psi and the scale come from the closed-form
// solution of (b); of the two branches, the one whose projected wheelbase
// has the larger positive dot product with delta wins.
inline RigidTransform pose_to_transform(const Pose& pose, const RegistrationMeta& meta,
                                        const CameraConfig& cam) {
    pose.validate();
    meta.validate();
    cam.validate();

    const Vec3 axle = normalized(meta.axle_dir);
    const Vec3 w = meta.front_wheel_center - meta.rear_wheel_center;
    const double c1 = w.dot(axle);
    const Vec3 w_perp_vec = w - axle * c1;
    const double w_perp = w_perp_vec.norm();
    if (!(w_perp > 1e-12 * w.norm()))
        throw DomainError("degenerate registration frame: axle parallel to wheelbase");

    // Model-side frame {axle, unit wheelbase residual, their cross product}.
    const Vec3 e1 = axle;
    const Vec3 e2 = w_perp_vec / w_perp;
    const Vec3 e3 = e1.cross(e2);

    const Vec3 psi = psi_vector(pose.psi);
    Vec3 b1, b2;
    detail::plane_basis(psi, b1, b2);

    const bool ortho = pose.orthographic();
    const Vec2 m = pose.mu - cam.center();
    const Vec2 md = m + pose.delta;

    // g(gamma) = p + cos(gamma)*u + sin(gamma)*v must align with delta, where
    // g collects the screen-space wheelbase direction:
    //   perspective: g = f * d_xy - (m + delta) * d_z,  d = R*w
    //   orthographic: g = d_xy
    auto screen_term = [&](const Vec3& dir) -> Vec2 {
        if (ortho) return dir.xy();
        return dir.xy() * pose.f - md * dir.z;
    };
    const Vec2 p = screen_term(psi * c1);
    const Vec2 u = screen_term(b1 * w_perp);
    const Vec2 v = screen_term(b2 * w_perp);

    // A*cos + B*sin = -C
    const double A = u.cross(pose.delta);
    const double B = v.cross(pose.delta);
    const double C = p.cross(pose.delta);
    const double r0 = std::hypot(A, B);
    const double rhs = -C;
    const double cross_scale =
        (p.norm() + u.norm() + v.norm()) * pose.delta.norm() + 1e-300;
    std::array<double, 2> gammas{};
    if (r0 > 1e-12 * cross_scale) {
        if (std::fabs(rhs) > r0 * (1.0 + 1e-12))
            throw DomainError("pose unreachable: no rotation aligns the wheelbase with delta");
        const double phase = std::atan2(B, A);
        double ratio = rhs / r0;
        if (ratio > 1.0) ratio = 1.0;
        if (ratio < -1.0) ratio = -1.0;
        const double off = std::acos(ratio);
        gammas = {phase + off, phase - off};
    } else {
        // u and v both project parallel to delta, so g stays aligned (or
        // anti-aligned) with delta for every rotation angle. A whole circle
        // of rotations satisfies the constraints; take the one with the
        // largest projected wheelbase, i.e. the least foreshortening.
        if (std::fabs(C) > 1e-9 * cross_scale)
            throw DomainError("pose unreachable: no rotation aligns the wheelbase with delta");
        const double gamma_max = std::atan2(v.dot(pose.delta), u.dot(pose.delta));
        gammas = {gamma_max, gamma_max};
    }

    struct Candidate {
        double gamma = 0.0;
        Vec2 g;
        double dot = -std::numeric_limits<double>::infinity();
        double s = 0.0;
        double front_z = 1.0;
    };
    Candidate best;
    const double delta_norm = pose.delta.norm();
    for (double gamma : gammas) {
        const Vec2 g = p + u * std::cos(gamma) + v * std::sin(gamma);
        const double dot = g.dot(pose.delta);
        if (!(dot > 0.0)) continue;
        Candidate cand;
        cand.gamma = gamma;
        cand.g = g;
        cand.dot = dot;
        if (ortho) {
            cand.s = delta_norm / g.norm();
        } else {
            const double z0 = cam.depth_factor * pose.f;
            cand.s = z0 * delta_norm / g.norm();
            const Vec3 d = psi * c1 + (b1 * std::cos(gamma) + b2 * std::sin(gamma)) * w_perp;
            cand.front_z = z0 + cand.s * d.z;
            if (!(cand.front_z > 0.0)) continue;
        }
        if (cand.dot > best.dot) best = cand;
    }
    if (!(best.dot > 0.0))
        throw DomainError("pose unreachable: wheelbase cannot project onto delta");

    const Vec3 q = b1 * std::cos(best.gamma) + b2 * std::sin(best.gamma);
    const Mat3 target = Mat3::from_columns(psi, q, psi.cross(q));
    const Mat3 source = Mat3::from_columns(e1, e2, e3);
    RigidTransform tf;
    tf.rotation = target * source.transposed();
    tf.scale = best.s;

    const Vec3 rot_rear = tf.rotation * meta.rear_wheel_center * tf.scale;
    if (ortho) {
        // Depth is immaterial to a parallel projection; park the rear anchor
        // at depth_factor times the scaled wheelbase so depths stay positive
        // for typical models.
        const double z0 = cam.depth_factor * tf.scale * w.norm();
        tf.translation = Vec3{m.x, m.y, z0} - rot_rear;
    } else {
        const double z0 = cam.depth_factor * pose.f;
        tf.translation =
            Vec3{m.x * z0 / pose.f, m.y * z0 / pose.f, z0} - rot_rear;
    }
    return tf;
}

}  // namespace ilreg
