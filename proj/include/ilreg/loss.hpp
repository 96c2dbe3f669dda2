#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ilreg/covariance.hpp"
#include "ilreg/error.hpp"
#include "ilreg/image.hpp"
#include "ilreg/math.hpp"
#include "ilreg/mesh.hpp"
#include "ilreg/pose.hpp"
#include "ilreg/raster.hpp"

namespace ilreg {

// Covariance inverses get a relative ridge before inversion so that flat
// channels (constant reflectance, say) do not abort the whole computation.
// The ridge must stay well below the 1e-10 tolerances asserted around the
// loss identities, hence 1e-11; a matrix still worse-conditioned than
// kMaxCondition after the ridge is reported as singular.
inline constexpr double kRidgeLambda = 1e-11;
inline constexpr double kMaxCondition = 1e12;

namespace detail {

// means: the per-channel sample means of the block, used to separate genuine
// variance from the floating-point dust a numerically constant channel leaves
// behind (whose 1x1 "condition number" would look perfect).
inline MatX ridged_inverse(const MatX& c, const std::vector<double>& means, const char* what) {
    const int n = c.rows();
    double dust = 0.0;
    for (int i = 0; i < n; ++i) {
        const double q = 1e-12 * std::fabs(means[static_cast<size_t>(i)]);
        dust += q * q;
    }
    if (c.trace() <= dust)
        throw SingularCovarianceError(std::string("singular covariance (constant values): ") +
                                      what);
    MatX work = c;
    const double ridge = kRidgeLambda * c.trace() / static_cast<double>(n);
    for (int i = 0; i < n; ++i) work(i, i) += ridge;
    MatX inv;
    if (!try_invert(work, inv) || condition_inf(work, inv) > kMaxCondition)
        throw SingularCovarianceError(std::string("singular covariance: ") + what);
    return inv;
}

}  // namespace detail

// Least-squares affine map from the projection channels onto the photo
// channels: A = C_XY (C_YY)^-1, b = mean_x - A mean_y. Returned as a flat
// n*m row-major matrix plus the n-vector offset.
struct AffineFit {
    MatX a;                  // n x m
    std::vector<double> b;   // n
};

inline AffineFit fit_affine(const CovStats& stats) {
    const MatX cyy_inv = detail::ridged_inverse(stats.c_yy, stats.mean_y, "projection covariance");
    AffineFit fit;
    fit.a = stats.c_xy * cyy_inv;
    fit.b.assign(static_cast<size_t>(stats.n()), 0.0);
    for (int r = 0; r < stats.n(); ++r) {
        double v = stats.mean_x[static_cast<size_t>(r)];
        for (int c = 0; c < stats.m(); ++c)
            v -= fit.a(r, c) * stats.mean_y[static_cast<size_t>(c)];
        fit.b[static_cast<size_t>(r)] = v;
    }
    return fit;
}

// The exact minimizer of the mean squared residual E[(A.M + b - F)^2] for a
// single-channel photo over the 4 attribute channels.
inline Lighting fit_lighting(const CovStats& stats) {
    if (stats.n() != 1 || stats.m() != 4)
        throw ShapeError("fit_lighting expects 1 photo channel against 4 attribute channels");
    const AffineFit fit = fit_affine(stats);
    Lighting light;
    for (int c = 0; c < 4; ++c) light.A[static_cast<size_t>(c)] = fit.a(0, c);
    light.b = fit.b[0];
    return light;
}

// Symmetrized illumination-invariant loss
//   min{n,m} - tr[ C_XY C_YY^-1 C_YX C_XX^-1 ]
// Invariant under invertible affine maps on either side; zero exactly when
// some affine map sends the projection attributes onto the photo. For
// n = m = 1 this is 1 - corr^2.
inline double invariant_loss(const CovStats& stats) {
    const MatX cxx_inv = detail::ridged_inverse(stats.c_xx, stats.mean_x, "photo covariance");
    const MatX cyy_inv = detail::ridged_inverse(stats.c_yy, stats.mean_y, "projection covariance");
    const MatX t = stats.c_xy * cyy_inv * stats.c_xy.transposed() * cxx_inv;
    const double bound = static_cast<double>(std::min(stats.n(), stats.m()));
    const double loss = bound - t.trace();
    return std::clamp(loss, 0.0, bound);
}

// Mahalanobis-scaled affine residual E[ ||A.Y + b - X||^2_{C_XX^-1} ],
// evaluated purely from the second-order statistics. At the fitted optimum
// this equals n - tr[ C_XY C_YY^-1 C_YX C_XX^-1 ].
inline double mahalanobis_distance(const CovStats& stats, const MatX& a,
                                   const std::vector<double>& b) {
    const int n = stats.n();
    const int m = stats.m();
    if (a.rows() != n || a.cols() != m || static_cast<int>(b.size()) != n)
        throw ShapeError("affine map shape does not match the statistics");
    const MatX cxx_inv = detail::ridged_inverse(stats.c_xx, stats.mean_x, "photo covariance");

    //   E[r r^T] = A C_YY A^T - A C_YX - C_XY A^T + C_XX + mr mr^T
    const MatX a_cyx = a * stats.c_xy.transposed();  // A C_YX, n x n
    MatX err = a * stats.c_yy * a.transposed() + stats.c_xx;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) err(r, c) -= a_cyx(r, c) + a_cyx(c, r);
    std::vector<double> mr(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        double v = b[static_cast<size_t>(r)] - stats.mean_x[static_cast<size_t>(r)];
        for (int c = 0; c < m; ++c)
            v += a(r, c) * stats.mean_y[static_cast<size_t>(c)];
        mr[static_cast<size_t>(r)] = v;
    }
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            err(r, c) += mr[static_cast<size_t>(r)] * mr[static_cast<size_t>(c)];

    return (cxx_inv * err).trace();
}

inline double mahalanobis_distance(const CovStats& stats, const Lighting& light) {
    if (stats.n() != 1 || stats.m() != 4)
        throw ShapeError("lighting overload expects 1 photo channel against 4 attribute channels");
    MatX a(1, 4);
    for (int c = 0; c < 4; ++c) a(0, c) = light.A[static_cast<size_t>(c)];
    return mahalanobis_distance(stats, a, {light.b});
}

struct LossOptions {
    MaskMode mask_mode = MaskMode::model_silhouette;
    int min_pixels = 100;
};

// Loss value an optimizer assigns to poses that cannot be evaluated at all;
// strictly above the attainable range [0, min{n,m}].
inline double worst_case_loss(int photo_channels) {
    return static_cast<double>(std::min(photo_channels, 4)) + 1.0;
}

// Full pipeline: rasterize the pose, gather statistics over the selected
// pixel population, evaluate the invariant loss. Deterministic.
inline double pose_loss(const AttributeImage& photo, const Mesh& mesh, const Pose& pose,
                        const CameraConfig& cam, const LossOptions& opts = {}) {
    if (photo.width != cam.width || photo.height != cam.height)
        throw ShapeError("photo dimensions do not match the camera configuration");
    const AttributeImage proj = rasterize_attributes(mesh, pose, cam);
    const long long covered = proj.covered_count();
    if (covered < opts.min_pixels)
        throw TooFewPixelsError("projection covers " + std::to_string(covered) +
                                " pixels, below the minimum of " +
                                std::to_string(opts.min_pixels));
    const CovStats stats = covariance_stats(photo, proj, opts.mask_mode);
    if (stats.count < opts.min_pixels)
        throw TooFewPixelsError("pixel population of " + std::to_string(stats.count) +
                                " is below the minimum of " + std::to_string(opts.min_pixels));
    return invariant_loss(stats);
}

}  // namespace ilreg
