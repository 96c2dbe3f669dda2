#include <doctest.h>

#include <cmath>
#include <vector>

#include "ilreg/loss.hpp"

#include "support/test_images.hpp"
#include "support/test_meshes.hpp"
#include "support/test_rng.hpp"

using namespace ilreg;
using namespace ilreg::testing;

namespace {

const CameraConfig kCam{320, 240, 2.0, 2.0};

CovStats stats_1d(const std::vector<double>& xs, const std::vector<double>& ys) {
    return covariance_stats(scalar_image(xs), scalar_image(ys), MaskMode::full_frame);
}

// Independent least-squares oracle: solve the (m+1)x(m+1) normal equations
// built directly from the samples with plain Gaussian elimination.
void normal_equations_fit(const std::vector<std::vector<double>>& ms,
                          const std::vector<double>& fs, std::vector<double>& a_out,
                          double& b_out) {
    const size_t m = ms[0].size();
    const size_t dim = m + 1;
    std::vector<std::vector<double>> g(dim, std::vector<double>(dim + 1, 0.0));
    for (size_t i = 0; i < ms.size(); ++i) {
        std::vector<double> z(dim);
        for (size_t c = 0; c < m; ++c) z[c] = ms[i][c];
        z[m] = 1.0;
        for (size_t r = 0; r < dim; ++r) {
            for (size_t c = 0; c < dim; ++c) g[r][c] += z[r] * z[c];
            g[r][dim] += z[r] * fs[i];
        }
    }
    for (size_t col = 0; col < dim; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < dim; ++r)
            if (std::fabs(g[r][col]) > std::fabs(g[piv][col])) piv = r;
        std::swap(g[piv], g[col]);
        for (size_t r = 0; r < dim; ++r) {
            if (r == col) continue;
            const double f = g[r][col] / g[col][col];
            for (size_t c = col; c <= dim; ++c) g[r][c] -= f * g[col][c];
        }
    }
    a_out.assign(m, 0.0);
    for (size_t c = 0; c < m; ++c) a_out[c] = g[c][dim] / g[c][c];
    b_out = g[m][dim] / g[m][m];
}

}  // namespace

TEST_CASE("loss is zero for any exact linear relation") {
    Rng rng(17);
    std::vector<double> xs, ys;
    for (int i = 0; i < 200; ++i) xs.push_back(rng.uniform(0, 1));
    SUBCASE("identity") { ys = xs; }
    SUBCASE("negative image") {
        for (double v : xs) ys.push_back(1.0 - v);
    }
    SUBCASE("scaled and offset") {
        for (double v : xs) ys.push_back(-2.7 * v + 0.4);
    }
    const double loss = invariant_loss(stats_1d(xs, ys));
    CHECK(loss < 1e-10);
}

TEST_CASE("hand case: corr 0.8 gives loss 0.36") {
    const std::vector<double> xs{1, 2, 3, 4};
    const std::vector<double> ys{1, 3, 2, 4};
    CHECK(corr_oracle(xs, ys) == doctest::Approx(0.8));
    CHECK(invariant_loss(stats_1d(xs, ys)) == doctest::Approx(0.36).epsilon(1e-9));
}

TEST_CASE("scalar loss equals 1 - corr^2 against the oracle") {
    Rng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(10, 1000);
        std::vector<double> xs, ys;
        for (int i = 0; i < n; ++i) {
            xs.push_back(rng.uniform(-1, 3));
            ys.push_back(0.3 * xs.back() + rng.uniform(-1, 1));
        }
        const double loss = invariant_loss(stats_1d(xs, ys));
        const double c = corr_oracle(xs, ys);
        CHECK(std::fabs(loss - (1.0 - c * c)) < 1e-10);
    }
}

TEST_CASE("loss is symmetric in its arguments") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> xs, ys;
        for (int i = 0; i < 150; ++i) {
            xs.push_back({rng.uniform(0, 1)});
            ys.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1)});
        }
        const CovStats s = covariance_stats(image_from_samples(xs, 1), image_from_samples(ys, 4),
                                            MaskMode::full_frame);
        const double a = invariant_loss(s);
        const double b = invariant_loss(s.swapped());
        CHECK(std::fabs(a - b) < 1e-10);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);  // min{n,m} = 1
    }
}

TEST_CASE("singular populations are reported") {
    // constant photo
    CHECK_THROWS_AS(invariant_loss(stats_1d({0.5, 0.5, 0.5}, {0.1, 0.7, 0.9})),
                    SingularCovarianceError);
    // constant projection
    CHECK_THROWS_AS(invariant_loss(stats_1d({0.1, 0.7, 0.9}, {2.0, 2.0, 2.0})),
                    SingularCovarianceError);
}

TEST_CASE("fit_lighting recovers a noise-free affine relation") {
    const Mesh mesh = make_sphere(1.0, 14, 20);  // varying reflectance: all channels live
    const Pose pose{{160, 120}, {70, 10}, {0.3, 0.15}, 1600.0};
    const AttributeImage proj = rasterize_attributes(mesh, pose, kCam);
    AttributeImage photo(kCam.width, kCam.height, 1);
    photo.mask = proj.mask;
    for (size_t i = 0; i < photo.mask.size(); ++i)
        photo.data[i] = 0.3 * proj.data[i * 4 + 0] + 0.5 * proj.data[i * 4 + 1] + 0.1;

    const CovStats s = covariance_stats(photo, proj, MaskMode::model_silhouette);
    const Lighting fit = fit_lighting(s);
    CHECK(fit.A[0] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(fit.A[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::fabs(fit.A[2]) < 1e-9);
    CHECK(std::fabs(fit.A[3]) < 1e-9);
    CHECK(fit.b == doctest::Approx(0.1).epsilon(1e-9));

    // and the loss sees the exact relation
    CHECK(invariant_loss(s) < 1e-9);
}

TEST_CASE("constant photo fits as pure offset") {
    Rng rng(31);
    std::vector<std::vector<double>> ms;
    std::vector<std::vector<double>> fs;
    for (int i = 0; i < 50; ++i) {
        ms.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                      rng.uniform(-1, 1)});
        fs.push_back({0.42});
    }
    const CovStats s = covariance_stats(image_from_samples(fs, 1), image_from_samples(ms, 4),
                                        MaskMode::full_frame);
    const Lighting fit = fit_lighting(s);
    for (double a : fit.A) CHECK(std::fabs(a) < 1e-12);
    CHECK(fit.b == doctest::Approx(0.42));
}

TEST_CASE("fit matches the normal-equations oracle on random data") {
    Rng rng(555);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(30, 300);
        std::vector<std::vector<double>> ms;
        std::vector<double> f_flat;
        std::vector<std::vector<double>> fs;
        for (int i = 0; i < n; ++i) {
            ms.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1)});
            f_flat.push_back(rng.uniform(0, 1));
            fs.push_back({f_flat.back()});
        }
        const CovStats s = covariance_stats(image_from_samples(fs, 1), image_from_samples(ms, 4),
                                            MaskMode::full_frame);
        const Lighting fit = fit_lighting(s);
        std::vector<double> a_oracle;
        double b_oracle;
        normal_equations_fit(ms, f_flat, a_oracle, b_oracle);
        double scale = std::fabs(b_oracle);
        for (double a : a_oracle) scale = std::max(scale, std::fabs(a));
        for (int c = 0; c < 4; ++c)
            CHECK(std::fabs(fit.A[static_cast<size_t>(c)] - a_oracle[static_cast<size_t>(c)]) <
                  1e-8 * std::max(1.0, scale));
        CHECK(std::fabs(fit.b - b_oracle) < 1e-8 * std::max(1.0, scale));
    }
}

TEST_CASE("fit is a local minimum of the mean squared residual") {
    Rng rng(808);
    std::vector<std::vector<double>> ms;
    std::vector<std::vector<double>> fs;
    for (int i = 0; i < 120; ++i) {
        ms.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                      rng.uniform(-1, 1)});
        fs.push_back({0.2 * ms.back()[0] - 0.4 * ms.back()[2] + rng.uniform(-0.1, 0.1)});
    }
    const CovStats s = covariance_stats(image_from_samples(fs, 1), image_from_samples(ms, 4),
                                        MaskMode::full_frame);
    const Lighting fit = fit_lighting(s);
    auto mse = [&](const Lighting& l) {
        double sum = 0;
        for (size_t i = 0; i < ms.size(); ++i) {
            double r = l.b - fs[i][0];
            for (int c = 0; c < 4; ++c)
                r += l.A[static_cast<size_t>(c)] * ms[i][static_cast<size_t>(c)];
            sum += r * r;
        }
        return sum / static_cast<double>(ms.size());
    };
    const double at_fit = mse(fit);
    for (int trial = 0; trial < 40; ++trial) {
        Lighting perturbed = fit;
        for (auto& a : perturbed.A) a += rng.uniform(-1e-4, 1e-4);
        perturbed.b += rng.uniform(-1e-4, 1e-4);
        CHECK(mse(perturbed) >= at_fit - 1e-15);
    }
}

TEST_CASE("mahalanobis distance basics") {
    Rng rng(99);
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(rng.uniform(0, 1));

    SUBCASE("identity map on identical signals is zero") {
        const CovStats s = stats_1d(xs, xs);
        MatX a(1, 1);
        a(0, 0) = 1.0;
        CHECK(mahalanobis_distance(s, a, {0.0}) == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("fitted optimum equals 1 - corr^2") {
        std::vector<double> ys;
        for (double v : xs) ys.push_back(0.6 * v + rng.uniform(-0.2, 0.2));
        const CovStats s = stats_1d(xs, ys);
        const AffineFit fit = fit_affine(s);
        const double d = mahalanobis_distance(s, fit.a, fit.b);
        const double c = corr_oracle(xs, ys);
        CHECK(d == doctest::Approx(1.0 - c * c).epsilon(1e-9));
    }
}

TEST_CASE("grid search approaches the closed form from above (n=1, m=2)") {
    Rng rng(1234);
    std::vector<std::vector<double>> ms;
    std::vector<std::vector<double>> fs;
    for (int i = 0; i < 60; ++i) {
        ms.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        fs.push_back({0.5 * ms.back()[0] - 0.25 * ms.back()[1] + rng.uniform(-0.3, 0.3)});
    }
    const CovStats s = covariance_stats(image_from_samples(fs, 1), image_from_samples(ms, 2),
                                        MaskMode::full_frame);

    // closed form: n - tr[C_XY C_YY^-1 C_YX C_XX^-1]
    const AffineFit fit = fit_affine(s);
    const double closed = mahalanobis_distance(s, fit.a, fit.b);

    double best = std::numeric_limits<double>::infinity();
    for (int ia = -10; ia <= 10; ++ia)
        for (int ib = -10; ib <= 10; ++ib)
            for (int ic = -10; ic <= 10; ++ic) {
                MatX a(1, 2);
                a(0, 0) = fit.a(0, 0) + 0.02 * ia;
                a(0, 1) = fit.a(0, 1) + 0.02 * ib;
                const double b = fit.b[0] + 0.02 * ic;
                best = std::min(best, mahalanobis_distance(s, a, {b}));
            }
    CHECK(best >= closed - 1e-12);
    CHECK(best <= closed + 1e-6);  // grid includes the optimum cell
}

TEST_CASE("loss is invariant under affine maps of either side") {
    Rng rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> xs, ys;
        for (int i = 0; i < 200; ++i) {
            xs.push_back({rng.uniform(0, 1)});
            ys.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1)});
        }
        const CovStats base = covariance_stats(image_from_samples(xs, 1),
                                               image_from_samples(ys, 4), MaskMode::full_frame);
        const double loss0 = invariant_loss(base);

        // photo side: a*F + c
        for (double a : {-3.0, -0.1, 0.7, 5.0}) {
            std::vector<std::vector<double>> x2;
            for (const auto& x : xs) x2.push_back({a * x[0] + 0.37});
            const CovStats s = covariance_stats(image_from_samples(x2, 1),
                                                image_from_samples(ys, 4), MaskMode::full_frame);
            CHECK(std::fabs(invariant_loss(s) - loss0) < 1e-8);
        }

        // projection side: well-conditioned invertible T plus offset
        std::vector<std::vector<double>> y2;
        std::array<std::array<double, 4>, 4> t{};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) t[static_cast<size_t>(r)][static_cast<size_t>(c)] =
                (r == c ? 1.0 : 0.0) + rng.uniform(-0.35, 0.35);
        }
        std::array<double, 4> u{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                                rng.uniform(-1, 1)};
        for (const auto& y : ys) {
            std::vector<double> row(4);
            for (int r = 0; r < 4; ++r) {
                double v = u[static_cast<size_t>(r)];
                for (int c = 0; c < 4; ++c)
                    v += t[static_cast<size_t>(r)][static_cast<size_t>(c)] *
                         y[static_cast<size_t>(c)];
                row[static_cast<size_t>(r)] = v;
            }
            y2.push_back(row);
        }
        const CovStats s2 = covariance_stats(image_from_samples(xs, 1),
                                             image_from_samples(y2, 4), MaskMode::full_frame);
        CHECK(std::fabs(invariant_loss(s2) - loss0) < 1e-8);
    }
}

TEST_CASE("zero loss characterizes a vanishing fit residual") {
    Rng rng(9001);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> ms;
        std::vector<std::vector<double>> fs;
        const bool exact = trial % 2 == 0;
        for (int i = 0; i < 150; ++i) {
            ms.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1)});
            const double noise = exact ? 0.0 : rng.uniform(-0.2, 0.2);
            fs.push_back({0.4 * ms.back()[1] - 0.3 * ms.back()[3] + 0.2 + noise});
        }
        const CovStats s = covariance_stats(image_from_samples(fs, 1), image_from_samples(ms, 4),
                                            MaskMode::full_frame);
        const double loss = invariant_loss(s);
        const AffineFit fit = fit_affine(s);
        double residual_var = 0.0;
        for (size_t i = 0; i < ms.size(); ++i) {
            double r = fit.b[0] - fs[i][0];
            for (int c = 0; c < 4; ++c) r += fit.a(0, c) * ms[i][static_cast<size_t>(c)];
            residual_var += r * r / static_cast<double>(ms.size());
        }
        const double var_f = s.c_xx(0, 0);
        if (exact) {
            CHECK(loss < 1e-9);
            CHECK(residual_var / var_f < 1e-9);
        } else {
            CHECK(loss > 1e-4);
            CHECK(residual_var / var_f > 1e-4);
            // the two quantities agree: loss = residual_var / var_f for n=1
            CHECK(loss == doctest::Approx(residual_var / var_f).epsilon(1e-6));
        }
    }
}

TEST_CASE("pose_loss is zero at the generator pose and grows away from it") {
    const Mesh mesh = make_box_car();
    const Pose pose{{150, 130}, {80, -25}, {0.25, 0.1}, 1600.0};
    const AttributeImage attrs = rasterize_attributes(mesh, pose, kCam);
    const Lighting light = make_lighting(0.4, 0.15, {0.3, -0.4, 0.85}, 0.25);
    const AttributeImage photo = shade(attrs, light);

    const double at_truth = pose_loss(photo, mesh, pose, kCam);
    CHECK(at_truth < 1e-6);

    Pose shifted = pose;
    shifted.mu.x += 0.1 * kCam.width;
    const double away = pose_loss(photo, mesh, shifted, kCam);
    CHECK(away > at_truth);

    // fully off-screen: too few pixels
    Pose off = pose;
    off.mu = {-5000, -5000};
    CHECK_THROWS_AS(pose_loss(photo, mesh, off, kCam), TooFewPixelsError);

    // constant photo: singular statistics
    AttributeImage flat(kCam.width, kCam.height, 1);
    std::fill(flat.mask.begin(), flat.mask.end(), uint8_t{1});
    std::fill(flat.data.begin(), flat.data.end(), 0.5);
    CHECK_THROWS_AS(pose_loss(flat, mesh, pose, kCam), SingularCovarianceError);

    // dimension mismatch
    AttributeImage small(10, 10, 1);
    CHECK_THROWS_AS(pose_loss(small, mesh, pose, kCam), ShapeError);
}

TEST_CASE("pose_loss is deterministic") {
    const Mesh mesh = make_sphere(1.0, 10, 16);
    const Pose pose{{160, 120}, {70, 5}, {0.2, 0.1}, kOrthographicF};
    const AttributeImage photo =
        shade(rasterize_attributes(mesh, pose, kCam), make_lighting(0.4, 0.18, {0, 0, 1}, 0.25));
    const double a = pose_loss(photo, mesh, pose, kCam);
    const double b = pose_loss(photo, mesh, pose, kCam);
    CHECK(a == b);
}
