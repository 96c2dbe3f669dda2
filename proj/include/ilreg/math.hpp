#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ilreg/error.hpp"

namespace ilreg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // z-component of the 3D cross product of the embedded vectors
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec2 xy() const { return {x, y}; }
};

inline Vec3 normalized(const Vec3& v) {
    const double n = v.norm();
    return n > 0.0 ? v / n : v;
}

// Row-major 3x3 matrix; enough for rigid rotations.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }
    double& operator()(int r, int c) { return m[static_cast<size_t>(3 * r + c)]; }

    static Mat3 identity() { return {}; }

    // Matrix whose columns are the given vectors.
    static Mat3 from_columns(const Vec3& a, const Vec3& b, const Vec3& c) {
        Mat3 r;
        r.m = {a.x, b.x, c.x, a.y, b.y, c.y, a.z, b.z, c.z};
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
};

// Small dense row-major matrix. Covariance blocks here are at most a handful
// of channels wide, so a plain O(n^3) Gauss-Jordan path is all we need.
class MatX {
public:
    MatX() = default;
    MatX(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows * cols), 0.0) {
        assert(rows >= 0 && cols >= 0);
    }

    static MatX identity(int n) {
        MatX r(n, n);
        for (int i = 0; i < n; ++i) r(i, i) = 1.0;
        return r;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double operator()(int r, int c) const { return a_[static_cast<size_t>(r * cols_ + c)]; }
    double& operator()(int r, int c) { return a_[static_cast<size_t>(r * cols_ + c)]; }

    MatX operator*(const MatX& o) const {
        if (cols_ != o.rows_) throw ShapeError("matrix product dimension mismatch");
        MatX r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }

    MatX operator+(const MatX& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matrix sum dimension mismatch");
        MatX r = *this;
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
        return r;
    }

    MatX transposed() const {
        MatX r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    double trace() const {
        double s = 0.0;
        const int n = rows_ < cols_ ? rows_ : cols_;
        for (int i = 0; i < n; ++i) s += (*this)(i, i);
        return s;
    }

    // Max absolute row sum.
    double norm_inf() const {
        double best = 0.0;
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += std::fabs((*this)(i, j));
            if (s > best) best = s;
        }
        return best;
    }

    bool finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

// Gauss-Jordan inverse with partial pivoting. Returns false when a pivot
// degenerates instead of throwing, so callers can attach context.
inline bool try_invert(const MatX& in, MatX& out) {
    const int n = in.rows();
    if (n != in.cols()) throw ShapeError("inverse of non-square matrix");
    MatX a = in;
    MatX inv = MatX::identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::fabs(a(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best)) return false;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(pivot, j), a(col, j));
                std::swap(inv(pivot, j), inv(col, j));
            }
        }
        const double d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    if (!inv.finite()) return false;
    out = inv;
    return true;
}

// Condition number estimate in the infinity norm.
inline double condition_inf(const MatX& a, const MatX& a_inv) {
    return a.norm_inf() * a_inv.norm_inf();
}

}  // namespace ilreg
