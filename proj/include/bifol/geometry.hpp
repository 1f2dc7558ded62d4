#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "bifol/errors.hpp"

namespace bifol {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Fractional part in [0, 1).
inline double frac(double x) { return x - std::floor(x); }

// Reduce to the symmetric fundamental interval [-1/2, 1/2).
inline double wrap_half(double x) { return x - std::floor(x + 0.5); }

// Distance of x to the nearest integer.
inline double dist_to_integer(double x) { return std::abs(wrap_half(x)); }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double norm_inf(Vec2 v) { return std::max(std::abs(v.x), std::abs(v.y)); }

// Component-wise fractional part: the canonical torus representative.
inline Vec2 frac(Vec2 v) { return {frac(v.x), frac(v.y)}; }

// Shortest displacement from b to a on the torus.
inline Vec2 wrap_half(Vec2 v) { return {wrap_half(v.x), wrap_half(v.y)}; }

// Distance on T^2 with the flat metric.
inline double torus_distance(Vec2 a, Vec2 b) { return norm(wrap_half(a - b)); }

struct Mat2 {
    // Row-major: [[a, b], [c, d]].
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    double det() const { return a * d - b * c; }

    Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

// Solve M * s = rhs.  Caller is responsible for checking conditioning;
// an exactly singular matrix is a hard error.
inline Vec2 solve2x2(const Mat2& m, Vec2 rhs) {
    const double det = m.det();
    if (det == 0.0)
        throw argument_error("solve2x2: singular matrix");
    return {(rhs.x * m.d - m.b * rhs.y) / det, (m.a * rhs.y - rhs.x * m.c) / det};
}

// Element of GL2(Z): integer 2x2 matrix with determinant +-1.
struct IntMat2 {
    // Row-major: [[a, b], [c, d]].
    long long a = 1, b = 0, c = 0, d = 1;

    long long det() const { return a * d - b * c; }
    bool is_identity() const { return a == 1 && b == 0 && c == 0 && d == 1; }

    IntMat2 operator*(const IntMat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }

    bool operator==(const IntMat2& o) const {
        return a == o.a && b == o.b && c == o.c && d == o.d;
    }

    Vec2 operator*(Vec2 v) const {
        return {double(a) * v.x + double(b) * v.y, double(c) * v.x + double(d) * v.y};
    }

    Mat2 to_mat2() const { return {double(a), double(b), double(c), double(d)}; }

    // Exact inverse; requires |det| == 1.
    IntMat2 inverse() const {
        const long long dt = det();
        if (dt != 1 && dt != -1)
            throw argument_error("IntMat2::inverse: determinant must be +-1, got " +
                                 std::to_string(dt));
        return {d * dt, -b * dt, -c * dt, a * dt};
    }
};

// Checked GL2(Z) construction for mapping-class use.
inline IntMat2 make_unimodular(long long a, long long b, long long c, long long d) {
    IntMat2 m{a, b, c, d};
    if (std::llabs(m.det()) != 1)
        throw argument_error("integer matrix must have determinant +-1");
    return m;
}

// Element of P^+(R^2): an oriented direction.  psi and psi+pi are distinct.
class HalfLine {
public:
    explicit HalfLine(Vec2 v) {
        const double n = norm(v);
        if (!(n > 1e-300))
            throw argument_error("HalfLine: zero direction vector");
        d_ = {v.x / n, v.y / n};
    }
    static HalfLine from_angle(double psi) { return HalfLine({std::cos(psi), std::sin(psi)}); }
    static HalfLine from_slope(double slope) { return HalfLine({1.0, slope}); }

    Vec2 dir() const { return d_; }
    double angle() const {
        const double a = std::atan2(d_.y, d_.x);
        return a < 0.0 ? a + kTwoPi : a;  // [0, 2pi)
    }
    HalfLine reversed() const { return HalfLine(-d_); }

private:
    Vec2 d_;
};

// Angle in [0, pi] between two oriented directions; atan2-based, so it is
// well conditioned near 0 and pi.
inline double angular_distance(const HalfLine& a, const HalfLine& b) {
    const double c = dot(a.dir(), b.dir());
    const double s = cross(a.dir(), b.dir());
    return std::atan2(std::abs(s), c);
}

}  // namespace bifol
