#pragma once

// Frame convention used throughout: the LiDAR sits at the world origin,
// x forward (LiDAR boresight), y left, z up. Angles in the public API are
// degrees; internal trigonometry is radians.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "leafscope/error.hpp"

namespace leafscope {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    constexpr double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
    bool is_unit(double tol = 1e-12) const { return std::abs(norm() - 1.0) <= tol; }

    /// Throws DegenerateGeometry for a (near) zero vector.
    Vec3 normalized() const {
        const double n = norm();
        if (!(n > 1e-15)) throw DegenerateGeometry("cannot normalize a zero-length vector");
        return *this / n;
    }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Angle between two non-zero vectors in radians, stable near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

struct RigPose {
    Vec3 lidar_origin{};
    Vec3 camera_position{0.0, 0.1, -0.1};
    Vec3 mirror_position{0.0, 0.0, -0.1};
    Vec3 mirror_default_normal{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0, 0.0};

    /// Unit direction from the mirror toward the camera.
    Vec3 to_camera() const { return (camera_position - mirror_position).normalized(); }
    /// Direction of the optical axis after the fold at the default mirror pose.
    Vec3 boresight() const;
};

struct EulerPair {
    double pitch = 0.0;  // degrees, positive tilts the normal up
    double yaw = 0.0;    // degrees, positive turns the normal left (counter-clockwise about z)
};

/// Proper rotation stored as a row-major 3x3 matrix.
class Rotation {
public:
    Rotation() = default;

    static Rotation identity() { return Rotation{}; }

    /// Rodrigues construction; `axis` must be unit length.
    static Rotation from_axis_angle(const Vec3& axis, double angle_rad) {
        const double c = std::cos(angle_rad);
        const double s = std::sin(angle_rad);
        const double t = 1.0 - c;
        const auto [x, y, z] = std::array{axis.x, axis.y, axis.z};
        Rotation r;
        r.m_ = {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
                t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
                t * x * z - s * y, t * y * z + s * x, t * z * z + c};
        return r;
    }

    Vec3 apply(const Vec3& v) const {
        return {m_[0] * v.x + m_[1] * v.y + m_[2] * v.z, m_[3] * v.x + m_[4] * v.y + m_[5] * v.z,
                m_[6] * v.x + m_[7] * v.y + m_[8] * v.z};
    }

    /// (a * b).apply(v) == a.apply(b.apply(v))
    Rotation operator*(const Rotation& o) const {
        Rotation r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += m_[3 * i + k] * o.m_[3 * k + j];
                r.m_[3 * i + j] = acc;
            }
        return r;
    }

    Rotation inverse() const {
        Rotation r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m_[3 * i + j] = m_[3 * j + i];
        return r;
    }

    /// Rotation angle in radians, in [0, pi].
    double angle() const {
        const Vec3 skew{m_[7] - m_[5], m_[2] - m_[6], m_[3] - m_[1]};
        const double trace = m_[0] + m_[4] + m_[8];
        return std::atan2(skew.norm() / 2.0, (trace - 1.0) / 2.0);
    }

    /// Unit rotation axis; meaningless for angle() near 0 or pi.
    Vec3 axis() const {
        const Vec3 skew{m_[7] - m_[5], m_[2] - m_[6], m_[3] - m_[1]};
        return skew.normalized();
    }

    /// Largest absolute deviation from the identity matrix.
    double distance_from_identity() const {
        double worst = 0.0;
        for (int i = 0; i < 9; ++i) {
            const double ident = (i % 4 == 0) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(m_[i] - ident));
        }
        return worst;
    }

    const std::array<double, 9>& matrix() const { return m_; }

private:
    std::array<double, 9> m_{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

inline constexpr double kAntiParallelTol = 1e-9;
inline constexpr double kGimbalTolRad = 1e-6;

/// Unit vector making equal angles with `u` and `v`.
inline Vec3 bisector(const Vec3& u, const Vec3& v) {
    const Vec3 sum = u + v;
    if (!(sum.norm() > kAntiParallelTol)) throw DegenerateBisector();
    return sum.normalized();
}

/// Minimal-angle rotation carrying `from` onto `to`.
inline Rotation rotation_between(const Vec3& from, const Vec3& to) {
    if (!((from + to).norm() > kAntiParallelTol)) throw DegenerateRotation();
    const Vec3 axis = from.cross(to);
    const double s = axis.norm();
    if (s < 1e-15) return Rotation::identity();
    return Rotation::from_axis_angle(axis / s, std::atan2(s, from.dot(to)));
}

/// Orthonormal frame attached to the mirror's rest pose: `forward` is the
/// default normal, `left` is horizontal, `up` completes a right-handed set.
struct MirrorFrame {
    Vec3 forward;
    Vec3 left;
    Vec3 up;
};

inline MirrorFrame mirror_frame(const Vec3& default_normal) {
    const Vec3 world_up{0.0, 0.0, 1.0};
    const Vec3 l = world_up.cross(default_normal);
    if (l.norm() < std::sin(kGimbalTolRad))
        throw GimbalDegenerate("default mirror normal is vertical; yaw axis undefined");
    const Vec3 left = l.normalized();
    return {default_normal, left, default_normal.cross(left)};
}

/// Normal obtained by yawing the default normal about the vertical axis and
/// then pitching it about the rotated transverse axis.
inline Vec3 euler_to_normal(const EulerPair& e, const Vec3& default_normal) {
    const MirrorFrame f = mirror_frame(default_normal);
    const double p = deg2rad(e.pitch);
    const double y = deg2rad(e.yaw);
    return f.forward * (std::cos(p) * std::cos(y)) + f.left * (std::cos(p) * std::sin(y)) +
           f.up * std::sin(p);
}

/// Yaw/pitch of the image of `default_normal` under `r`.
inline EulerPair rotation_to_euler(const Rotation& r, const Vec3& default_normal) {
    const MirrorFrame f = mirror_frame(default_normal);
    const Vec3 n = r.apply(default_normal);
    const double a = n.dot(f.forward);
    const double b = n.dot(f.left);
    const double c = n.dot(f.up);
    const double horiz = std::hypot(a, b);
    if (std::atan2(horiz, std::abs(c)) < kGimbalTolRad) throw GimbalDegenerate();
    return {rad2deg(std::atan2(c, horiz)), rad2deg(std::atan2(b, a))};
}

/// Mirror reflection of a direction about a plane with unit normal `normal`.
inline Vec3 reflect(const Vec3& incident, const Vec3& normal) {
    return incident - normal * (2.0 * incident.dot(normal));
}

inline Vec3 RigPose::boresight() const {
    return reflect(-to_camera(), mirror_default_normal);
}

}  // namespace leafscope
