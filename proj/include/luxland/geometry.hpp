#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace luxland {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle to [-pi, pi). Identity (bit-exact) for in-range inputs.
inline double wrap_pi(double a) {
    if (a >= -kPi && a < kPi) return a;
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

// Wraps an angle to [0, 2*pi).
inline double wrap_two_pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a;
}

// Rotation of a body-frame vector into the world frame by drone yaw.
inline Vec3 rotate_z(const Vec3& v, double yaw) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

inline double horizontal_distance(const Vec3& a, const Vec3& b) {
    return (a.head<2>() - b.head<2>()).norm();
}

// Position plus heading; the full drone state is owned by the dynamics module.
struct Pose {
    Vec3 position{0.0, 0.0, 0.0};
    double yaw = 0.0;
};

}  // namespace luxland
