#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>

namespace visenv {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Position plus unit-quaternion orientation (local-to-world).
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Vec3 apply(const Vec3& local) const { return orientation * local + position; }

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
  }
};

// Euler angles in degrees, applied intrinsic yaw (Y), then pitch (X), then roll (Z).
inline Quat quat_from_euler_deg(const Vec3& euler_deg) {
  const Quat yaw(Eigen::AngleAxisd(deg_to_rad(euler_deg.y()), Vec3::UnitY()));
  const Quat pitch(Eigen::AngleAxisd(deg_to_rad(euler_deg.x()), Vec3::UnitX()));
  const Quat roll(Eigen::AngleAxisd(deg_to_rad(euler_deg.z()), Vec3::UnitZ()));
  return (yaw * pitch * roll).normalized();
}

// Exact rotation by a constant world-frame angular velocity over dt.
inline Quat integrate_rotation(const Quat& q, const Vec3& omega, double dt) {
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return q;
  const Quat delta(Eigen::AngleAxisd(angle, omega.normalized()));
  return (delta * q).normalized();
}

// Normalized linear quaternion interpolation along the shorter arc.
inline Quat nlerp(const Quat& a, const Quat& b, double s) {
  Eigen::Vector4d bc = b.coeffs();
  if (a.coeffs().dot(bc) < 0.0) bc = -bc;
  const Eigen::Vector4d mixed = (1.0 - s) * a.coeffs() + s * bc;
  Quat out;
  out.coeffs() = mixed.normalized();
  return out;
}

// Angle of the relative rotation between two orientations, in [0, pi].
inline double rotation_distance(const Quat& a, const Quat& b) {
  const double d = std::min(1.0, std::abs(a.coeffs().dot(b.coeffs())));
  return 2.0 * std::acos(d);
}

// Rounds half away from zero; the single rounding rule used for every byte view.
inline double round_half_away(double v) { return std::round(v); }

inline std::uint8_t clamp_to_byte(double v) {
  const double r = round_half_away(v);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

}  // namespace visenv
