#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sdfplan {

/// Rigid transform stored as rotation matrix + translation. The inverse is a
/// transpose-and-negate, so world-to-link queries never invert a 4x4 matrix.
struct Rigid {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    static Rigid identity() { return {}; }
    static Rigid translation(const Eigen::Vector3d& t);
    static Rigid rotation(const Eigen::Matrix3d& R);
    static Rigid axis_angle(const Eigen::Vector3d& axis, double angle);
    /// URDF-style fixed-axis roll/pitch/yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
    static Rigid from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy);

    Rigid operator*(const Rigid& o) const { return {R * o.R, R * o.t + t}; }
    Rigid inverse() const { return {R.transpose(), -(R.transpose() * t)}; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return R * p + t; }
    Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const { return R.transpose() * (p - t); }

    /// p is 3xN; returns R^T (p - t) column-wise.
    Eigen::Matrix3Xd apply_inverse(const Eigen::Matrix3Xd& p) const;
    Eigen::Matrix3Xd apply(const Eigen::Matrix3Xd& p) const;

    Eigen::Matrix4d matrix() const;

    // orthonormal rotation with det +1, within tol
    bool is_valid(double tol = 1e-9) const;
};

}  // namespace sdfplan
