#include "sdfplan/rigid.hpp"

#include <cmath>

namespace sdfplan {

Rigid Rigid::translation(const Eigen::Vector3d& t) {
    Rigid T;
    T.t = t;
    return T;
}

Rigid Rigid::rotation(const Eigen::Matrix3d& R) {
    Rigid T;
    T.R = R;
    return T;
}

Rigid Rigid::axis_angle(const Eigen::Vector3d& axis, double angle) {
    return rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
}

Rigid Rigid::from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
    const Eigen::Matrix3d R = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    return {R, xyz};
}

Eigen::Matrix3Xd Rigid::apply_inverse(const Eigen::Matrix3Xd& p) const {
    return R.transpose() * (p.colwise() - t);
}

Eigen::Matrix3Xd Rigid::apply(const Eigen::Matrix3Xd& p) const {
    return (R * p).colwise() + t;
}

Eigen::Matrix4d Rigid::matrix() const {
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    M.topLeftCorner<3, 3>() = R;
    M.topRightCorner<3, 1>() = t;
    return M;
}

bool Rigid::is_valid(double tol) const {
    if (!R.allFinite() || !t.allFinite()) return false;
    const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

}  // namespace sdfplan
