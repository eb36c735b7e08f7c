#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/rigid.hpp"

namespace sdfplan {

enum class JointKind { Revolute, Prismatic, Fixed };

struct JointSpec {
    JointKind kind = JointKind::Fixed;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    Rigid origin;  // parent link frame -> this link frame at q = 0
    double lower = 0.0;
    double upper = 0.0;
    double vel_limit = 1.0;
    double acc_limit = 1.0;

    bool moving() const { return kind != JointKind::Fixed; }
    Rigid motion(double q) const;
};

struct Link {
    std::string name;
    JointSpec joint;
    std::optional<std::filesystem::path> mesh;  // resolved against the description's directory
};

/// Serial kinematic chain. Link k's parent is link k-1; link 0 is attached to
/// the world. Immutable after construction.
class RobotModel {
public:
    RobotModel() = default;
    RobotModel(std::string name, std::vector<Link> links, double timing_limit_scale = 1.0);

    const std::string& name() const { return name_; }
    const std::vector<Link>& links() const { return links_; }
    const Link& link(std::size_t k) const { return links_.at(k); }
    std::size_t num_links() const { return links_.size(); }
    std::size_t n_dof() const { return dof_links_.size(); }

    /// Index into q for link k's joint, or -1 for fixed joints.
    int dof_index(std::size_t k) const { return dof_of_link_.at(k); }
    /// Links whose pose depends on at least one joint value.
    bool depends_on_q(std::size_t k) const;
    std::optional<std::size_t> find_link(std::string_view name) const;

    Eigen::VectorXd lower_limits() const;
    Eigen::VectorXd upper_limits() const;
    Eigen::VectorXd vel_limits() const;
    Eigen::VectorXd acc_limits() const;
    /// Fraction of the joint limits used for time parameterization.
    double timing_limit_scale() const { return timing_limit_scale_; }

private:
    std::string name_;
    std::vector<Link> links_;
    std::vector<std::size_t> dof_links_;
    std::vector<int> dof_of_link_;
    double timing_limit_scale_ = 1.0;
};

struct LinkPoseSet {
    std::vector<Rigid> poses;          // world-from-link, one per link
    std::vector<std::size_t> out_of_limits;  // dof indices outside [lower, upper]
};

/// Parses a robot description document (JSON, format "sdfplan-robot", version 1).
/// Mesh paths are resolved against base_dir.
RobotModel parse_robot(std::string_view text, const std::filesystem::path& base_dir = {});
RobotModel load_robot(const std::filesystem::path& path);

LinkPoseSet forward_kinematics(const RobotModel& model, const Eigen::Ref<const Eigen::VectorXd>& q);

/// Maps a 3xN batch of world points into link k's canonical frame.
Eigen::Matrix3Xd world_to_link(const LinkPoseSet& poses, std::size_t k, const Eigen::Matrix3Xd& p);

}  // namespace sdfplan
