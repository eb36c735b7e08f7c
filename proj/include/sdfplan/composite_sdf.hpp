#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/mesh_sdf.hpp"
#include "sdfplan/mlp.hpp"
#include "sdfplan/robot_model.hpp"

namespace sdfplan {

struct MinDistance {
    Eigen::VectorXd d;       // minimum over links per point
    Eigen::VectorXi link;    // argmin; ties go to the lower link index
};

/// One network per link of a robot, each queried in its link's canonical frame.
class CompositeSdf {
public:
    CompositeSdf() = default;
    CompositeSdf(RobotModel model, std::vector<MlpSdf> nets);

    /// Loads <dir>/<link name>.sdfnet for every link of the model.
    static CompositeSdf load(RobotModel model, const std::filesystem::path& dir);

    const RobotModel& model() const { return model_; }
    const std::vector<MlpSdf>& nets() const { return nets_; }

    /// Distances of world points to every link at a known pose set; K x N.
    Eigen::MatrixXd per_link(const LinkPoseSet& poses, const Eigen::Matrix3Xd& world) const;

private:
    RobotModel model_;
    std::vector<MlpSdf> nets_;
};

/// Minimum learned distance from each world point to the robot at q. One
/// forward-kinematics evaluation per call regardless of batch size.
MinDistance composite_min_distance(const CompositeSdf& sdf, const Eigen::Ref<const Eigen::VectorXd>& q,
                                   const Eigen::Matrix3Xd& world);
MinDistance composite_min_distance(const CompositeSdf& sdf, const LinkPoseSet& poses, const Eigen::Matrix3Xd& world);

/// Ground-truth counterpart built on the per-link mesh oracles.
class ExactComposite {
public:
    ExactComposite() = default;
    ExactComposite(RobotModel model, std::vector<MeshSdf> meshes);
    /// Loads every link's mesh from the paths in the robot description.
    static ExactComposite load(RobotModel model);

    const RobotModel& model() const { return model_; }
    const std::vector<MeshSdf>& meshes() const { return meshes_; }

private:
    RobotModel model_;
    std::vector<MeshSdf> meshes_;
};

MinDistance exact_composite_min_distance(const ExactComposite& robot, const Eigen::Ref<const Eigen::VectorXd>& q,
                                         const Eigen::Matrix3Xd& world);
MinDistance exact_composite_min_distance(const ExactComposite& robot, const LinkPoseSet& poses,
                                         const Eigen::Matrix3Xd& world);

}  // namespace sdfplan
