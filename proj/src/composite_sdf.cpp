#include "sdfplan/composite_sdf.hpp"

#include <limits>

#include "sdfplan/errors.hpp"

namespace sdfplan {

namespace {

MinDistance reduce_min(const Eigen::MatrixXd& per_link) {
    MinDistance out;
    const Eigen::Index n = per_link.cols();
    out.d = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    out.link = Eigen::VectorXi::Constant(n, -1);
    for (Eigen::Index k = 0; k < per_link.rows(); ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            if (per_link(k, i) < out.d[i]) {
                out.d[i] = per_link(k, i);
                out.link[i] = static_cast<int>(k);
            }
    return out;
}

}  // namespace

CompositeSdf::CompositeSdf(RobotModel model, std::vector<MlpSdf> nets) : model_(std::move(model)), nets_(std::move(nets)) {
    if (nets_.size() != model_.num_links())
        throw InputError("CompositeSdf: " + std::to_string(nets_.size()) + " networks for " +
                         std::to_string(model_.num_links()) + " links");
}

CompositeSdf CompositeSdf::load(RobotModel model, const std::filesystem::path& dir) {
    std::vector<MlpSdf> nets;
    for (const auto& link : model.links()) nets.push_back(MlpSdf::load(dir / (link.name + ".sdfnet")));
    return CompositeSdf(std::move(model), std::move(nets));
}

Eigen::MatrixXd CompositeSdf::per_link(const LinkPoseSet& poses, const Eigen::Matrix3Xd& world) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(nets_.size()), world.cols());
    for (std::size_t k = 0; k < nets_.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = nets_[k].evaluate_clamped(world_to_link(poses, k, world)).transpose();
    return out;
}

MinDistance composite_min_distance(const CompositeSdf& sdf, const LinkPoseSet& poses, const Eigen::Matrix3Xd& world) {
    return reduce_min(sdf.per_link(poses, world));
}

MinDistance composite_min_distance(const CompositeSdf& sdf, const Eigen::Ref<const Eigen::VectorXd>& q,
                                   const Eigen::Matrix3Xd& world) {
    return composite_min_distance(sdf, forward_kinematics(sdf.model(), q), world);
}

ExactComposite::ExactComposite(RobotModel model, std::vector<MeshSdf> meshes)
    : model_(std::move(model)), meshes_(std::move(meshes)) {
    if (meshes_.size() != model_.num_links())
        throw InputError("ExactComposite: " + std::to_string(meshes_.size()) + " meshes for " +
                         std::to_string(model_.num_links()) + " links");
}

ExactComposite ExactComposite::load(RobotModel model) {
    std::vector<MeshSdf> meshes;
    for (const auto& link : model.links()) {
        if (!link.mesh) throw InputError("missing mesh for link '" + link.name + "'");
        meshes.emplace_back(load_mesh(*link.mesh).mesh);
    }
    return ExactComposite(std::move(model), std::move(meshes));
}

MinDistance exact_composite_min_distance(const ExactComposite& robot, const LinkPoseSet& poses,
                                         const Eigen::Matrix3Xd& world) {
    Eigen::MatrixXd per(static_cast<Eigen::Index>(robot.meshes().size()), world.cols());
    for (std::size_t k = 0; k < robot.meshes().size(); ++k)
        per.row(static_cast<Eigen::Index>(k)) =
            exact_signed_distance(robot.meshes()[k], world_to_link(poses, k, world)).d.transpose();
    return reduce_min(per);
}

MinDistance exact_composite_min_distance(const ExactComposite& robot, const Eigen::Ref<const Eigen::VectorXd>& q,
                                         const Eigen::Matrix3Xd& world) {
    return exact_composite_min_distance(robot, forward_kinematics(robot.model(), q), world);
}

}  // namespace sdfplan
