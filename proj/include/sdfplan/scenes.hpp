#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/composite_sdf.hpp"
#include "sdfplan/planner.hpp"

namespace sdfplan {

struct Circle {
    Eigen::Vector2d center;
    double radius = 0.0;
};

struct Box2 {
    Eigen::Vector2d center;
    Eigen::Vector2d half_extents;
};

/// Simple polygon given as a vertex loop (either orientation, may be concave).
struct Polygon {
    std::vector<Eigen::Vector2d> vertices;
};

using Primitive2D = std::variant<Circle, Box2, Polygon>;

double signed_distance(const Circle& c, const Eigen::Vector2d& p);
double signed_distance(const Box2& b, const Eigen::Vector2d& p);
double signed_distance(const Polygon& poly, const Eigen::Vector2d& p);
double signed_distance(const Primitive2D& prim, const Eigen::Vector2d& p);

struct Scene2D {
    std::string name;
    Eigen::Vector2d bounds_min = Eigen::Vector2d::Zero();
    Eigen::Vector2d bounds_max = Eigen::Vector2d::Ones();
    std::vector<Primitive2D> obstacles;
    Eigen::Vector2d start = Eigen::Vector2d::Zero();
    Eigen::Vector2d goal = Eigen::Vector2d::Ones();

    void validate() const;
};

/// Minimum signed distance over all obstacles; +infinity for an empty scene.
double scene2d_distance(const Scene2D& scene, const Eigen::Vector2d& p);

class Scene2dChecker : public DistanceChecker {
public:
    explicit Scene2dChecker(Scene2D scene) : scene_(std::move(scene)) {}
    Eigen::Index dims() const override { return 2; }
    Eigen::VectorXd distances(const Eigen::MatrixXd& states) const override;
    const Scene2D& scene() const { return scene_; }

private:
    Scene2D scene_;
};

struct Sphere {
    Eigen::Vector3d center;
    double radius = 0.0;
};

/// Box surface covered by spheres: every face is split into square-ish patches
/// no larger than resolution, and each patch gets the sphere through its corners.
std::vector<Sphere> box_to_spheres(const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents,
                                   double resolution);

struct Scene3D {
    std::string name;
    std::vector<Sphere> spheres;
    Eigen::VectorXd start_q;
    Eigen::VectorXd goal_q;
    double z_floor = 0.02;

    void validate() const;
    /// Checks start and goal against the robot's dimension and joint limits.
    void validate(const RobotModel& model) const;
};

/// Clearance of the robot at q from every obstacle sphere, min over spheres
/// of (composite distance to the center - radius). Works with learned or
/// exact per-link distances.
class Scene3dChecker : public DistanceChecker {
public:
    Scene3dChecker(Scene3D scene, const CompositeSdf& sdf);
    Scene3dChecker(Scene3D scene, const ExactComposite& exact);

    Eigen::Index dims() const override;
    Eigen::VectorXd distances(const Eigen::MatrixXd& states) const override;
    const Scene3D& scene() const { return scene_; }

    /// Link/point pairs whose bounding-sphere lower bound exceeds this margin
    /// report the lower bound instead of a network or mesh query. The value
    /// only matters when it is below the planner's clearance threshold.
    void set_far_field_margin(double m) { far_margin_ = m; }

private:
    Eigen::VectorXd link_distances(std::size_t k, const Eigen::Matrix3Xd& local) const;

    Scene3D scene_;
    const CompositeSdf* sdf_ = nullptr;
    const ExactComposite* exact_ = nullptr;
    const RobotModel* model_ = nullptr;
    std::vector<double> bound_radius_;
    double far_margin_ = std::numeric_limits<double>::infinity();
};

std::string serialize_scene2d(const Scene2D& scene);
Scene2D parse_scene2d(const std::string& text);
Scene2D load_scene2d(const std::filesystem::path& path);

std::string serialize_scene3d(const Scene3D& scene);
Scene3D parse_scene3d(const std::string& text);
Scene3D load_scene3d(const std::filesystem::path& path);

}  // namespace sdfplan
