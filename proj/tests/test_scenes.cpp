#include <cmath>
#include <limits>
#include <doctest.h>
#include "sdfplan/composite_sdf.hpp"
#include "sdfplan/errors.hpp"
#include "sdfplan/robot_model.hpp"
#include "sdfplan/scenes.hpp"
#include "support.hpp"

using namespace sdfplan;
using testing::Gen;

namespace {

// Boundary loop of a primitive as a closed vertex list.
std::vector<Eigen::Vector2d> outline(const Primitive2D& prim) {
    if (const auto* b = std::get_if<Box2>(&prim)) {
        const Eigen::Vector2d c = b->center, h = b->half_extents;
        return {c + Eigen::Vector2d(-h.x(), -h.y()), c + Eigen::Vector2d(h.x(), -h.y()),
                c + Eigen::Vector2d(h.x(), h.y()), c + Eigen::Vector2d(-h.x(), h.y())};
    }
    return std::get<Polygon>(prim).vertices;
}

// Dense boundary samples of every obstacle, about n in total.
std::vector<Eigen::Vector2d> boundary_samples(const Scene2D& scene, int n) {
    double perimeter = 0;
    for (const auto& prim : scene.obstacles) {
        if (const auto* c = std::get_if<Circle>(&prim)) {
            perimeter += 2 * M_PI * c->radius;
            continue;
        }
        const auto v = outline(prim);
        for (std::size_t i = 0; i < v.size(); ++i) perimeter += (v[(i + 1) % v.size()] - v[i]).norm();
    }
    const double step = perimeter / n;
    std::vector<Eigen::Vector2d> out;
    for (const auto& prim : scene.obstacles) {
        if (const auto* c = std::get_if<Circle>(&prim)) {
            const int k = static_cast<int>(std::ceil(2 * M_PI * c->radius / step));
            for (int i = 0; i < k; ++i) {
                const double a = 2 * M_PI * i / k;
                out.push_back(c->center + c->radius * Eigen::Vector2d(std::cos(a), std::sin(a)));
            }
            continue;
        }
        const auto v = outline(prim);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Eigen::Vector2d a = v[i], b = v[(i + 1) % v.size()];
            const int k = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
            for (int j = 0; j < k; ++j) out.push_back(a + (b - a) * (double(j) / k));
        }
    }
    return out;
}

// Even-odd ray cast, independent of the library's winding rule.
bool inside(const Primitive2D& prim, const Eigen::Vector2d& p) {
    if (const auto* c = std::get_if<Circle>(&prim)) return (p - c->center).norm() < c->radius;
    const auto v = outline(prim);
    bool in = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y() > p.y()) != (v[j].y() > p.y()) &&
            p.x() < (v[j].x() - v[i].x()) * (p.y() - v[i].y()) / (v[j].y() - v[i].y()) + v[i].x())
            in = !in;
    }
    return in;
}

double brute_force_distance(const Scene2D& scene, const std::vector<Eigen::Vector2d>& samples,
                            const Eigen::Vector2d& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) best = std::min(best, (s - p).squaredNorm());
    bool in = false;
    for (const auto& prim : scene.obstacles) in = in || inside(prim, p);
    return in ? -std::sqrt(best) : std::sqrt(best);
}

Scene3D empty_arm_scene(const RobotModel& model) {
    Scene3D s;
    s.name = "probe";
    s.start_q = 0.5 * (model.lower_limits() + model.upper_limits());
    s.goal_q = s.start_q;
    return s;
}

}  // namespace

TEST_SUITE("scenes") {

TEST_CASE("circle and box distances") {
    CHECK(signed_distance(Circle{{0, 0}, 0.1}, Eigen::Vector2d(0.3, 0)) == doctest::Approx(0.2).epsilon(1e-15));
    const Box2 box{{0, 0}, {0.2, 0.1}};
    CHECK(signed_distance(box, Eigen::Vector2d(0.15, 0.02)) == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(signed_distance(box, Eigen::Vector2d(-0.01, -0.07)) == doctest::Approx(-0.03).epsilon(1e-12));
    CHECK(signed_distance(box, Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(std::hypot(0.3, 0.4)).epsilon(1e-12));
}

TEST_CASE("empty scene is infinitely far") {
    Scene2D s;
    CHECK(std::isinf(scene2d_distance(s, Eigen::Vector2d(0.5, 0.5))));
}

TEST_CASE("fixture distances match dense boundary sampling") {
    for (const char* name : {"concave_trap", "narrow_gap", "pillar_field", "thin_wall"}) {
        CAPTURE(name);
        const Scene2D scene = load_scene2d(testing::data_dir() / "scenes/2d" / (std::string(name) + ".json"));
        const auto samples = boundary_samples(scene, 100000);
        Gen g(11);
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            // half the points near the obstacles, where the sign matters
            Eigen::Vector2d p(g.uniform(0, 1), g.uniform(0, 1));
            if (i % 2) p = samples[static_cast<std::size_t>(g.integer(0, static_cast<int>(samples.size()) - 1))] +
                           Eigen::Vector2d(g.uniform(-0.02, 0.02), g.uniform(-0.02, 0.02));
            worst = std::max(worst, std::abs(scene2d_distance(scene, p) - brute_force_distance(scene, samples, p)));
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("pocket of the concave trap is outside") {
    const Scene2D scene = load_scene2d(testing::data_dir() / "scenes/2d/concave_trap.json");
    const Eigen::Vector2d pocket(0.49, 0.5);
    const double d = scene2d_distance(scene, pocket);
    CHECK(d > 0);
    CHECK(d == doctest::Approx(brute_force_distance(scene, boundary_samples(scene, 100000), pocket)).epsilon(1e-3));
}

TEST_CASE("scene files round trip exactly") {
    for (const char* name : {"concave_trap", "narrow_gap", "pillar_field", "thin_wall"}) {
        const Scene2D a = load_scene2d(testing::data_dir() / "scenes/2d" / (std::string(name) + ".json"));
        const std::string text = serialize_scene2d(a);
        const Scene2D b = parse_scene2d(text);
        CHECK(serialize_scene2d(b) == text);
        REQUIRE(a.obstacles.size() == b.obstacles.size());
        Gen g(3);
        for (int i = 0; i < 200; ++i) {
            const Eigen::Vector2d p(g.uniform(0, 1), g.uniform(0, 1));
            CHECK(scene2d_distance(a, p) == scene2d_distance(b, p));
        }
        CHECK(a.start == b.start);
        CHECK(a.goal == b.goal);
    }
    for (const char* name : {"box_on_table", "sphere_cluster", "two_boxes"}) {
        const Scene3D a = load_scene3d(testing::data_dir() / "scenes/arm" / (std::string(name) + ".json"));
        const Scene3D b = parse_scene3d(serialize_scene3d(a));
        REQUIRE(a.spheres.size() == b.spheres.size());
        for (std::size_t i = 0; i < a.spheres.size(); ++i) {
            CHECK(a.spheres[i].center == b.spheres[i].center);
            CHECK(a.spheres[i].radius == b.spheres[i].radius);
        }
        CHECK(a.start_q == b.start_q);
        CHECK(a.goal_q == b.goal_q);
        CHECK(a.z_floor == b.z_floor);
    }
}

TEST_CASE("invalid scenes are rejected") {
    const std::string head = R"({"format":"sdfplan-scene2d","version":1,"bounds":[0,0,1,1],)";
    CHECK_THROWS_AS(parse_scene2d(head + R"("start":[0.5,0.5],"goal":[0.9,0.9],"obstacles":[{"type":"circle","center":[0.5,0.5],"radius":0.1}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_scene2d(head + R"("start":[1.5,0.5],"goal":[0.9,0.9],"obstacles":[]})"), InputError);
    CHECK_THROWS_AS(parse_scene2d("{"), InputError);
}

TEST_CASE("box surface is covered by its spheres") {
    const Eigen::Vector3d c(0.1, -0.2, 0.3), h(0.15, 0.05, 0.22);
    const double res = 0.04;
    const auto spheres = box_to_spheres(c, h, res);
    REQUIRE(!spheres.empty());
    for (const auto& s : spheres) CHECK(s.radius <= res / std::sqrt(2.0) + 1e-12);
    Gen g(5);
    for (int i = 0; i < 2000; ++i) {
        Eigen::Vector3d p = g.between(c - h, c + h);
        const int axis = g.integer(0, 2);
        p[axis] = c[axis] + (g.integer(0, 1) ? h[axis] : -h[axis]);
        bool covered = false;
        for (const auto& s : spheres) covered = covered || (p - s.center).norm() <= s.radius + 1e-12;
        CHECK(covered);
    }
}

TEST_CASE("arm checker: far sphere, sphere on the surface, monotone under removal") {
    const RobotModel model = load_robot(testing::data_dir() / "robots/panda_like.json");
    const ExactComposite exact = ExactComposite::load(model);
    const CompositeSdf nets = CompositeSdf::load(model, testing::data_dir() / "nets");
    Gen g(21);
    Eigen::MatrixXd Q(20, static_cast<Eigen::Index>(model.n_dof()));
    for (Eigen::Index i = 0; i < Q.rows(); ++i) Q.row(i) = g.between(model.lower_limits(), model.upper_limits()).transpose();

    SUBCASE("far sphere") {
        Scene3D s = empty_arm_scene(model);
        s.spheres.push_back({{3.0, 0.0, 0.5}, 0.1});
        const Eigen::VectorXd de = Scene3dChecker(s, exact).distances(Q);
        const Eigen::VectorXd dn = Scene3dChecker(s, nets).distances(Q);
        CHECK(de.minCoeff() > 1.5);
        CHECK(dn.minCoeff() > 1.5);
    }

    SUBCASE("sphere centered on a link surface") {
        const Eigen::VectorXd q = Q.row(0).transpose();
        const LinkPoseSet poses = forward_kinematics(model, q);
        const std::size_t k = 4;
        const TriMesh& mesh = exact.meshes()[k].mesh();
        Eigen::Vector3d center = Eigen::Vector3d::Zero();
        for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v) {
            // a vertex away from every other link, so this link is the minimum
            const Eigen::Vector3d w = poses.poses[k].apply(mesh.vertex(v));
            const MinDistance md = exact_composite_min_distance(exact, poses, w);
            if (md.link[0] != static_cast<int>(k)) continue;
            bool clear = true;
            for (std::size_t j = 0; j < model.num_links(); ++j)
                if (j != k) clear = clear && exact.meshes()[j].query(poses.poses[j].apply_inverse(w)).d > 0.05;
            if (clear) {
                center = w;
                break;
            }
        }
        REQUIRE(center.norm() > 0);
        Scene3D s = empty_arm_scene(model);
        s.spheres.push_back({center, 0.05});
        const Eigen::MatrixXd one = q.transpose();
        CHECK(Scene3dChecker(s, exact).distances(one)[0] == doctest::Approx(-0.05).epsilon(1e-9));
        CHECK(std::abs(Scene3dChecker(s, nets).distances(one)[0] + 0.05) <= 0.01);
    }

    SUBCASE("removing an obstacle never decreases clearance") {
        const Scene3D full = load_scene3d(testing::data_dir() / "scenes/arm/box_on_table.json");
        const Eigen::VectorXd before = Scene3dChecker(full, exact).distances(Q);
        for (int trial = 0; trial < 5; ++trial) {
            Scene3D fewer = full;
            fewer.spheres.erase(fewer.spheres.begin() + g.integer(0, static_cast<int>(fewer.spheres.size()) - 1));
            const Eigen::VectorXd after = Scene3dChecker(fewer, exact).distances(Q);
            for (Eigen::Index i = 0; i < Q.rows(); ++i) CHECK(after[i] >= before[i]);
            const Eigen::VectorXd before_n = Scene3dChecker(full, nets).distances(Q);
            const Eigen::VectorXd after_n = Scene3dChecker(fewer, nets).distances(Q);
            for (Eigen::Index i = 0; i < Q.rows(); ++i) CHECK(after_n[i] >= before_n[i]);
        }
    }
}

TEST_CASE("2D checker matches the scene distance") {
    const Scene2D scene = load_scene2d(testing::data_dir() / "scenes/2d/pillar_field.json");
    const Scene2dChecker chk(scene);
    Gen g(8);
    Eigen::MatrixXd P(300, 2);
    for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) << g.uniform(0, 1), g.uniform(0, 1);
    const Eigen::VectorXd d = chk.distances(P);
    for (Eigen::Index i = 0; i < P.rows(); ++i) CHECK(d[i] == scene2d_distance(scene, P.row(i).transpose()));
}

}  // TEST_SUITE
