#include <cmath>
#include <doctest.h>
#include <json.hpp>
#include <Eigen/Geometry>
#include "sdfplan/errors.hpp"
#include "sdfplan/robot_model.hpp"
#include "support.hpp"

using namespace sdfplan;
using testing::Gen;

namespace {

std::string chain_doc(const std::string& links_json) {
    return R"({"format": "sdfplan-robot", "version": 1, "name": "t", "links": [)" + links_json + "]}";
}

const char* kRevZ = R"("kind": "revolute", "axis": [0, 0, 1], "limits": [-3.2, 3.2], "vel_limit": 1, "acc_limit": 1)";

// Homogeneous 4x4 built from xyz/rpy with Eigen's AngleAxis, independent of Rigid.
Eigen::Matrix4d homogeneous(const nlohmann::json& origin) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    if (origin.is_null()) return T;
    if (origin.contains("rpy")) {
        const auto& r = origin["rpy"];
        const Eigen::Matrix3d R = (Eigen::AngleAxisd(r[2].get<double>(), Eigen::Vector3d::UnitZ()) *
                                   Eigen::AngleAxisd(r[1].get<double>(), Eigen::Vector3d::UnitY()) *
                                   Eigen::AngleAxisd(r[0].get<double>(), Eigen::Vector3d::UnitX()))
                                      .toRotationMatrix();
        T.topLeftCorner<3, 3>() = R;
    }
    if (origin.contains("xyz"))
        for (int i = 0; i < 3; ++i) T(i, 3) = origin["xyz"][i].get<double>();
    return T;
}

Eigen::Matrix4d joint_motion(const nlohmann::json& joint, double q) {
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    const std::string kind = joint["kind"];
    if (kind == "fixed") return M;
    Eigen::Vector3d axis(joint["axis"][0].get<double>(), joint["axis"][1].get<double>(), joint["axis"][2].get<double>());
    axis.normalize();
    if (kind == "revolute") M.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q, axis).toRotationMatrix();
    else M.topRightCorner<3, 1>() = q * axis;
    return M;
}

std::vector<Eigen::Matrix4d> oracle_chain(const nlohmann::json& doc, const Eigen::VectorXd& q) {
    std::vector<Eigen::Matrix4d> out;
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    int dof = 0;
    for (const auto& l : doc["links"]) {
        const auto& j = l["joint"];
        const bool moving = j["kind"] != "fixed";
        T = T * homogeneous(j.value("origin", nlohmann::json())) * joint_motion(j, moving ? q[dof] : 0.0);
        if (moving) ++dof;
        out.push_back(T);
    }
    return out;
}

}  // namespace

TEST_SUITE("robot_model") {

TEST_CASE("panda-like description has seven degrees of freedom") {
    const RobotModel m = load_robot(testing::data_dir() / "robots/panda_like.json");
    CHECK(m.num_links() == 9);
    CHECK(m.n_dof() == 7);
    CHECK(m.link(0).name == "link0");
    CHECK(m.link(8).name == "flange");
    CHECK_FALSE(m.depends_on_q(0));
    CHECK(m.depends_on_q(8));
    for (const auto& l : m.links()) {
        CHECK(l.joint.origin.is_valid());
        CHECK(std::abs(l.joint.axis.norm() - 1.0) < 1e-9);
        REQUIRE(l.mesh.has_value());
        CHECK(std::filesystem::exists(*l.mesh));
    }
}

TEST_CASE("single fixed link") {
    const RobotModel m = load_robot(testing::data_dir() / "robots/sphere_link.json");
    CHECK(m.num_links() == 1);
    CHECK(m.n_dof() == 0);
}

TEST_CASE("malformed descriptions are rejected") {
    SUBCASE("zero axis") {
        const std::string doc = chain_doc(
            R"({"name": "a", "joint": {"kind": "revolute", "axis": [0, 0, 0], "limits": [-1, 1], "vel_limit": 1, "acc_limit": 1}})");
        try {
            parse_robot(doc);
            FAIL("expected an error");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("invalid-axis") != std::string::npos);
        }
    }
    SUBCASE("limit inversion") {
        const std::string doc = chain_doc(
            R"({"name": "a", "joint": {"kind": "revolute", "axis": [0, 0, 1], "limits": [1, -1], "vel_limit": 1, "acc_limit": 1}})");
        CHECK_THROWS_WITH_AS(parse_robot(doc), doctest::Contains("limit inversion"), InputError);
    }
    SUBCASE("unknown joint kind") {
        CHECK_THROWS_AS(parse_robot(chain_doc(R"({"name": "a", "joint": {"kind": "ball"}})")), InputError);
    }
    SUBCASE("syntax error reports the line") {
        const std::string doc = "{\n\"format\": \"sdfplan-robot\",\n\"version\": 1,\n\"links\": [ oops ]\n}";
        CHECK_THROWS_WITH_AS(parse_robot(doc), doctest::Contains("line 4"), InputError);
    }
    SUBCASE("nonpositive velocity limit") {
        const std::string doc = chain_doc(
            R"({"name": "a", "joint": {"kind": "revolute", "axis": [0, 0, 1], "limits": [-1, 1], "vel_limit": 0, "acc_limit": 1}})");
        CHECK_THROWS_AS(parse_robot(doc), InputError);
    }
}

TEST_CASE("one revolute link at zero is the identity") {
    const RobotModel m = parse_robot(chain_doc(std::string(R"({"name": "a", "joint": {)") + kRevZ + "}}"));
    const LinkPoseSet p = forward_kinematics(m, Eigen::VectorXd::Zero(1));
    REQUIRE(p.poses.size() == 1);
    CHECK(p.poses[0].matrix().isApprox(Eigen::Matrix4d::Identity(), 0.0));
}

TEST_CASE("two-link planar arm at quarter turn") {
    const RobotModel m = parse_robot(chain_doc(std::string(R"({"name": "a", "joint": {)") + kRevZ + R"(}},
        {"name": "b", "joint": {)" + kRevZ + R"(, "origin": {"xyz": [1, 0, 0]}}})"));
    Eigen::VectorXd q(2);
    q << M_PI / 2, 0.0;
    const LinkPoseSet p = forward_kinematics(m, q);
    CHECK((p.poses[1].t - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("panda-like poses match an independent chain product") {
    const auto path = testing::data_dir() / "robots/panda_like.json";
    const nlohmann::json doc = nlohmann::json::parse(testing::slurp(path));
    const RobotModel m = load_robot(path);
    Gen g(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd q = trial == 0 ? Eigen::VectorXd::Zero(7) : g.between(m.lower_limits(), m.upper_limits());
        const LinkPoseSet p = forward_kinematics(m, q);
        const auto oracle = oracle_chain(doc, q);
        for (std::size_t k = 0; k < m.num_links(); ++k) {
            CHECK((p.poses[k].matrix() - oracle[k]).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(p.poses[k].is_valid());
        }
    }
}

TEST_CASE("dimension mismatch and limit flags") {
    const RobotModel m = load_robot(testing::data_dir() / "robots/panda_like.json");
    CHECK_THROWS_AS(forward_kinematics(m, Eigen::VectorXd::Zero(6)), InputError);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(7);
    CHECK(forward_kinematics(m, q).out_of_limits == std::vector<std::size_t>{3});  // joint 4 upper limit is below 0
    q[3] = -1.0;
    q[5] = -1.0;
    CHECK(forward_kinematics(m, q).out_of_limits == std::vector<std::size_t>{5});
}

TEST_CASE("world_to_link examples") {
    LinkPoseSet poses;
    poses.poses = {Rigid::identity(), Rigid::translation({0, 0, 0.5}),
                   Rigid::rotation(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix())};
    Eigen::Matrix3Xd p(3, 1);
    p << 1, 2, 3;
    CHECK((world_to_link(poses, 0, p).col(0) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
    p.col(0) = Eigen::Vector3d(0, 0, 0.5);
    CHECK(world_to_link(poses, 1, p).col(0).norm() == 0.0);
    p.col(0) = Eigen::Vector3d(1, 0, 0);
    CHECK((world_to_link(poses, 2, p).col(0) - Eigen::Vector3d(0, -1, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(world_to_link(poses, 3, p), InputError);
}

TEST_CASE("property: round trip, composition and batch consistency") {
    const RobotModel m = load_robot(testing::data_dir() / "robots/panda_like.json");
    Gen g(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd q = g.between(m.lower_limits(), m.upper_limits());
        const LinkPoseSet poses = forward_kinematics(m, q);
        const std::size_t k = static_cast<std::size_t>(g.integer(0, 8));

        Eigen::Matrix3Xd pts(3, 64);
        for (int i = 0; i < 64; ++i) pts.col(i) = g.point(1.5);
        const Eigen::Matrix3Xd local = world_to_link(poses, k, pts);
        for (int i = 0; i < 64; ++i) {
            CHECK((poses.poses[k].apply(Eigen::Vector3d(local.col(i))) - pts.col(i)).norm() < 1e-9);
            Eigen::Matrix3Xd one = pts.col(i);
            CHECK((world_to_link(poses, k, one).col(0) - local.col(i)).norm() == 0.0);
        }

        // splitting the chain at j: T_k = T_j * prod_{i=j+1..k} (origin_i * motion_i)
        const std::size_t j = static_cast<std::size_t>(g.integer(0, static_cast<int>(k)));
        Rigid rest = Rigid::identity();
        for (std::size_t i = j + 1; i <= k; ++i) {
            const int d = m.dof_index(i);
            rest = rest * m.link(i).joint.origin * m.link(i).joint.motion(d >= 0 ? q[d] : 0.0);
        }
        CHECK(((poses.poses[j] * rest).matrix() - poses.poses[k].matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

}  // TEST_SUITE
