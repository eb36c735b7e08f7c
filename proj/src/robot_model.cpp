#include "sdfplan/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdfplan/errors.hpp"

namespace sdfplan {

using nlohmann::json;

namespace {

constexpr int kRobotFormatVersion = 1;

int line_of_byte(std::string_view text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

Eigen::Vector3d read_vec3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw InputError(field + ": expected an array of 3 numbers");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw InputError(field + ": expected an array of 3 numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

double read_number(const json& j, const char* key, const std::string& ctx, std::optional<double> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw InputError(ctx + "." + key + ": missing");
    }
    if (!j[key].is_number()) throw InputError(ctx + "." + key + ": expected a number");
    return j[key].get<double>();
}

Rigid read_origin(const json& j, const std::string& ctx) {
    if (j.is_null()) return Rigid::identity();
    if (!j.is_object()) throw InputError(ctx + ": expected an object");
    Eigen::Vector3d xyz = j.contains("xyz") ? read_vec3(j["xyz"], ctx + ".xyz") : Eigen::Vector3d::Zero();
    if (j.contains("rotation")) {
        const auto& r = j["rotation"];
        if (!r.is_array() || r.size() != 9) throw InputError(ctx + ".rotation: expected 9 numbers (row-major)");
        Eigen::Matrix3d R;
        for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = r[i].get<double>();
        Rigid T{R, xyz};
        if (!T.is_valid(1e-9)) throw InputError(ctx + ".rotation: not a proper rotation (orthonormal, det +1)");
        return T;
    }
    Eigen::Vector3d rpy = j.contains("rpy") ? read_vec3(j["rpy"], ctx + ".rpy") : Eigen::Vector3d::Zero();
    return Rigid::from_xyz_rpy(xyz, rpy);
}

JointSpec read_joint(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw InputError(ctx + ": expected an object");
    JointSpec js;
    const std::string kind = j.value("kind", std::string{});
    if (kind == "revolute") js.kind = JointKind::Revolute;
    else if (kind == "prismatic") js.kind = JointKind::Prismatic;
    else if (kind == "fixed") js.kind = JointKind::Fixed;
    else throw InputError(ctx + ".kind: unrecognized joint kind '" + kind + "'");

    js.origin = read_origin(j.value("origin", json()), ctx + ".origin");

    if (js.moving()) {
        if (!j.contains("axis")) throw InputError(ctx + ".axis: missing");
        Eigen::Vector3d axis = read_vec3(j["axis"], ctx + ".axis");
        const double n = axis.norm();
        if (!(n > 1e-12) || !std::isfinite(n)) throw InputError(ctx + ".axis: invalid-axis (zero or non-finite)");
        js.axis = axis / n;

        if (!j.contains("limits") || !j["limits"].is_array() || j["limits"].size() != 2)
            throw InputError(ctx + ".limits: expected [lower, upper]");
        js.lower = j["limits"][0].get<double>();
        js.upper = j["limits"][1].get<double>();
        if (js.lower > js.upper) throw InputError(ctx + ".limits: limit inversion (lower > upper)");
        js.vel_limit = read_number(j, "vel_limit", ctx);
        js.acc_limit = read_number(j, "acc_limit", ctx);
        if (!(js.vel_limit > 0)) throw InputError(ctx + ".vel_limit: must be positive");
        if (!(js.acc_limit > 0)) throw InputError(ctx + ".acc_limit: must be positive");
    } else if (j.contains("axis")) {
        Eigen::Vector3d axis = read_vec3(j["axis"], ctx + ".axis");
        if (axis.norm() > 1e-12) js.axis = axis.normalized();
    }
    return js;
}

}  // namespace

Rigid JointSpec::motion(double q) const {
    switch (kind) {
        case JointKind::Revolute:
            return Rigid::rotation(Eigen::AngleAxisd(q, axis).toRotationMatrix());
        case JointKind::Prismatic:
            return Rigid::translation(axis * q);
        case JointKind::Fixed:
            break;
    }
    return Rigid::identity();
}

RobotModel::RobotModel(std::string name, std::vector<Link> links, double timing_limit_scale)
    : name_(std::move(name)), links_(std::move(links)), timing_limit_scale_(timing_limit_scale) {
    if (links_.empty()) throw InputError("robot has no links");
    if (!(timing_limit_scale_ > 0)) throw InputError("timing_limit_scale must be positive");
    dof_of_link_.assign(links_.size(), -1);
    for (std::size_t k = 0; k < links_.size(); ++k) {
        const auto& js = links_[k].joint;
        if (!js.origin.is_valid(1e-9)) throw InputError("link '" + links_[k].name + "': origin is not a rigid transform");
        if (js.moving()) {
            if (std::abs(js.axis.norm() - 1.0) > 1e-9) throw InputError("link '" + links_[k].name + "': invalid-axis");
            if (js.lower > js.upper) throw InputError("link '" + links_[k].name + "': limit inversion (lower > upper)");
            dof_of_link_[k] = static_cast<int>(dof_links_.size());
            dof_links_.push_back(k);
        }
    }
}

bool RobotModel::depends_on_q(std::size_t k) const {
    return !dof_links_.empty() && k >= dof_links_.front();
}

std::optional<std::size_t> RobotModel::find_link(std::string_view name) const {
    for (std::size_t k = 0; k < links_.size(); ++k)
        if (links_[k].name == name) return k;
    return std::nullopt;
}

#define SDFPLAN_GATHER(member)                                              \
    Eigen::VectorXd v(static_cast<Eigen::Index>(dof_links_.size()));       \
    for (std::size_t i = 0; i < dof_links_.size(); ++i)                    \
        v[static_cast<Eigen::Index>(i)] = links_[dof_links_[i]].joint.member; \
    return v;

Eigen::VectorXd RobotModel::lower_limits() const { SDFPLAN_GATHER(lower) }
Eigen::VectorXd RobotModel::upper_limits() const { SDFPLAN_GATHER(upper) }
Eigen::VectorXd RobotModel::vel_limits() const { SDFPLAN_GATHER(vel_limit) }
Eigen::VectorXd RobotModel::acc_limits() const { SDFPLAN_GATHER(acc_limit) }

#undef SDFPLAN_GATHER

RobotModel parse_robot(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("robot description: parse error at line " + std::to_string(line_of_byte(text, e.byte)) +
                         ": " + e.what());
    }
    try {
        if (doc.value("format", std::string{}) != "sdfplan-robot")
            throw InputError("robot description: format must be \"sdfplan-robot\"");
        const int version = doc.value("version", 0);
        if (version != kRobotFormatVersion)
            throw InputError("robot description: unsupported version " + std::to_string(version));
        if (!doc.contains("links") || !doc["links"].is_array() || doc["links"].empty())
            throw InputError("robot description: links must be a non-empty array");

        std::vector<Link> links;
        for (std::size_t k = 0; k < doc["links"].size(); ++k) {
            const auto& jl = doc["links"][k];
            const std::string ctx = "links[" + std::to_string(k) + "]";
            Link link;
            link.name = jl.value("name", std::string{});
            if (link.name.empty()) throw InputError(ctx + ".name: missing");
            link.joint = read_joint(jl.value("joint", json::object({{"kind", "fixed"}})), ctx + ".joint");
            if (jl.contains("mesh") && jl["mesh"].is_string()) link.mesh = base_dir / jl["mesh"].get<std::string>();
            links.push_back(std::move(link));
        }
        return RobotModel(doc.value("name", std::string{"robot"}), std::move(links),
                          doc.value("timing_limit_scale", 1.0));
    } catch (const json::exception& e) {
        throw InputError(std::string("robot description: ") + e.what());
    }
}

RobotModel load_robot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("robot description not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_robot(ss.str(), path.parent_path());
}

LinkPoseSet forward_kinematics(const RobotModel& model, const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (static_cast<std::size_t>(q.size()) != model.n_dof())
        throw InputError("forward_kinematics: expected " + std::to_string(model.n_dof()) + " joint values, got " +
                         std::to_string(q.size()));
    LinkPoseSet out;
    out.poses.reserve(model.num_links());
    Rigid T = Rigid::identity();
    for (std::size_t k = 0; k < model.num_links(); ++k) {
        const auto& js = model.link(k).joint;
        T = T * js.origin;
        const int i = model.dof_index(k);
        if (i >= 0) {
            const double qi = q[i];
            if (qi < js.lower || qi > js.upper) out.out_of_limits.push_back(static_cast<std::size_t>(i));
            T = T * js.motion(qi);
        }
        out.poses.push_back(T);
    }
    return out;
}

Eigen::Matrix3Xd world_to_link(const LinkPoseSet& poses, std::size_t k, const Eigen::Matrix3Xd& p) {
    if (k >= poses.poses.size())
        throw InputError("world_to_link: link index " + std::to_string(k) + " out of range");
    return poses.poses[k].apply_inverse(p);
}

}  // namespace sdfplan
