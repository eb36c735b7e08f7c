#include "sdfplan/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include "sdfplan/errors.hpp"

namespace sdfplan {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

int winding_number(const std::vector<Eigen::Vector2d>& v, const Eigen::Vector2d& p) {
    int wn = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Eigen::Vector2d& a = v[i];
        const Eigen::Vector2d& b = v[(i + 1) % v.size()];
        const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && cross > 0) ++wn;
        } else if (b.y() <= p.y() && cross < 0) {
            --wn;
        }
    }
    return wn;
}

}  // namespace

double signed_distance(const Circle& c, const Eigen::Vector2d& p) { return (p - c.center).norm() - c.radius; }

double signed_distance(const Box2& b, const Eigen::Vector2d& p) {
    const Eigen::Vector2d q = (p - b.center).cwiseAbs() - b.half_extents;
    return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

double signed_distance(const Polygon& poly, const Eigen::Vector2d& p) {
    const auto& v = poly.vertices;
    double d = kInf;
    for (std::size_t i = 0; i < v.size(); ++i) d = std::min(d, segment_distance(p, v[i], v[(i + 1) % v.size()]));
    return winding_number(v, p) != 0 ? -d : d;
}

double signed_distance(const Primitive2D& prim, const Eigen::Vector2d& p) {
    return std::visit([&](const auto& x) { return signed_distance(x, p); }, prim);
}

void Scene2D::validate() const {
    if (!(bounds_max.array() > bounds_min.array()).all()) throw InputError("scene bounds are empty");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const std::string where = "obstacles[" + std::to_string(i) + "]";
        if (const auto* c = std::get_if<Circle>(&obstacles[i]); c && !(c->radius > 0))
            throw InputError(where + ": circle radius must be positive");
        if (const auto* b = std::get_if<Box2>(&obstacles[i]); b && !(b->half_extents.array() > 0).all())
            throw InputError(where + ": box half extents must be positive");
        if (const auto* p = std::get_if<Polygon>(&obstacles[i]); p && p->vertices.size() < 3)
            throw InputError(where + ": polygon needs at least 3 vertices");
    }
    for (const auto& [label, pt] : {std::pair{"start", start}, std::pair{"goal", goal}}) {
        if (!(pt.array() >= bounds_min.array()).all() || !(pt.array() <= bounds_max.array()).all())
            throw InputError(std::string(label) + " lies outside the scene bounds");
        if (!(scene2d_distance(*this, pt) > 0)) throw InputError(std::string(label) + " lies inside an obstacle");
    }
}

double scene2d_distance(const Scene2D& scene, const Eigen::Vector2d& p) {
    double d = kInf;
    for (const auto& o : scene.obstacles) d = std::min(d, signed_distance(o, p));
    return d;
}

Eigen::VectorXd Scene2dChecker::distances(const Eigen::MatrixXd& states) const {
    if (states.cols() != 2) throw InputError("2D checker expects two columns");
    Eigen::VectorXd d(states.rows());
    for (Eigen::Index i = 0; i < states.rows(); ++i) d[i] = scene2d_distance(scene_, states.row(i).transpose());
    return d;
}

std::vector<Sphere> box_to_spheres(const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents,
                                   double resolution) {
    if (!(half_extents.array() > 0).all()) throw InputError("box half extents must be positive");
    if (!(resolution > 0)) throw InputError("box decomposition resolution must be positive");
    std::vector<Sphere> out;
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3, v = (axis + 2) % 3;
        const int nu = std::max(1, static_cast<int>(std::ceil(2 * half_extents[u] / resolution)));
        const int nv = std::max(1, static_cast<int>(std::ceil(2 * half_extents[v] / resolution)));
        const double du = 2 * half_extents[u] / nu, dv = 2 * half_extents[v] / nv;
        const double r = 0.5 * std::hypot(du, dv);
        for (int side = -1; side <= 1; side += 2) {
            for (int i = 0; i < nu; ++i) {
                for (int j = 0; j < nv; ++j) {
                    Eigen::Vector3d c = center;
                    c[axis] += side * half_extents[axis];
                    c[u] += -half_extents[u] + (i + 0.5) * du;
                    c[v] += -half_extents[v] + (j + 0.5) * dv;
                    out.push_back({c, r});
                }
            }
        }
    }
    return out;
}

void Scene3D::validate() const {
    for (std::size_t i = 0; i < spheres.size(); ++i) {
        if (!(spheres[i].radius > 0)) throw InputError("spheres[" + std::to_string(i) + "]: radius must be positive");
        if (!spheres[i].center.allFinite()) throw InputError("spheres[" + std::to_string(i) + "]: center not finite");
    }
    if (start_q.size() != goal_q.size()) throw InputError("start_q and goal_q dimensions differ");
    if (!start_q.allFinite() || !goal_q.allFinite()) throw InputError("start_q and goal_q must be finite");
}

void Scene3D::validate(const RobotModel& model) const {
    validate();
    if (static_cast<std::size_t>(goal_q.size()) != model.n_dof())
        throw InputError("scene joint vectors have " + std::to_string(goal_q.size()) + " entries, robot has " +
                         std::to_string(model.n_dof()) + " joints");
    const Eigen::VectorXd lo = model.lower_limits(), hi = model.upper_limits();
    for (const auto& [label, q] : {std::pair{"start_q", &start_q}, std::pair{"goal_q", &goal_q}})
        for (Eigen::Index j = 0; j < q->size(); ++j)
            if ((*q)[j] < lo[j] || (*q)[j] > hi[j])
                throw InputError(std::string(label) + "[" + std::to_string(j) + "] outside joint limits");
}

Scene3dChecker::Scene3dChecker(Scene3D scene, const CompositeSdf& sdf)
    : scene_(std::move(scene)), sdf_(&sdf), model_(&sdf.model()) {
    scene_.validate(*model_);
    for (const auto& net : sdf.nets()) bound_radius_.push_back(net.bound_radius);
}

Scene3dChecker::Scene3dChecker(Scene3D scene, const ExactComposite& exact)
    : scene_(std::move(scene)), exact_(&exact), model_(&exact.model()) {
    scene_.validate(*model_);
    for (const auto& m : exact.meshes()) bound_radius_.push_back(m.mesh().bounding_radius());
}

Eigen::Index Scene3dChecker::dims() const { return static_cast<Eigen::Index>(model_->n_dof()); }

Eigen::VectorXd Scene3dChecker::link_distances(std::size_t k, const Eigen::Matrix3Xd& local) const {
    if (sdf_) return sdf_->nets()[k].evaluate_clamped(local);
    return exact_signed_distance(exact_->meshes()[k], local).d;
}

Eigen::VectorXd Scene3dChecker::distances(const Eigen::MatrixXd& states) const {
    if (states.cols() != dims()) throw InputError("arm checker: state dimension mismatch");
    const Eigen::Index R = states.rows();
    const auto S = static_cast<Eigen::Index>(scene_.spheres.size());
    Eigen::VectorXd out = Eigen::VectorXd::Constant(R, kInf);
    if (S == 0 || R == 0) return out;

    Eigen::Matrix3Xd centers(3, S);
    Eigen::VectorXd radii(S);
    for (Eigen::Index j = 0; j < S; ++j) {
        centers.col(j) = scene_.spheres[static_cast<std::size_t>(j)].center;
        radii[j] = scene_.spheres[static_cast<std::size_t>(j)].radius;
    }
    std::vector<LinkPoseSet> poses;
    poses.reserve(static_cast<std::size_t>(R));
    for (Eigen::Index i = 0; i < R; ++i) poses.push_back(forward_kinematics(*model_, states.row(i).transpose()));

    Eigen::Matrix3Xd local(3, R * S);
    Eigen::VectorXd lower(R * S);
    std::vector<Eigen::Index> query;
    for (std::size_t k = 0; k < model_->num_links(); ++k) {
        query.clear();
        for (Eigen::Index i = 0; i < R; ++i) {
            const Rigid& T = poses[static_cast<std::size_t>(i)].poses[k];
            for (Eigen::Index j = 0; j < S; ++j) {
                const Eigen::Index c = i * S + j;
                local.col(c) = T.R.transpose() * (centers.col(j) - T.t);
                lower[c] = local.col(c).norm() - bound_radius_[k];
                if (!(lower[c] > far_margin_)) query.push_back(c);
            }
        }
        Eigen::VectorXd d = lower;
        if (!query.empty()) {
            Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(query.size()));
            for (std::size_t q = 0; q < query.size(); ++q) pts.col(static_cast<Eigen::Index>(q)) = local.col(query[q]);
            const Eigen::VectorXd dq = link_distances(k, pts);
            for (std::size_t q = 0; q < query.size(); ++q) d[query[q]] = dq[static_cast<Eigen::Index>(q)];
        }
        for (Eigen::Index i = 0; i < R; ++i)
            for (Eigen::Index j = 0; j < S; ++j) out[i] = std::min(out[i], d[i * S + j] - radii[j]);
    }
    return out;
}

namespace {

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd json_vec(const json& j, const std::string& field, Eigen::Index expect = -1) {
    if (!j.is_array()) throw InputError(field + ": expected an array of numbers");
    if (expect >= 0 && static_cast<Eigen::Index>(j.size()) != expect)
        throw InputError(field + ": expected " + std::to_string(expect) + " numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(field + ": expected an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

const json& field(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) throw InputError(ctx + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = field(j, key, ctx);
    if (!v.is_number()) throw InputError(ctx + "." + key + ": expected a number");
    return v.get<double>();
}

json parse_versioned(const std::string& text, const std::string& format) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(format + ": malformed JSON: " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != format)
        throw InputError("not a " + format + " document (format field)");
    if (j.value("version", 0) != 1) throw InputError(format + ": unsupported version");
    return j;
}

std::string read_text(const std::filesystem::path& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw InputError(what + " not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string serialize_scene2d(const Scene2D& scene) {
    json j;
    j["format"] = "sdfplan-scene2d";
    j["version"] = 1;
    j["name"] = scene.name;
    j["bounds"] = {scene.bounds_min.x(), scene.bounds_min.y(), scene.bounds_max.x(), scene.bounds_max.y()};
    j["start"] = vec_json(scene.start);
    j["goal"] = vec_json(scene.goal);
    json obs = json::array();
    for (const auto& o : scene.obstacles) {
        json e;
        if (const auto* c = std::get_if<Circle>(&o)) {
            e = {{"type", "circle"}, {"center", vec_json(c->center)}, {"radius", c->radius}};
        } else if (const auto* b = std::get_if<Box2>(&o)) {
            e = {{"type", "box"}, {"center", vec_json(b->center)}, {"half_extents", vec_json(b->half_extents)}};
        } else {
            json verts = json::array();
            for (const auto& v : std::get<Polygon>(o).vertices) verts.push_back(vec_json(v));
            e = {{"type", "polygon"}, {"vertices", verts}};
        }
        obs.push_back(e);
    }
    j["obstacles"] = obs;
    return j.dump(2) + "\n";
}

Scene2D parse_scene2d(const std::string& text) {
    const json j = parse_versioned(text, "sdfplan-scene2d");
    Scene2D s;
    s.name = j.value("name", "");
    const Eigen::VectorXd b = json_vec(field(j, "bounds", "scene"), "bounds", 4);
    s.bounds_min = b.head<2>();
    s.bounds_max = b.tail<2>();
    s.start = json_vec(field(j, "start", "scene"), "start", 2);
    s.goal = json_vec(field(j, "goal", "scene"), "goal", 2);
    if (j.contains("obstacles")) {
        const json& obs = j.at("obstacles");
        if (!obs.is_array()) throw InputError("obstacles: expected an array");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const std::string ctx = "obstacles[" + std::to_string(i) + "]";
            const json& e = obs[i];
            const std::string type = field(e, "type", ctx).is_string() ? e.at("type").get<std::string>() : "";
            if (type == "circle") {
                s.obstacles.push_back(Circle{json_vec(field(e, "center", ctx), ctx + ".center", 2), number(e, "radius", ctx)});
            } else if (type == "box") {
                s.obstacles.push_back(Box2{json_vec(field(e, "center", ctx), ctx + ".center", 2),
                                           json_vec(field(e, "half_extents", ctx), ctx + ".half_extents", 2)});
            } else if (type == "polygon") {
                Polygon p;
                const json& verts = field(e, "vertices", ctx);
                if (!verts.is_array()) throw InputError(ctx + ".vertices: expected an array");
                for (std::size_t k = 0; k < verts.size(); ++k)
                    p.vertices.emplace_back(json_vec(verts[k], ctx + ".vertices[" + std::to_string(k) + "]", 2));
                s.obstacles.push_back(std::move(p));
            } else {
                throw InputError(ctx + ".type: unknown primitive '" + type + "'");
            }
        }
    }
    s.validate();
    return s;
}

Scene2D load_scene2d(const std::filesystem::path& path) { return parse_scene2d(read_text(path, "scene file")); }

std::string serialize_scene3d(const Scene3D& scene) {
    json j;
    j["format"] = "sdfplan-scene3d";
    j["version"] = 1;
    j["name"] = scene.name;
    j["start_q"] = vec_json(scene.start_q);
    j["goal_q"] = vec_json(scene.goal_q);
    j["z_floor"] = scene.z_floor;
    json sp = json::array();
    for (const auto& s : scene.spheres) sp.push_back({{"center", vec_json(s.center)}, {"radius", s.radius}});
    j["spheres"] = sp;
    return j.dump(2) + "\n";
}

Scene3D parse_scene3d(const std::string& text) {
    const json j = parse_versioned(text, "sdfplan-scene3d");
    Scene3D s;
    s.name = j.value("name", "");
    s.start_q = json_vec(field(j, "start_q", "scene"), "start_q");
    s.goal_q = json_vec(field(j, "goal_q", "scene"), "goal_q");
    if (j.contains("z_floor")) s.z_floor = number(j, "z_floor", "scene");
    if (j.contains("spheres")) {
        const json& sp = j.at("spheres");
        if (!sp.is_array()) throw InputError("spheres: expected an array");
        for (std::size_t i = 0; i < sp.size(); ++i) {
            const std::string ctx = "spheres[" + std::to_string(i) + "]";
            s.spheres.push_back({json_vec(field(sp[i], "center", ctx), ctx + ".center", 3), number(sp[i], "radius", ctx)});
        }
    }
    if (j.contains("boxes")) {
        const json& bx = j.at("boxes");
        if (!bx.is_array()) throw InputError("boxes: expected an array");
        for (std::size_t i = 0; i < bx.size(); ++i) {
            const std::string ctx = "boxes[" + std::to_string(i) + "]";
            const double res = bx[i].contains("resolution") ? number(bx[i], "resolution", ctx) : 0.1;
            for (auto& sph : box_to_spheres(json_vec(field(bx[i], "center", ctx), ctx + ".center", 3),
                                            json_vec(field(bx[i], "half_extents", ctx), ctx + ".half_extents", 3), res))
                s.spheres.push_back(sph);
        }
    }
    s.validate();
    return s;
}

Scene3D load_scene3d(const std::filesystem::path& path) { return parse_scene3d(read_text(path, "scene file")); }

}  // namespace sdfplan
