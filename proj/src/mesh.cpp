#include "sdfplan/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "sdfplan/errors.hpp"

namespace sdfplan {

Eigen::Vector3d TriMesh::face_normal(Eigen::Index f) const {
    const Eigen::Vector3d a = vertices.col(triangles(0, f));
    const Eigen::Vector3d b = vertices.col(triangles(1, f));
    const Eigen::Vector3d c = vertices.col(triangles(2, f));
    return (b - a).cross(c - a).normalized();
}

double TriMesh::face_area(Eigen::Index f) const {
    const Eigen::Vector3d a = vertices.col(triangles(0, f));
    const Eigen::Vector3d b = vertices.col(triangles(1, f));
    const Eigen::Vector3d c = vertices.col(triangles(2, f));
    return 0.5 * (b - a).cross(c - a).norm();
}

double TriMesh::bounding_radius() const {
    return vertices.cols() == 0 ? 0.0 : vertices.colwise().norm().maxCoeff();
}

void compute_vertex_normals(TriMesh& mesh) {
    mesh.vertex_normals = Eigen::Matrix3Xd::Zero(3, mesh.num_vertices());
    for (Eigen::Index f = 0; f < mesh.num_triangles(); ++f) {
        const Eigen::Vector3d a = mesh.vertices.col(mesh.triangles(0, f));
        const Eigen::Vector3d b = mesh.vertices.col(mesh.triangles(1, f));
        const Eigen::Vector3d c = mesh.vertices.col(mesh.triangles(2, f));
        const Eigen::Vector3d area_normal = 0.5 * (b - a).cross(c - a);  // |.| = area
        for (int k = 0; k < 3; ++k) mesh.vertex_normals.col(mesh.triangles(k, f)) += area_normal;
    }
    for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v) {
        const double n = mesh.vertex_normals.col(v).norm();
        if (n > 0) mesh.vertex_normals.col(v) /= n;
    }
}

TriMesh clean_mesh(TriMesh mesh, std::vector<std::string>* warnings) {
    const auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    std::vector<int> keep;
    keep.reserve(static_cast<std::size_t>(mesh.num_triangles()));
    for (Eigen::Index f = 0; f < mesh.num_triangles(); ++f) {
        const auto t = mesh.triangles.col(f);
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
        if (!(mesh.face_area(f) > 1e-20)) continue;
        keep.push_back(static_cast<int>(f));
    }
    if (static_cast<Eigen::Index>(keep.size()) != mesh.num_triangles())
        warn("dropped " + std::to_string(mesh.num_triangles() - static_cast<Eigen::Index>(keep.size())) +
             " degenerate triangle(s)");

    std::vector<int> remap(static_cast<std::size_t>(mesh.num_vertices()), -1);
    int next = 0;
    for (int f : keep)
        for (int k = 0; k < 3; ++k) {
            int& r = remap[static_cast<std::size_t>(mesh.triangles(k, f))];
            if (r < 0) r = next++;
        }
    if (next != mesh.num_vertices())
        warn("pruned " + std::to_string(mesh.num_vertices() - next) + " unreferenced vertex(es)");

    TriMesh out;
    out.vertices.resize(3, next);
    for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v)
        if (remap[static_cast<std::size_t>(v)] >= 0) out.vertices.col(remap[static_cast<std::size_t>(v)]) = mesh.vertices.col(v);
    out.triangles.resize(3, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (int k = 0; k < 3; ++k)
            out.triangles(k, static_cast<Eigen::Index>(i)) = remap[static_cast<std::size_t>(mesh.triangles(k, keep[i]))];
    compute_vertex_normals(out);
    return out;
}

bool is_watertight(const TriMesh& mesh) {
    if (mesh.num_triangles() == 0) return false;
    // directed edge -> count; a closed oriented manifold has each directed edge
    // exactly once and its reverse exactly once.
    std::map<std::pair<int, int>, int> directed;
    for (Eigen::Index f = 0; f < mesh.num_triangles(); ++f)
        for (int k = 0; k < 3; ++k) ++directed[{mesh.triangles(k, f), mesh.triangles((k + 1) % 3, f)}];
    for (const auto& [e, n] : directed) {
        if (n != 1) return false;
        const auto it = directed.find({e.second, e.first});
        if (it == directed.end() || it->second != 1) return false;
    }
    return true;
}

std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(mesh.num_vertices()));
    for (Eigen::Index f = 0; f < mesh.num_triangles(); ++f)
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.triangles(k, f);
            const int b = mesh.triangles((k + 1) % 3, f);
            nb[static_cast<std::size_t>(a)].push_back(b);
            nb[static_cast<std::size_t>(b)].push_back(a);
        }
    for (auto& v : nb) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return nb;
}

Eigen::VectorXd mean_edge_length(const TriMesh& mesh) {
    const auto nb = vertex_neighbors(mesh);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.num_vertices());
    for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v) {
        const auto& n = nb[static_cast<std::size_t>(v)];
        if (n.empty()) continue;
        double s = 0;
        for (int u : n) s += (mesh.vertices.col(u) - mesh.vertices.col(v)).norm();
        out[v] = s / static_cast<double>(n.size());
    }
    return out;
}

MeshLoadResult parse_obj(const std::string& text, const MeshLoadOptions& opts) {
    std::vector<Eigen::Vector3d> verts;
    std::vector<Eigen::Vector3i> tris;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Eigen::Vector3d v;
            if (!(ls >> v.x() >> v.y() >> v.z()) || !v.allFinite())
                throw InputError("mesh parse failure at line " + std::to_string(lineno) + ": bad vertex");
            verts.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // "i", "i/t", "i//n", "i/t/n"
                const auto slash = tok.find('/');
                int i = 0;
                try {
                    i = std::stoi(tok.substr(0, slash));
                } catch (const std::exception&) {
                    throw InputError("mesh parse failure at line " + std::to_string(lineno) + ": bad face index");
                }
                if (i < 0) i = static_cast<int>(verts.size()) + i + 1;  // relative index
                if (i < 1 || i > static_cast<int>(verts.size()))
                    throw InputError("mesh parse failure at line " + std::to_string(lineno) + ": face index out of range");
                idx.push_back(i - 1);
            }
            if (idx.size() < 3)
                throw InputError("mesh parse failure at line " + std::to_string(lineno) + ": face with < 3 corners");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) tris.emplace_back(idx[0], idx[k], idx[k + 1]);
        }
    }
    if (verts.empty() || tris.empty()) throw InputError("empty mesh");

    TriMesh raw;
    raw.vertices.resize(3, static_cast<Eigen::Index>(verts.size()));
    for (std::size_t i = 0; i < verts.size(); ++i) raw.vertices.col(static_cast<Eigen::Index>(i)) = verts[i];
    raw.triangles.resize(3, static_cast<Eigen::Index>(tris.size()));
    for (std::size_t i = 0; i < tris.size(); ++i) raw.triangles.col(static_cast<Eigen::Index>(i)) = tris[i];

    MeshLoadResult res;
    res.mesh = clean_mesh(std::move(raw), &res.warnings);
    if (res.mesh.num_triangles() == 0) throw InputError("empty mesh (all triangles degenerate)");
    res.watertight = is_watertight(res.mesh);
    if (!res.watertight) {
        if (opts.require_watertight) throw InputError("mesh is not watertight");
        res.warnings.push_back("mesh is not watertight; inside/outside signs may be unreliable");
    }
    return res;
}

MeshLoadResult load_mesh(const std::filesystem::path& path, const MeshLoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw InputError("mesh not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_obj(ss.str(), opts);
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh, const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write mesh: " + path.string());
    out << "# sdfplan mesh v1 (Wavefront OBJ subset: v/f records)\n";
    if (!comment.empty()) out << "# " << comment << "\n";
    out.precision(17);
    for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v)
        out << "v " << mesh.vertices(0, v) << ' ' << mesh.vertices(1, v) << ' ' << mesh.vertices(2, v) << '\n';
    for (Eigen::Index f = 0; f < mesh.num_triangles(); ++f)
        out << "f " << mesh.triangles(0, f) + 1 << ' ' << mesh.triangles(1, f) + 1 << ' ' << mesh.triangles(2, f) + 1
            << '\n';
}

namespace {

TriMesh assemble(const std::vector<Eigen::Vector3d>& verts, const std::vector<Eigen::Vector3i>& tris) {
    TriMesh m;
    m.vertices.resize(3, static_cast<Eigen::Index>(verts.size()));
    for (std::size_t i = 0; i < verts.size(); ++i) m.vertices.col(static_cast<Eigen::Index>(i)) = verts[i];
    m.triangles.resize(3, static_cast<Eigen::Index>(tris.size()));
    for (std::size_t i = 0; i < tris.size(); ++i) m.triangles.col(static_cast<Eigen::Index>(i)) = tris[i];
    compute_vertex_normals(m);
    return m;
}

}  // namespace

TriMesh make_icosphere(double radius, int subdivisions, const Eigen::Vector3d& center) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> v = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
        {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<Eigen::Vector3i> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = mid.find(key); it != mid.end()) return it->second;
            v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<Eigen::Vector3i> nf;
        nf.reserve(f.size() * 4);
        for (const auto& t : f) {
            const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
            nf.emplace_back(t[0], ab, ca);
            nf.emplace_back(t[1], bc, ab);
            nf.emplace_back(t[2], ca, bc);
            nf.emplace_back(ab, bc, ca);
        }
        f = std::move(nf);
    }
    for (auto& p : v) p = center + radius * p;
    return assemble(v, f);
}

TriMesh make_box(const Eigen::Vector3d& half_extents, double max_edge, const Eigen::Vector3d& center) {
    std::array<int, 3> n{};
    for (int a = 0; a < 3; ++a) n[static_cast<std::size_t>(a)] = std::max(1, static_cast<int>(std::ceil(2.0 * half_extents[a] / max_edge - 1e-9)));

    // Surface lattice points, shared between faces so the result is watertight.
    std::map<std::array<int, 3>, int> ids;
    std::vector<Eigen::Vector3d> verts;
    auto vid = [&](std::array<int, 3> g) {
        if (auto it = ids.find(g); it != ids.end()) return it->second;
        Eigen::Vector3d p;
        for (int a = 0; a < 3; ++a)
            p[a] = center[a] - half_extents[a] + 2.0 * half_extents[a] * g[static_cast<std::size_t>(a)] / n[static_cast<std::size_t>(a)];
        verts.push_back(p);
        const int id = static_cast<int>(verts.size()) - 1;
        ids.emplace(g, id);
        return id;
    };

    std::vector<Eigen::Vector3i> tris;
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3, w = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            for (int i = 0; i < n[static_cast<std::size_t>(u)]; ++i)
                for (int j = 0; j < n[static_cast<std::size_t>(w)]; ++j) {
                    auto g = [&](int di, int dj) {
                        std::array<int, 3> c{};
                        c[static_cast<std::size_t>(axis)] = side * n[static_cast<std::size_t>(axis)];
                        c[static_cast<std::size_t>(u)] = i + di;
                        c[static_cast<std::size_t>(w)] = j + dj;
                        return vid(c);
                    };
                    const int a = g(0, 0), b = g(1, 0), c = g(1, 1), d = g(0, 1);
                    // (u, w, axis) is right-handed, so a->b->c is CCW seen from +axis.
                    if (side == 1) {
                        tris.emplace_back(a, b, c);
                        tris.emplace_back(a, c, d);
                    } else {
                        tris.emplace_back(a, c, b);
                        tris.emplace_back(a, d, c);
                    }
                }
        }
    }
    return assemble(verts, tris);
}

TriMesh make_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius, int segments) {
    const Eigen::Vector3d axis_vec = b - a;
    const double len = axis_vec.norm();
    const Eigen::Vector3d ez = len > 1e-12 ? Eigen::Vector3d(axis_vec / len) : Eigen::Vector3d::UnitZ();
    Eigen::Vector3d ex = ez.unitOrthogonal();
    Eigen::Vector3d ey = ez.cross(ex);

    const int rings = std::max(2, segments / 4);  // latitude rings per hemisphere (pole excluded)
    const double edge = 2.0 * std::numbers::pi * radius / segments;
    const int cyl = std::max(1, static_cast<int>(std::ceil(len / edge)));

    std::vector<Eigen::Vector3d> verts;
    std::vector<Eigen::Vector3i> tris;
    auto ring_point = [&](const Eigen::Vector3d& c, double rr, double z, int k) {
        const double th = 2.0 * std::numbers::pi * k / segments;
        return Eigen::Vector3d(c + rr * (std::cos(th) * ex + std::sin(th) * ey) + z * ez);
    };

    // Ring list from bottom pole to top pole.
    std::vector<std::pair<Eigen::Vector3d, std::pair<double, double>>> ringspec;  // center, (radius, z offset)
    for (int i = rings - 1; i >= 1; --i) {
        const double lat = std::numbers::pi / 2 * i / rings;
        ringspec.push_back({a, {radius * std::cos(lat), -radius * std::sin(lat)}});
    }
    for (int i = 0; i <= cyl; ++i) ringspec.push_back({a + axis_vec * (double(i) / cyl), {radius, 0.0}});
    for (int i = 1; i < rings; ++i) {
        const double lat = std::numbers::pi / 2 * i / rings;
        ringspec.push_back({b, {radius * std::cos(lat), radius * std::sin(lat)}});
    }

    verts.push_back(a - radius * ez);  // bottom pole
    for (const auto& [c, rz] : ringspec)
        for (int k = 0; k < segments; ++k) verts.push_back(ring_point(c, rz.first, rz.second, k));
    verts.push_back(b + radius * ez);  // top pole
    const int top = static_cast<int>(verts.size()) - 1;
    const int nrings = static_cast<int>(ringspec.size());
    auto at = [&](int r, int k) { return 1 + r * segments + (k % segments); };

    for (int k = 0; k < segments; ++k) tris.emplace_back(0, at(0, k + 1), at(0, k));
    for (int r = 0; r + 1 < nrings; ++r)
        for (int k = 0; k < segments; ++k) {
            tris.emplace_back(at(r, k), at(r, k + 1), at(r + 1, k + 1));
            tris.emplace_back(at(r, k), at(r + 1, k + 1), at(r + 1, k));
        }
    for (int k = 0; k < segments; ++k) tris.emplace_back(top, at(nrings - 1, k), at(nrings - 1, k + 1));
    return assemble(verts, tris);
}

}  // namespace sdfplan
