#include "sdfplan/mesh_sdf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include <json.hpp>

#include "sdfplan/errors.hpp"
#include "sdfplan/parallel.hpp"

namespace sdfplan {

namespace {

// Irrational-ish directions so rays rarely graze edges of axis-aligned meshes.
const Eigen::Vector3d kRayDirs[3] = {
    Eigen::Vector3d(0.5773502691896258, 0.5773502691896258, 0.5773502691896258) +
        Eigen::Vector3d(0.0131, -0.0217, 0.0071),
    Eigen::Vector3d(-0.7071067811865476, 0.1246, 0.6963) + Eigen::Vector3d(0.0093, 0.0041, -0.0113),
    Eigen::Vector3d(0.2113, -0.9162, 0.3407) + Eigen::Vector3d(-0.0057, 0.0029, 0.0149),
};

}  // namespace

MeshSdf::MeshSdf(TriMesh mesh) : mesh_(std::move(mesh)), bvh_(mesh_) {}

bool MeshSdf::inside(const Eigen::Vector3d& p) const {
    int odd = 0;
    for (const auto& dir : kRayDirs) odd += bvh_.count_crossings(p, dir.normalized()) % 2;
    return odd >= 2;
}

SdfQuery MeshSdf::query(const Eigen::Vector3d& p) const {
    const ClosestPoint cp = bvh_.closest_point(p);
    SdfQuery q;
    q.foot = cp.point;
    q.triangle = cp.triangle;
    const double dist = std::sqrt(cp.sq_distance);
    if (dist == 0.0) {
        q.d = 0.0;
        q.n = mesh_.face_normal(cp.triangle);
        return q;
    }
    const double sign = inside(p) ? -1.0 : 1.0;
    q.d = sign * dist;
    q.n = sign * (p - cp.point) / dist;
    return q;
}

SdfBatch exact_signed_distance(const MeshSdf& sdf, const Eigen::Matrix3Xd& p) {
    SdfBatch out;
    out.d.resize(p.cols());
    out.n.resize(3, p.cols());
    parallel_for(p.cols(), [&](std::ptrdiff_t i) {
        const SdfQuery q = sdf.query(p.col(i));
        out.d[i] = q.d;
        out.n.col(i) = q.n;
    });
    return out;
}

std::vector<double> default_offsets(double scale) {
    std::vector<double> o = {-0.01, -0.005, -0.002, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.2};
    for (auto& x : o) x *= scale;
    return o;
}

LinkDataset synthesize_dataset(const MeshSdf& sdf, const SynthesisParams& params, int link_index,
                               std::string link_name) {
    if (params.offsets.empty()) throw InputError("synthesize_dataset: no offsets");
    if (!std::is_sorted(params.offsets.begin(), params.offsets.end()))
        throw InputError("synthesize_dataset: offsets must be sorted");
    if (params.max_samples == 0) throw InputError("synthesize_dataset: max_samples must be positive");

    const TriMesh& mesh = sdf.mesh();
    const auto nv = mesh.num_vertices();
    const auto neighbors = vertex_neighbors(mesh);
    const Eigen::VectorXd edge = mean_edge_length(mesh);

    LinkDataset ds;
    ds.link_index = link_index;
    ds.link_name = std::move(link_name);
    ds.params = params;
    ds.stats.vertices = static_cast<std::size_t>(nv);

    std::vector<char> consistent(static_cast<std::size_t>(nv), 0);
    for (Eigen::Index v = 0; v < nv; ++v) {
        const auto& nb = neighbors[static_cast<std::size_t>(v)];
        if (nb.empty()) continue;
        bool ok = true;
        for (int u : nb)
            if (mesh.vertex_normals.col(v).dot(mesh.vertex_normals.col(u)) < params.normal_consistency) {
                ok = false;
                break;
            }
        consistent[static_cast<std::size_t>(v)] = ok;
        if (!ok) ++ds.stats.inconsistent_vertices;
    }

    // per-vertex buckets, merged in vertex order so the result does not depend on threads
    std::vector<std::vector<SdfSample>> buckets(static_cast<std::size_t>(nv));
    std::vector<std::size_t> rejected(static_cast<std::size_t>(nv), 0);
    parallel_for(nv, [&](std::ptrdiff_t v) {
        if (!consistent[static_cast<std::size_t>(v)]) return;
        const Eigen::Vector3d x = mesh.vertices.col(v);
        const Eigen::Vector3d nx = mesh.vertex_normals.col(v);
        const double radius = params.reprojection_factor * edge[v];
        for (double delta : params.offsets) {
            const Eigen::Vector3d p = x + delta * nx;
            const SdfQuery q = sdf.query(p);
            if ((q.foot - x).norm() > radius) {
                ++rejected[static_cast<std::size_t>(v)];
                continue;
            }
            buckets[static_cast<std::size_t>(v)].push_back({p, q.d, q.n});
        }
    });

    std::vector<SdfSample> all;
    for (Eigen::Index v = 0; v < nv; ++v) {
        if (!consistent[static_cast<std::size_t>(v)]) continue;
        ds.stats.candidates += params.offsets.size();
        ds.stats.rejected_reprojection += rejected[static_cast<std::size_t>(v)];
        for (auto& s : buckets[static_cast<std::size_t>(v)]) all.push_back(std::move(s));
    }
    ds.stats.accepted = all.size();
    if (all.empty()) {
        std::ostringstream msg;
        msg << "synthesize_dataset: all candidates rejected (vertices " << ds.stats.vertices << ", inconsistent normals "
            << ds.stats.inconsistent_vertices << ", candidates " << ds.stats.candidates << ", re-projection rejects "
            << ds.stats.rejected_reprojection << ")";
        throw NumericalError(msg.str());
    }

    if (all.size() > params.max_samples) {
        std::vector<std::size_t> idx(all.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(params.seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(params.max_samples);
        std::sort(idx.begin(), idx.end());
        std::vector<SdfSample> picked;
        picked.reserve(idx.size());
        for (auto i : idx) picked.push_back(all[i]);
        all = std::move(picked);
    }
    ds.samples = std::move(all);
    return ds;
}

void save_dataset(const std::filesystem::path& path, const LinkDataset& ds) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write dataset: " + path.string());
    nlohmann::json prov = {
        {"link_index", ds.link_index},
        {"link_name", ds.link_name},
        {"offsets", ds.params.offsets},
        {"max_samples", ds.params.max_samples},
        {"seed", ds.params.seed},
        {"normal_consistency", ds.params.normal_consistency},
        {"reprojection_factor", ds.params.reprojection_factor},
        {"stats",
         {{"vertices", ds.stats.vertices},
          {"inconsistent_vertices", ds.stats.inconsistent_vertices},
          {"candidates", ds.stats.candidates},
          {"rejected_reprojection", ds.stats.rejected_reprojection},
          {"accepted", ds.stats.accepted}}},
    };
    out << "sdfplan-dataset 1\n" << prov.dump() << "\npx py pz d nx ny nz\n";
    char buf[512];
    for (const auto& s : ds.samples) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", s.p.x(), s.p.y(), s.p.z(), s.d,
                      s.n.x(), s.n.y(), s.n.z());
        out << buf;
    }
}

LinkDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("dataset not found: " + path.string());
    std::string magic, header, columns;
    std::getline(in, magic);
    if (magic != "sdfplan-dataset 1") throw InputError("dataset: unrecognized header in " + path.string());
    std::getline(in, header);
    std::getline(in, columns);
    LinkDataset ds;
    try {
        const auto prov = nlohmann::json::parse(header);
        ds.link_index = prov.value("link_index", 0);
        ds.link_name = prov.value("link_name", std::string{});
        ds.params.offsets = prov.value("offsets", std::vector<double>{});
        ds.params.max_samples = prov.value("max_samples", std::size_t{0});
        ds.params.seed = prov.value("seed", std::uint64_t{0});
        ds.params.normal_consistency = prov.value("normal_consistency", 0.7);
        ds.params.reprojection_factor = prov.value("reprojection_factor", 1.5);
        if (prov.contains("stats")) {
            const auto& st = prov["stats"];
            ds.stats.vertices = st.value("vertices", std::size_t{0});
            ds.stats.inconsistent_vertices = st.value("inconsistent_vertices", std::size_t{0});
            ds.stats.candidates = st.value("candidates", std::size_t{0});
            ds.stats.rejected_reprojection = st.value("rejected_reprojection", std::size_t{0});
            ds.stats.accepted = st.value("accepted", std::size_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("dataset: bad provenance header: ") + e.what());
    }
    std::string line;
    std::size_t lineno = 3;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        SdfSample s;
        std::istringstream ls(line);
        if (!(ls >> s.p.x() >> s.p.y() >> s.p.z() >> s.d >> s.n.x() >> s.n.y() >> s.n.z()))
            throw InputError("dataset: bad row at line " + std::to_string(lineno));
        ds.samples.push_back(s);
    }
    return ds;
}

}  // namespace sdfplan
