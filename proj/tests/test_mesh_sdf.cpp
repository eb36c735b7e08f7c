#include <algorithm>
#include <cmath>
#include <doctest.h>
#include "sdfplan/bvh.hpp"
#include "sdfplan/errors.hpp"
#include "sdfplan/mesh.hpp"
#include "sdfplan/mesh_sdf.hpp"
#include "support.hpp"

using namespace sdfplan;
using testing::Gen;

namespace {

const char* kUnitCube = R"(# unit cube centered at the origin
v -0.5 -0.5 -0.5
v  0.5 -0.5 -0.5
v  0.5  0.5 -0.5
v -0.5  0.5 -0.5
v -0.5 -0.5  0.5
v  0.5 -0.5  0.5
v  0.5  0.5  0.5
v -0.5  0.5  0.5
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 3 4 8 7
f 2 3 7 6
f 1 5 8 4
)";

// Brute-force nearest distance: every triangle, barycentric grid refinement.
double brute_distance(const TriMesh& m, const Eigen::Vector3d& p) {
    double best = 1e300;
    for (Eigen::Index f = 0; f < m.num_triangles(); ++f) {
        const Eigen::Vector3d a = m.vertex(m.triangles(0, f)), b = m.vertex(m.triangles(1, f)),
                              c = m.vertex(m.triangles(2, f));
        best = std::min(best, (closest_point_on_triangle(p, a, b, c) - p).norm());
    }
    return best;
}

}  // namespace

TEST_SUITE("mesh_sdf") {

TEST_CASE("fixture meshes load") {
    const MeshLoadResult ico = load_mesh(testing::data_dir() / "meshes/icosphere_r010.obj");
    CHECK(ico.watertight);
    CHECK(is_watertight(ico.mesh));
    CHECK(ico.mesh.bounding_radius() == doctest::Approx(0.1).epsilon(1e-6));
    for (Eigen::Index i = 0; i < ico.mesh.num_vertices(); ++i)
        CHECK(std::abs(ico.mesh.vertex_normals.col(i).norm() - 1.0) < 1e-9);

    const MeshLoadResult cube = parse_obj(kUnitCube);
    CHECK(cube.mesh.num_triangles() == 12);
    CHECK(cube.watertight);

    for (const char* name : {"panda_link0", "panda_link1", "panda_link5", "panda_flange"})
        CHECK(load_mesh(testing::data_dir() / "meshes" / (std::string(name) + ".obj")).watertight);
}

TEST_CASE("cleanup prunes unreferenced vertices with a warning") {
    const std::string text = std::string(kUnitCube) + "v 9 9 9\n";
    const MeshLoadResult r = parse_obj(text);
    CHECK(r.mesh.num_vertices() == 8);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK(r.mesh.vertices.cwiseAbs().maxCoeff() == doctest::Approx(0.5));
}

TEST_CASE("load errors") {
    CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.obj"), InputError);
    CHECK_THROWS_AS(parse_obj("# nothing\n"), InputError);
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nf 1 2 3\n"), InputError);
    MeshLoadOptions strict;
    strict.require_watertight = true;
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", strict), InputError);
    CHECK_FALSE(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").watertight);
}

TEST_CASE("exact distance examples") {
    const MeshSdf ico(load_mesh(testing::data_dir() / "meshes/icosphere_r010.obj").mesh);
    Gen g(3);
    for (int i = 0; i < 20; ++i) {
        const SdfQuery q = ico.query(0.25 * g.unit());
        CHECK(std::abs(q.d - 0.15) < 2e-3);
    }
    for (Eigen::Index i = 0; i < ico.mesh().num_vertices(); i += 7) CHECK(ico.query(ico.mesh().vertex(i)).d == 0.0);

    const MeshSdf cube(parse_obj(kUnitCube).mesh);
    CHECK(cube.query(Eigen::Vector3d::Zero()).d == doctest::Approx(-0.5).epsilon(1e-12));
    const SdfQuery out = cube.query({1.0, 0.2, -0.1});
    CHECK(out.d == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((out.n - Eigen::Vector3d::UnitX()).norm() < 1e-12);
}

TEST_CASE("bvh agrees with a brute-force scan") {
    const TriMesh cap = make_capsule({0, 0, -0.15}, {0, 0, 0.15}, 0.06, 16);
    const MeshSdf sdf(cap);
    Gen g(5);
    for (int i = 0; i < 300; ++i) {
        const Eigen::Vector3d p = g.point(0.5);
        CHECK(std::abs(std::abs(sdf.query(p).d) - brute_distance(cap, p)) < 1e-12);
    }
}

TEST_CASE("closest point on a triangle against dense barycentric sampling") {
    const Eigen::Vector3d a(0, 0, 0), b(1, 0, 0.2), c(0.3, 0.8, -0.1);
    Gen g(9);
    const int n = 200;
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Vector3d p = g.point(1.5);
        double best = 1e300;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                const double u = double(i) / n, v = double(j) / n;
                best = std::min(best, ((1 - u - v) * a + u * b + v * c - p).norm());
            }
        const double d = (closest_point_on_triangle(p, a, b, c) - p).norm();
        CHECK(d <= best + 1e-12);
        CHECK(d > best - 1e-2);
    }
}

TEST_CASE("property: oracle symmetry, eikonal, sign") {
    Gen g(17);
    const TriMesh box = make_box({0.2, 0.1, 0.15}, 0.05);
    const MeshSdf box_sdf(box);
    const MeshSdf ico(make_icosphere(0.1, 3));
    int wrong_sign = 0, checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const Eigen::Vector3d p = g.point(0.4);
        const SdfQuery q = box_sdf.query(p);
        const bool inside = (p.cwiseAbs().array() < Eigen::Array3d(0.2, 0.1, 0.15)).all();
        if ((q.d < 0) != inside) ++wrong_sign;
        const SdfQuery s = ico.query(p);
        if (std::abs(p.norm() - 0.1) > 2e-3) {
            ++checked;
            if ((s.d < 0) != (p.norm() < 0.1)) ++wrong_sign;
        }
        if (i < 1000) {
            CHECK(std::abs(std::abs(q.d) - (p - q.foot).norm()) < 1e-9);
            CHECK(std::abs(std::abs(s.d) - (p - s.foot).norm()) < 1e-9);
        }
    }
    CHECK(wrong_sign == 0);
    CHECK(checked > 9000);

    const double eps = 1e-4;
    for (int i = 0; i < 500; ++i) {
        const Eigen::Vector3d p = g.point(0.5);
        const SdfQuery q = box_sdf.query(p);
        if (q.d <= 0.01) continue;
        CHECK(std::abs(box_sdf.query(p + eps * q.n).d - q.d - eps) < 1e-6);
    }
}

TEST_CASE("batch oracle equals single queries") {
    const MeshSdf ico(make_icosphere(0.1, 2));
    Gen g(2);
    Eigen::Matrix3Xd p(3, 257);
    for (int i = 0; i < p.cols(); ++i) p.col(i) = g.point(0.4);
    const SdfBatch b = exact_signed_distance(ico, p);
    for (int i = 0; i < p.cols(); ++i) {
        const SdfQuery q = ico.query(p.col(i));
        CHECK(b.d[i] == q.d);
        CHECK((b.n.col(i) - q.n).norm() == 0.0);
    }
}

TEST_CASE("synthesis on a sphere accepts every candidate") {
    const MeshSdf ico(load_mesh(testing::data_dir() / "meshes/icosphere_r010.obj").mesh);
    SynthesisParams sp;
    sp.offsets = {-0.01, 0.01, 0.05};
    sp.max_samples = 1000000;
    sp.seed = 4;
    const LinkDataset ds = synthesize_dataset(ico, sp);
    CHECK(ds.stats.accepted == ds.stats.candidates);
    CHECK(ds.stats.candidates == 3 * static_cast<std::size_t>(ico.mesh().num_vertices()));
    CHECK(ds.samples.size() == ds.stats.accepted);
    for (const auto& s : ds.samples) {
        const double nearest_offset = *std::min_element(sp.offsets.begin(), sp.offsets.end(), [&](double a, double b) {
            return std::abs(a - s.d) < std::abs(b - s.d);
        });
        CHECK(std::abs(s.d - nearest_offset) < 2e-3);
        CHECK(std::abs(s.n.norm() - 1.0) < 1e-6);
    }
}

TEST_CASE("zero offset yields surface samples") {
    const MeshSdf ico(make_icosphere(0.1, 2));
    SynthesisParams sp;
    sp.offsets = {0.0};
    const LinkDataset ds = synthesize_dataset(ico, sp);
    REQUIRE_FALSE(ds.samples.empty());
    for (const auto& s : ds.samples) CHECK(s.d == 0.0);
}

TEST_CASE("thin plate rejects inward candidates that pass through") {
    // 2 cm thick plate, edges well below the thickness; a 3 cm inward step
    // exits through the opposite face
    const MeshSdf plate(make_box({0.05, 0.05, 0.01}, 0.005));
    SynthesisParams sp;
    sp.offsets = {-0.03, 0.03};
    sp.max_samples = 1000000;
    const LinkDataset ds = synthesize_dataset(plate, sp);
    CHECK(ds.stats.rejected_reprojection > 0);
    for (const auto& s : ds.samples) CHECK(s.d > 0.0);

    sp.offsets = {-0.03};
    CHECK_THROWS_AS(synthesize_dataset(plate, sp), NumericalError);
}

TEST_CASE("dataset fidelity, subsampling and round trip") {
    const MeshSdf cap(make_capsule({0, 0, 0}, {0.1, 0, 0}, 0.04, 16));
    SynthesisParams sp;
    sp.offsets = default_offsets();
    sp.max_samples = 500;
    sp.seed = 8;
    const LinkDataset ds = synthesize_dataset(cap, sp, 2, "cap");
    CHECK(ds.samples.size() == 500);
    for (const auto& s : ds.samples) {
        const SdfQuery q = cap.query(s.p);
        CHECK(std::abs(q.d - s.d) < 1e-9);
        CHECK((q.n - s.n).norm() < 1e-9);
    }
    const LinkDataset again = synthesize_dataset(cap, sp, 2, "cap");
    REQUIRE(again.samples.size() == ds.samples.size());
    CHECK((again.samples.back().p - ds.samples.back().p).norm() == 0.0);

    const auto dir = testing::scratch_dir("dataset");
    save_dataset(dir / "cap.dataset", ds);
    const LinkDataset loaded = load_dataset(dir / "cap.dataset");
    CHECK(loaded.link_name == "cap");
    CHECK(loaded.link_index == 2);
    REQUIRE(loaded.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK((loaded.samples[i].p - ds.samples[i].p).norm() == 0.0);
        CHECK(loaded.samples[i].d == ds.samples[i].d);
    }
    CHECK(loaded.params.offsets == sp.offsets);
}

}  // TEST_SUITE
