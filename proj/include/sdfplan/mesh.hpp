#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdfplan {

/// Triangle mesh with area-weighted vertex normals. Columns are vertices /
/// triangles; triangle winding is counter-clockwise seen from outside.
struct TriMesh {
    Eigen::Matrix3Xd vertices;
    Eigen::Matrix3Xi triangles;
    Eigen::Matrix3Xd vertex_normals;

    Eigen::Index num_vertices() const { return vertices.cols(); }
    Eigen::Index num_triangles() const { return triangles.cols(); }

    Eigen::Vector3d vertex(Eigen::Index i) const { return vertices.col(i); }
    Eigen::Vector3d face_normal(Eigen::Index f) const;
    double face_area(Eigen::Index f) const;

    /// Largest distance of any vertex from the frame origin.
    double bounding_radius() const;
    Eigen::Vector3d aabb_min() const { return vertices.rowwise().minCoeff(); }
    Eigen::Vector3d aabb_max() const { return vertices.rowwise().maxCoeff(); }
};

struct MeshLoadOptions {
    // When false a non-watertight mesh only produces a warning.
    bool require_watertight = false;
};

struct MeshLoadResult {
    TriMesh mesh;
    std::vector<std::string> warnings;
    bool watertight = false;
};

/// Reads a Wavefront OBJ file (only "v" and "f" records are interpreted;
/// faces with more than three corners are fan-triangulated). The mesh is
/// cleaned: degenerate triangles and unreferenced vertices are dropped and
/// vertex normals are recomputed.
MeshLoadResult load_mesh(const std::filesystem::path& path, const MeshLoadOptions& opts = {});
MeshLoadResult parse_obj(const std::string& text, const MeshLoadOptions& opts = {});

void write_obj(const std::filesystem::path& path, const TriMesh& mesh, const std::string& comment = {});

/// Drops degenerate triangles and unreferenced vertices, recomputes normals.
/// Human-readable notes about what changed are appended to warnings.
TriMesh clean_mesh(TriMesh mesh, std::vector<std::string>* warnings = nullptr);

void compute_vertex_normals(TriMesh& mesh);

/// Every undirected edge used by exactly two triangles, with opposite
/// orientations.
bool is_watertight(const TriMesh& mesh);

/// One-ring vertex adjacency.
std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh);

/// Mean length of the edges incident to each vertex.
Eigen::VectorXd mean_edge_length(const TriMesh& mesh);

// Closed primitives used for fixtures and tests.
TriMesh make_icosphere(double radius, int subdivisions, const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
/// Axis-aligned box; each face is gridded so no edge exceeds max_edge.
TriMesh make_box(const Eigen::Vector3d& half_extents, double max_edge = 1e9,
                 const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
/// Capsule around segment a-b. `segments` is the resolution around the axis.
TriMesh make_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius, int segments = 32);

}  // namespace sdfplan
