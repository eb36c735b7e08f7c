#pragma once

#include <vector>

#include <Eigen/Core>

#include "sdfplan/mesh.hpp"

namespace sdfplan {

struct ClosestPoint {
    Eigen::Vector3d point;
    double sq_distance = 0.0;
    int triangle = -1;
};

/// Closest point on triangle (a, b, c) to p.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// Axis-aligned bounding-volume hierarchy over the triangles of a mesh.
/// Holds a copy of the geometry; immutable after construction.
class TriangleBvh {
public:
    TriangleBvh() = default;
    explicit TriangleBvh(const TriMesh& mesh, int leaf_size = 4);

    ClosestPoint closest_point(const Eigen::Vector3d& p) const;

    /// Number of triangles crossed by the ray origin + t*dir, t > 0.
    int count_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Eigen::Vector3d lo, hi;
        int left = -1, right = -1;  // children; -1 for leaves
        int first = 0, count = 0;   // triangle range in order_ for leaves
    };

    int build(int first, int count, int leaf_size);
    double box_sq_distance(const Node& n, const Eigen::Vector3d& p) const;

    std::vector<Node> nodes_;
    std::vector<int> order_;
    std::vector<Eigen::Vector3d> a_, b_, c_;
    std::vector<Eigen::Vector3d> centroid_;
};

}  // namespace sdfplan
