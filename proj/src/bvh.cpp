#include "sdfplan/bvh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>

namespace sdfplan {

// Region-based closest point, after Ericson, "Real-Time Collision Detection" 5.1.5.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;

    const Eigen::Vector3d bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

    const Eigen::Vector3d cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(const TriMesh& mesh, int leaf_size) {
    const auto n = static_cast<std::size_t>(mesh.num_triangles());
    a_.resize(n);
    b_.resize(n);
    c_.resize(n);
    centroid_.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
        const auto fi = static_cast<Eigen::Index>(f);
        a_[f] = mesh.vertices.col(mesh.triangles(0, fi));
        b_[f] = mesh.vertices.col(mesh.triangles(1, fi));
        c_[f] = mesh.vertices.col(mesh.triangles(2, fi));
        centroid_[f] = (a_[f] + b_[f] + c_[f]) / 3.0;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * n / static_cast<std::size_t>(std::max(1, leaf_size)) + 1);
    if (n > 0) build(0, static_cast<int>(n), std::max(1, leaf_size));
}

int TriangleBvh::build(int first, int count, int leaf_size) {
    Node node;
    node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (int i = first; i < first + count; ++i) {
        const auto t = static_cast<std::size_t>(order_[static_cast<std::size_t>(i)]);
        node.lo = node.lo.cwiseMin(a_[t]).cwiseMin(b_[t]).cwiseMin(c_[t]);
        node.hi = node.hi.cwiseMax(a_[t]).cwiseMax(b_[t]).cwiseMax(c_[t]);
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (count <= leaf_size) {
        nodes_[static_cast<std::size_t>(id)].first = first;
        nodes_[static_cast<std::size_t>(id)].count = count;
        return id;
    }
    // median split of centroids along the widest axis
    Eigen::Vector3d clo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity()), chi = -clo;
    for (int i = first; i < first + count; ++i) {
        const auto& c = centroid_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])];
        clo = clo.cwiseMin(c);
        chi = chi.cwiseMax(c);
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](int x, int y) {
                         return centroid_[static_cast<std::size_t>(x)][axis] < centroid_[static_cast<std::size_t>(y)][axis];
                     });
    const int left = build(first, mid - first, leaf_size);
    const int right = build(mid, first + count - mid, leaf_size);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

double TriangleBvh::box_sq_distance(const Node& n, const Eigen::Vector3d& p) const {
    const Eigen::Vector3d d = (n.lo - p).cwiseMax(p - n.hi).cwiseMax(0.0);
    return d.squaredNorm();
}

ClosestPoint TriangleBvh::closest_point(const Eigen::Vector3d& p) const {
    ClosestPoint best;
    best.sq_distance = std::numeric_limits<double>::infinity();
    if (nodes_.empty()) return best;

    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
        if (box_sq_distance(n, p) > best.sq_distance) continue;
        if (n.left < 0) {
            for (int i = n.first; i < n.first + n.count; ++i) {
                const auto t = static_cast<std::size_t>(order_[static_cast<std::size_t>(i)]);
                const Eigen::Vector3d q = closest_point_on_triangle(p, a_[t], b_[t], c_[t]);
                const double d2 = (q - p).squaredNorm();
                // ties go to the lower triangle index so results do not depend on tree layout
                if (d2 < best.sq_distance || (d2 == best.sq_distance && static_cast<int>(t) < best.triangle)) {
                    best.sq_distance = d2;
                    best.point = q;
                    best.triangle = static_cast<int>(t);
                }
            }
            continue;
        }
        const Node& l = nodes_[static_cast<std::size_t>(n.left)];
        const Node& r = nodes_[static_cast<std::size_t>(n.right)];
        const double dl = box_sq_distance(l, p), dr = box_sq_distance(r, p);
        // push the farther child first so the nearer one is visited next
        if (dl <= dr) {
            stack[top++] = n.right;
            stack[top++] = n.left;
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
    return best;
}

int TriangleBvh::count_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const {
    if (nodes_.empty()) return 0;
    const Eigen::Vector3d inv = dir.cwiseInverse();
    int hits = 0;
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
        // slab test
        const Eigen::Vector3d t0 = (n.lo - origin).cwiseProduct(inv);
        const Eigen::Vector3d t1 = (n.hi - origin).cwiseProduct(inv);
        const double tmin = t0.cwiseMin(t1).maxCoeff();
        const double tmax = t0.cwiseMax(t1).minCoeff();
        if (tmax < std::max(tmin, 0.0)) continue;
        if (n.left >= 0) {
            stack[top++] = n.left;
            stack[top++] = n.right;
            continue;
        }
        for (int i = n.first; i < n.first + n.count; ++i) {
            const auto t = static_cast<std::size_t>(order_[static_cast<std::size_t>(i)]);
            // Moller-Trumbore
            const Eigen::Vector3d e1 = b_[t] - a_[t], e2 = c_[t] - a_[t];
            const Eigen::Vector3d pv = dir.cross(e2);
            const double det = e1.dot(pv);
            if (std::abs(det) < 1e-300) continue;
            const double inv_det = 1.0 / det;
            const Eigen::Vector3d tv = origin - a_[t];
            const double u = tv.dot(pv) * inv_det;
            if (u < 0 || u > 1) continue;
            const Eigen::Vector3d qv = tv.cross(e1);
            const double v = dir.dot(qv) * inv_det;
            if (v < 0 || u + v > 1) continue;
            if (e2.dot(qv) * inv_det > 0) ++hits;
        }
    }
    return hits;
}

}  // namespace sdfplan
