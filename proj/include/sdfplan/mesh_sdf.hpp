#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/bvh.hpp"
#include "sdfplan/mesh.hpp"

namespace sdfplan {

struct SdfQuery {
    double d = 0.0;            // signed distance, negative inside
    Eigen::Vector3d n;         // unit gradient direction (outward)
    Eigen::Vector3d foot;      // nearest surface point
    int triangle = -1;
};

struct SdfBatch {
    Eigen::VectorXd d;
    Eigen::Matrix3Xd n;
};

/// Exact signed distance to a watertight triangle mesh: magnitude from a BVH
/// closest-point query, sign from ray parity (three jittered rays, majority vote).
class MeshSdf {
public:
    MeshSdf() = default;
    explicit MeshSdf(TriMesh mesh);

    const TriMesh& mesh() const { return mesh_; }
    const TriangleBvh& bvh() const { return bvh_; }

    SdfQuery query(const Eigen::Vector3d& p) const;
    bool inside(const Eigen::Vector3d& p) const;

private:
    TriMesh mesh_;
    TriangleBvh bvh_;
};

/// Batched oracle; p is 3xN. Parallel over points, deterministic.
SdfBatch exact_signed_distance(const MeshSdf& sdf, const Eigen::Matrix3Xd& p);

struct SdfSample {
    Eigen::Vector3d p;
    double d = 0.0;
    Eigen::Vector3d n;
};

struct SynthesisParams {
    std::vector<double> offsets;       // signed offsets along vertex normals (m)
    std::size_t max_samples = 10000;
    std::uint64_t seed = 0;
    double normal_consistency = 0.7;   // min dot with every one-ring neighbor normal
    double reprojection_factor = 1.5;  // x mean incident edge length
};

/// Offsets denser near the surface, spanning the outer training band.
std::vector<double> default_offsets(double scale = 1.0);

struct SynthesisStats {
    std::size_t vertices = 0;
    std::size_t inconsistent_vertices = 0;
    std::size_t candidates = 0;
    std::size_t rejected_reprojection = 0;
    std::size_t accepted = 0;
};

struct LinkDataset {
    int link_index = 0;
    std::string link_name;
    std::vector<SdfSample> samples;
    SynthesisParams params;
    SynthesisStats stats;
};

/// Samples p = v + delta * n_v for every vertex with a consistent normal and
/// every offset; keeps p only when its nearest surface point lies within the
/// re-projection radius of v. Stored d and n come from the exact oracle.
/// Throws NumericalError with rejection statistics when nothing is accepted.
LinkDataset synthesize_dataset(const MeshSdf& sdf, const SynthesisParams& params, int link_index = 0,
                               std::string link_name = {});

void save_dataset(const std::filesystem::path& path, const LinkDataset& ds);
LinkDataset load_dataset(const std::filesystem::path& path);

}  // namespace sdfplan
