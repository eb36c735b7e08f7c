#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/mesh_sdf.hpp"
#include "sdfplan/mlp.hpp"

namespace sdfplan {

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

struct BandReport {
    Band band;
    std::size_t samples = 0;
    double rmsd_d = 0.0;      // m
    double rmsd_align = 0.0;  // RMS of |u x n|, u the normalized network gradient
};

/// "0,0.4,0.8,1.2" (band edges) or "[0,0.1],[0.1,1.2]" (explicit intervals), meters.
std::vector<Band> parse_bands(const std::string& text);

struct BandPoints {
    Eigen::Matrix3Xd p;
    Eigen::VectorXd d;
    Eigen::Matrix3Xd n;
};

/// Up to n points with exact distance in [lo, hi], uniform in volume around
/// the mesh. Fewer points (possibly none) come back if rejection sampling
/// runs out of attempts.
BandPoints sample_band_points(const MeshSdf& sdf, const Band& band, std::size_t n, std::uint64_t seed,
                              std::uint64_t stream = 0);

/// Raw network accuracy (no far-field clamp) against the oracle per band.
std::vector<BandReport> evaluate_bands(const MlpSdf& net, const MeshSdf& sdf, const std::vector<Band>& bands,
                                       std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace sdfplan
