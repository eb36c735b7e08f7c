#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdfplan {

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

/// Fully-connected network R^3 -> R with rectifier hidden layers and an
/// identity output, evaluated column-batched. The default shape is
/// [3, 64, 64, 64, 64, 1].
class MlpSdf {
public:
    static constexpr int kHiddenWidth = 64;
    static constexpr int kWeightLayers = 5;
    static std::vector<int> default_shape() { return {3, 64, 64, 64, 64, 1}; }

    MlpSdf() = default;
    explicit MlpSdf(std::vector<DenseLayer> layers);

    /// Uniform fan-in initialization (He-uniform on hidden layers).
    static MlpSdf random(const std::vector<int>& shape, std::uint64_t seed);

    std::vector<int> shape() const;
    bool has_default_shape() const { return shape() == default_shape(); }
    std::size_t num_parameters() const;
    bool all_finite() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    /// Network output for a 3xN batch.
    Eigen::VectorXd evaluate(const Eigen::Matrix3Xd& p) const;
    /// Output plus exact input gradient (3xN) of the piecewise-linear network.
    void evaluate_with_gradient(const Eigen::Matrix3Xd& p, Eigen::VectorXd& d, Eigen::Matrix3Xd& grad) const;

    // Far-field handling: points farther than trust_radius from the frame
    // origin get the lower bound |p| - bound_radius instead of a network value.
    double bound_radius = 0.0;
    double trust_radius = 1.2;
    Eigen::VectorXd evaluate_clamped(const Eigen::Matrix3Xd& p) const;

    std::string provenance;  // JSON document describing how the weights were produced

    void save(const std::filesystem::path& path) const;
    static MlpSdf load(const std::filesystem::path& path);

private:
    std::vector<DenseLayer> layers_;
};

}  // namespace sdfplan
