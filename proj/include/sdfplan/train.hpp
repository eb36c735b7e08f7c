#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/mesh_sdf.hpp"
#include "sdfplan/mlp.hpp"

namespace sdfplan {

struct TrainConfig {
    int epochs = 300;
    int batch_size = 1024;
    double learning_rate = 1e-3;
    int lr_step_epochs = 100;   // multiply the rate by lr_step_factor every lr_step_epochs
    double lr_step_factor = 0.3;
    double lambda_d = 1.0;
    double lambda_n = 0.1;
    std::uint64_t seed = 0;
    double validation_fraction = 0.1;
    // Differentiate the alignment term through central differences of the
    // network instead of the closed-form mixed-mode pass. Cross-checking only.
    bool finite_difference_alignment = false;
    double fd_step = 1e-5;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_rmsd_d = 0.0;
    double val_rmsd_align = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double val_rmsd_d = 0.0;       // held-out distance RMSD at the end
    double val_rmsd_align = 0.0;   // held-out RMS of |n_hat/|n_hat| x n|
    std::size_t train_size = 0;
    std::size_t val_size = 0;
};

/// Column batch of training targets.
struct SampleBatch {
    Eigen::Matrix3Xd p;
    Eigen::VectorXd d;
    Eigen::Matrix3Xd n;

    static SampleBatch from(const std::vector<SdfSample>& samples);
    static SampleBatch gather(const std::vector<SdfSample>& samples, const std::vector<std::size_t>& idx);
};

/// Mean over the batch of lambda_d (f - d)^2 + lambda_n |u x n|^2 where
/// u = grad f / |grad f|, and its gradient with respect to every parameter
/// (same layout as net.layers()).
double loss_and_gradient(const MlpSdf& net, const SampleBatch& batch, const TrainConfig& cfg,
                         std::vector<DenseLayer>& grad);

/// Distance RMSD and alignment RMSD of a network over a batch.
std::pair<double, double> evaluate_rmsd(const MlpSdf& net, const SampleBatch& batch);

/// Mini-batch Adam on the loss above. bound_radius is copied into the returned
/// network for far-field clamping. Throws NumericalError if the loss diverges.
MlpSdf train_link_sdf(const LinkDataset& dataset, const TrainConfig& cfg, TrainReport* report = nullptr,
                      double bound_radius = 0.0);

}  // namespace sdfplan
