#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/gp_prior.hpp"
#include "sdfplan/robot_model.hpp"

namespace sdfplan {

/// Signed clearance of a batch of states (one per row) from the obstacles.
class DistanceChecker {
public:
    virtual ~DistanceChecker() = default;
    virtual Eigen::Index dims() const = 0;
    virtual Eigen::VectorXd distances(const Eigen::MatrixXd& states) const = 0;
};

struct CostSpec {
    struct Obstacle {
        double epsilon = 0.0;
        int interp_points = 0;
        double weight = 1.0;
    } obstacle;
    struct Length {
        double weight = 0.05;
    } length;
    struct Boundary {
        double z_floor = 0.02;
        double weight = 1.0;
        bool enabled = false;
    } boundary;

    void validate() const;
};

struct PlannerConfig {
    int H = 20;
    int num_samples = 200;
    int iters = 200;
    double gamma = 0.5;
    double sigma_f_init = 0.02;
    double sigma_min = 0.0005;
    double eta = 0.9;
    double h = 0.01;
    std::uint64_t seed = 0;
    bool kernel_update = true;  // false keeps sigma_f fixed at sigma_f_init
    bool early_stop = true;
    int early_stop_window = 20;
    double early_stop_tol = 1e-4;
    int keep_mean_every = 1;  // 0 keeps only the final mean
    bool keep_snapshots = false;

    void validate() const;
};

struct CostBreakdown {
    double obstacle = 0.0;
    double length = 0.0;
    double boundary = 0.0;
    double total = 0.0;
    double likelihood = 1.0;
};

struct IterationLog {
    int iter = 0;
    double obstacle_cost = 0.0;  // of the updated mean
    double length = 0.0;
    double total_cost = 0.0;
    double sigma_f = 0.0;  // used to draw this iteration's samples
    double weight_entropy = 0.0;
    bool fallback = false;
};

struct PlanResult {
    Eigen::MatrixXd final_mean;
    std::vector<std::pair<int, Eigen::MatrixXd>> means;  // (iteration, mean after update)
    std::vector<IterationLog> log;
    std::vector<Eigen::MatrixXd> first_samples, last_samples;
    CostBreakdown final_cost;
    bool success = false;
    int iterations = 0;
    int fallback_count = 0;
    std::vector<std::string> warnings;
};

/// Inserts interp_points evenly spaced states inside every segment.
Eigen::MatrixXd densify(const Eigen::MatrixXd& states, int interp_points);

double obstacle_cost(const Eigen::MatrixXd& states, const DistanceChecker& checker, const CostSpec& spec);
double length_cost(const Eigen::MatrixXd& states);
/// Count of (waypoint, link) pairs whose frame origin lies strictly below
/// z_floor. Links rigidly fixed to the world are ignored.
double boundary_cost(const Eigen::MatrixXd& states, const RobotModel& model, double z_floor);

/// Weighted total and exp(-total / 2) from already evaluated terms.
CostBreakdown cost_likelihood(double obstacle, double length, double boundary, const CostSpec& spec);
CostBreakdown evaluate_costs(const Eigen::MatrixXd& states, const DistanceChecker& checker, const CostSpec& spec,
                             const RobotModel* model = nullptr);

struct MppiStep {
    Eigen::MatrixXd mean;
    Eigen::VectorXd weights;
    bool fallback = false;
};

/// Normalized weights from likelihoods. If none is positive, the lowest-cost
/// tenth of the samples (by total_costs, when given) share uniform weight.
Eigen::VectorXd normalize_weights(const Eigen::VectorXd& likelihoods, const Eigen::VectorXd& total_costs,
                                  bool* fallback = nullptr);
/// Same weights computed from total costs in the log domain, free of underflow.
Eigen::VectorXd weights_from_costs(const Eigen::VectorXd& total_costs);

Eigen::MatrixXd weighted_update(const Eigen::MatrixXd& mean, const std::vector<Eigen::MatrixXd>& samples,
                                const Eigen::VectorXd& weights, double gamma);
MppiStep mppi_update(const GpPrior& prior, const std::vector<Eigen::MatrixXd>& samples,
                     const Eigen::VectorXd& likelihoods, double gamma,
                     const Eigen::VectorXd& total_costs = Eigen::VectorXd());

double weight_entropy(const Eigen::VectorXd& weights);

double update_sigma_f(double sigma_f, double obs_cost_of_mean, double eta, double sigma_min);

PlanResult plan(const Eigen::VectorXd& start, const Eigen::VectorXd& goal, const DistanceChecker& checker,
                const PlannerConfig& cfg, const CostSpec& spec, const RobotModel* model = nullptr);

}  // namespace sdfplan
