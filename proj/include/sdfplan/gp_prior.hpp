#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace sdfplan {

/// Waypoints in configuration space (rows), with optional timestamps in
/// seconds once the path has been time-parameterized.
struct Trajectory {
    Eigen::MatrixXd states;
    Eigen::VectorXd times;

    Eigen::Index num_waypoints() const { return states.rows(); }
    Eigen::Index dims() const { return states.cols(); }
};

struct GpHyper {
    double sigma_f = 1.0;  // signal standard deviation, units of the state
    double h = 0.1;        // length-scale on normalized time
    void validate() const;
};

/// Squared-exponential kernel on normalized time.
double se_kernel(double ti, double tj, const GpHyper& hyper);

/// Uniform normalized timestamps i / H, i = 0..H.
Eigen::VectorXd uniform_times(int H);

/// Gaussian-process trajectory prior conditioned on exact start and goal
/// observations. The covariance of the interior waypoints is
/// K** - K*^T Kobs^-1 K*, shared across state dimensions; endpoints carry no
/// variance. Immutable after construction.
class GpPrior {
public:
    /// mean must pass through the intended start (first row) and goal (last row).
    GpPrior(Eigen::VectorXd times, Eigen::MatrixXd mean, const GpHyper& hyper,
            Eigen::VectorXd dim_scale = Eigen::VectorXd());

    const Eigen::VectorXd& times() const { return times_; }
    const Eigen::MatrixXd& mean() const { return mean_; }
    const GpHyper& hyper() const { return hyper_; }
    int H() const { return static_cast<int>(times_.size()) - 1; }

    /// Conditioned covariance over interior timestamps, before jitter.
    const Eigen::MatrixXd& interior_covariance() const { return cov_; }
    /// Lower Cholesky factor of interior_covariance() + jitter * I.
    const Eigen::MatrixXd& chol() const { return chol_; }
    double jitter() const { return jitter_; }

    /// Marginal variance at every timestamp (zeros at both endpoints).
    Eigen::VectorXd marginal_variance() const;

    Eigen::MatrixXd sample(std::mt19937_64& rng) const;

private:
    Eigen::VectorXd times_;
    Eigen::MatrixXd mean_;
    GpHyper hyper_;
    Eigen::VectorXd dim_scale_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;
    double jitter_ = 0.0;
};

/// Prior with a straight-line mean from start to goal.
GpPrior condition_on_endpoints(const Eigen::VectorXd& times, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                               const GpHyper& hyper);

/// n independent samples; sample i draws from its own counter-based stream.
std::vector<Eigen::MatrixXd> sample_trajectories(const GpPrior& prior, int n, std::uint64_t seed,
                                                 std::uint64_t stream_offset = 0);

}  // namespace sdfplan
