#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdfplan {

/// Natural cubic spline through waypoints, parameterized by normalized chord
/// length s in [0, 1]. A path whose waypoints all coincide is degenerate: it
/// has a single knot and evaluates to that point everywhere.
class SplinePath {
public:
    SplinePath() = default;
    explicit SplinePath(const Eigen::MatrixXd& waypoints);

    Eigen::Index dims() const { return points_.cols(); }
    const Eigen::VectorXd& knots() const { return knots_; }
    const Eigen::MatrixXd& points() const { return points_; }
    bool degenerate() const { return knots_.size() < 2; }
    /// Total chord length of the (collapsed) waypoints.
    double chord_length() const { return chord_length_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    Eigen::VectorXd eval(double s) const;
    Eigen::VectorXd d1(double s) const;
    Eigen::VectorXd d2(double s) const;
    /// One-sided evaluation at a knot: derivative order 0..2 from segment seg.
    Eigen::VectorXd eval_segment(Eigen::Index seg, double s, int order) const;

private:
    Eigen::Index segment_of(double s) const;

    Eigen::VectorXd knots_;
    Eigen::MatrixXd points_;  // knots x dims
    Eigen::MatrixXd m2_;      // second derivatives at knots
    double chord_length_ = 0.0;
    std::vector<std::string> warnings_;
};

SplinePath fit_spline(const Eigen::MatrixXd& waypoints);

struct TimedTrajectory {
    Eigen::VectorXd t;
    Eigen::VectorXd s;  // path parameter of every sample
    Eigen::MatrixXd q, qd, qdd;

    double duration() const { return t.size() ? t[t.size() - 1] : 0.0; }
};

struct LimitUtilization {
    double velocity = 0.0;      // max |qd_d| / vel_d
    double acceleration = 0.0;  // max |qdd_d| / acc_d
};

/// Time-optimal timing of a fixed path under per-dimension velocity and
/// acceleration bounds, by backward then forward integration of the maximum
/// squared path speed on a uniform grid over s.
TimedTrajectory time_parameterize(const SplinePath& path, const Eigen::VectorXd& vel_limits,
                                  const Eigen::VectorXd& acc_limits, int grid = 512);

LimitUtilization limit_utilization(const TimedTrajectory& traj, const Eigen::VectorXd& vel_limits,
                                   const Eigen::VectorXd& acc_limits);

}  // namespace sdfplan
