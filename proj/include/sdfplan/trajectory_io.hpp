#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sdfplan/planner.hpp"
#include "sdfplan/time_param.hpp"

namespace sdfplan {

// Plain columnar text, '#' lines are comments, numbers printed with 17
// significant digits so files round-trip exactly.

void write_trajectory(const std::filesystem::path& path, const Eigen::MatrixXd& states,
                      const std::vector<std::string>& comments = {});
Eigen::MatrixXd read_trajectory(const std::filesystem::path& path);
Eigen::MatrixXd parse_trajectory(const std::string& text);

void write_timed_trajectory(const std::filesystem::path& path, const TimedTrajectory& traj,
                            const std::vector<std::string>& comments = {});
TimedTrajectory read_timed_trajectory(const std::filesystem::path& path);

/// Per-iteration metrics: iter, obstacle cost, length, total cost, sigma_f, weight entropy.
void write_plan_log(const std::filesystem::path& path, const PlanResult& result,
                    const std::vector<std::string>& comments = {});
std::vector<IterationLog> read_plan_log(const std::filesystem::path& path);

/// Rows of (tag, sample index, waypoint index, state...) for a set of trajectories.
void write_samples(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, const std::vector<Eigen::MatrixXd>*>>& groups,
                   const std::vector<std::string>& comments = {});
void write_means(const std::filesystem::path& path, const std::vector<std::pair<int, Eigen::MatrixXd>>& means,
                 const std::vector<std::string>& comments = {});

}  // namespace sdfplan
