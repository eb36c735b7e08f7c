#include "sdfplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sdfplan/errors.hpp"
#include "sdfplan/parallel.hpp"

namespace sdfplan {

void CostSpec::validate() const {
    if (!(obstacle.epsilon >= 0)) throw InputError("cost.obstacle.epsilon must be >= 0");
    if (obstacle.interp_points < 0) throw InputError("cost.obstacle.interp_points must be >= 0");
    if (!(obstacle.weight >= 0) || !(length.weight >= 0) || !(boundary.weight >= 0))
        throw InputError("cost weights must be >= 0");
}

void PlannerConfig::validate() const {
    if (H < 2) throw InputError("planner.H must be >= 2");
    if (num_samples < 1) throw InputError("planner.num_samples must be >= 1");
    if (iters < 1) throw InputError("planner.iters must be >= 1");
    if (!(gamma > 0 && gamma <= 1)) throw InputError("planner.gamma must lie in (0, 1]");
    if (!(eta > 0 && eta < 1)) throw InputError("planner.eta must lie in (0, 1)");
    if (!(sigma_f_init > 0) || !(sigma_min > 0) || !(h > 0))
        throw InputError("planner.sigma_f_init, sigma_min and h must be positive");
    if (early_stop_window < 1) throw InputError("planner.early_stop_window must be >= 1");
    if (keep_mean_every < 0) throw InputError("planner.keep_mean_every must be >= 0");
}

Eigen::MatrixXd densify(const Eigen::MatrixXd& states, int interp_points) {
    if (interp_points < 0) throw InputError("interp_points must be >= 0");
    const Eigen::Index n = states.rows();
    if (n < 2 || interp_points == 0) return states;
    const int per = interp_points + 1;
    Eigen::MatrixXd out((n - 1) * per + 1, states.cols());
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        for (int k = 0; k < per; ++k) {
            const double a = static_cast<double>(k) / per;
            out.row(i * per + k) = (1.0 - a) * states.row(i) + a * states.row(i + 1);
        }
    }
    out.row(out.rows() - 1) = states.row(n - 1);
    return out;
}

double obstacle_cost(const Eigen::MatrixXd& states, const DistanceChecker& checker, const CostSpec& spec) {
    const Eigen::VectorXd d = checker.distances(densify(states, spec.obstacle.interp_points));
    double count = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (std::isnan(d[i])) throw NumericalError("distance checker returned NaN");
        if (d[i] <= spec.obstacle.epsilon) count += 1;
    }
    return count;
}

double length_cost(const Eigen::MatrixXd& states) {
    double len = 0;
    for (Eigen::Index i = 0; i + 1 < states.rows(); ++i) len += (states.row(i + 1) - states.row(i)).norm();
    return len;
}

double boundary_cost(const Eigen::MatrixXd& states, const RobotModel& model, double z_floor) {
    double count = 0;
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
        const LinkPoseSet poses = forward_kinematics(model, states.row(i).transpose());
        for (std::size_t k = 0; k < model.num_links(); ++k) {
            if (!model.depends_on_q(k)) continue;
            if (poses.poses[k].t.z() < z_floor) count += 1;
        }
    }
    return count;
}

CostBreakdown cost_likelihood(double obstacle, double length, double boundary, const CostSpec& spec) {
    CostBreakdown c;
    c.obstacle = obstacle;
    c.length = length;
    c.boundary = boundary;
    c.total = spec.obstacle.weight * obstacle + spec.length.weight * length;
    if (spec.boundary.enabled) c.total += spec.boundary.weight * boundary;
    if (!std::isfinite(c.total)) throw NumericalError("non-finite trajectory cost");
    c.likelihood = std::exp(-0.5 * c.total);
    return c;
}

CostBreakdown evaluate_costs(const Eigen::MatrixXd& states, const DistanceChecker& checker, const CostSpec& spec,
                             const RobotModel* model) {
    const double obs = obstacle_cost(states, checker, spec);
    const double len = length_cost(states);
    double bnd = 0;
    if (spec.boundary.enabled) {
        if (!model) throw InputError("boundary cost needs a robot model");
        bnd = boundary_cost(states, *model, spec.boundary.z_floor);
    }
    return cost_likelihood(obs, len, bnd, spec);
}

namespace {

Eigen::VectorXd fallback_weights(const Eigen::VectorXd& total_costs, Eigen::Index n) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (total_costs.size() != n) {
        w.setConstant(1.0 / static_cast<double>(n));
        return w;
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return total_costs[a] < total_costs[b]; });
    const Eigen::Index top = std::max<Eigen::Index>(1, (n + 9) / 10);
    for (Eigen::Index i = 0; i < top; ++i) w[order[static_cast<std::size_t>(i)]] = 1.0 / static_cast<double>(top);
    return w;
}

}  // namespace

Eigen::VectorXd normalize_weights(const Eigen::VectorXd& likelihoods, const Eigen::VectorXd& total_costs,
                                  bool* fallback) {
    const Eigen::Index n = likelihoods.size();
    if (n < 1) throw InputError("at least one sample is required");
    if ((likelihoods.array() < 0).any() || !likelihoods.allFinite())
        throw NumericalError("likelihoods must be finite and non-negative");
    const double sum = likelihoods.sum();
    if (fallback) *fallback = false;
    if (!(sum > 0)) {
        if (fallback) *fallback = true;
        return fallback_weights(total_costs, n);
    }
    return likelihoods / sum;
}

Eigen::VectorXd weights_from_costs(const Eigen::VectorXd& total_costs) {
    if (total_costs.size() < 1) throw InputError("at least one sample is required");
    if (!total_costs.allFinite()) throw NumericalError("non-finite sample cost");
    const double cmin = total_costs.minCoeff();
    Eigen::VectorXd w = (-0.5 * (total_costs.array() - cmin)).exp().matrix();
    return w / w.sum();
}

Eigen::MatrixXd weighted_update(const Eigen::MatrixXd& mean, const std::vector<Eigen::MatrixXd>& samples,
                                const Eigen::VectorXd& weights, double gamma) {
    if (samples.size() != static_cast<std::size_t>(weights.size())) throw InputError("one weight per sample required");
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].rows() != mean.rows() || samples[i].cols() != mean.cols())
            throw InputError("sample shape differs from the mean");
        const double w = weights[static_cast<Eigen::Index>(i)];
        if (w != 0.0) step += w * (samples[i] - mean);
    }
    Eigen::MatrixXd out = mean + gamma * step;
    // samples share the mean's endpoints; keep them exact
    out.row(0) = mean.row(0);
    out.row(out.rows() - 1) = mean.row(mean.rows() - 1);
    return out;
}

MppiStep mppi_update(const GpPrior& prior, const std::vector<Eigen::MatrixXd>& samples,
                     const Eigen::VectorXd& likelihoods, double gamma, const Eigen::VectorXd& total_costs) {
    if (!(gamma >= 0 && gamma <= 1)) throw InputError("gamma must lie in [0, 1]");
    MppiStep s;
    s.weights = normalize_weights(likelihoods, total_costs, &s.fallback);
    s.mean = weighted_update(prior.mean(), samples, s.weights, gamma);
    return s;
}

double weight_entropy(const Eigen::VectorXd& weights) {
    double e = 0;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights[i] > 0) e -= weights[i] * std::log(weights[i]);
    return e;
}

double update_sigma_f(double sigma_f, double obs_cost_of_mean, double eta, double sigma_min) {
    if (!(sigma_f > 0)) throw InputError("sigma_f must be positive");
    if (obs_cost_of_mean > 0) return sigma_f;
    if (sigma_f > sigma_min) return std::max(eta * sigma_f, sigma_min);
    return sigma_min;
}

PlanResult plan(const Eigen::VectorXd& start, const Eigen::VectorXd& goal, const DistanceChecker& checker,
                const PlannerConfig& cfg, const CostSpec& spec, const RobotModel* model) {
    cfg.validate();
    spec.validate();
    if (start.size() != goal.size() || start.size() != checker.dims())
        throw InputError("start, goal and checker dimensions differ");
    if (!start.allFinite() || !goal.allFinite()) throw InputError("start and goal must be finite");

    const Eigen::VectorXd times = uniform_times(cfg.H);
    PlanResult result;
    Eigen::MatrixXd mean = condition_on_endpoints(times, start, goal, GpHyper{cfg.sigma_f_init, cfg.h}).mean();

    if (start == goal) {
        result.final_mean = mean;
        result.final_cost = evaluate_costs(mean, checker, spec, model);
        result.success = result.final_cost.obstacle == 0;
        return result;
    }

    double sigma = cfg.sigma_f_init;
    double prev_length = length_cost(mean);
    int quiet = 0;
    const auto n = static_cast<std::size_t>(cfg.num_samples);
    Eigen::VectorXd totals(cfg.num_samples);

    for (int t = 0; t < cfg.iters; ++t) {
        const GpPrior prior(times, mean, GpHyper{sigma, cfg.h});
        std::vector<Eigen::MatrixXd> samples =
            sample_trajectories(prior, cfg.num_samples, cfg.seed, static_cast<std::uint64_t>(t) << 20);

        std::vector<CostBreakdown> costs(n);
        parallel_for(cfg.num_samples, [&](std::ptrdiff_t i) {
            costs[static_cast<std::size_t>(i)] = evaluate_costs(samples[static_cast<std::size_t>(i)], checker, spec, model);
        });
        for (std::size_t i = 0; i < n; ++i) totals[static_cast<Eigen::Index>(i)] = costs[i].total;

        const Eigen::VectorXd w = weights_from_costs(totals);
        Eigen::MatrixXd next = weighted_update(mean, samples, w, cfg.gamma);
        if (!next.allFinite()) throw NumericalError("planner mean became non-finite at iteration " + std::to_string(t));

        const CostBreakdown c = evaluate_costs(next, checker, spec, model);
        IterationLog entry;
        entry.iter = t;
        entry.obstacle_cost = c.obstacle;
        entry.length = c.length;
        entry.total_cost = c.total;
        entry.sigma_f = sigma;
        entry.weight_entropy = weight_entropy(w);
        result.log.push_back(entry);

        if (cfg.keep_snapshots) {
            if (t == 0) result.first_samples = samples;
            result.last_samples = std::move(samples);
        }
        if (cfg.keep_mean_every > 0 && t % cfg.keep_mean_every == 0) result.means.emplace_back(t, next);

        if (cfg.kernel_update) sigma = update_sigma_f(sigma, c.obstacle, cfg.eta, cfg.sigma_min);
        mean = std::move(next);
        result.iterations = t + 1;

        if (cfg.early_stop) {
            const double rel = prev_length > 0 ? (prev_length - c.length) / prev_length : 0.0;
            const bool annealed = !cfg.kernel_update || sigma <= cfg.sigma_min;
            quiet = (c.obstacle == 0 && rel < cfg.early_stop_tol && annealed) ? quiet + 1 : 0;
            if (quiet >= cfg.early_stop_window) break;
        }
        prev_length = c.length;
    }

    result.final_mean = mean;
    result.final_cost = evaluate_costs(mean, checker, spec, model);
    result.success = result.final_cost.obstacle == 0;
    if (cfg.keep_mean_every > 0 && (result.means.empty() || result.means.back().first != result.iterations - 1))
        result.means.emplace_back(result.iterations - 1, mean);
    return result;
}

}  // namespace sdfplan
