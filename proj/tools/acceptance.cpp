// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdfplan/composite_sdf.hpp"
#include "sdfplan/config.hpp"
#include "sdfplan/gp_prior.hpp"
#include "sdfplan/manifest.hpp"
#include "sdfplan/mesh.hpp"
#include "sdfplan/mesh_sdf.hpp"
#include "sdfplan/mlp.hpp"
#include "sdfplan/parallel.hpp"
#include "sdfplan/planner.hpp"
#include "sdfplan/rng.hpp"
#include "sdfplan/robot_model.hpp"
#include "sdfplan/scenes.hpp"
#include "sdfplan/sdf_eval.hpp"
#include "sdfplan/time_param.hpp"
#include "sdfplan/train.hpp"

using namespace sdfplan;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path data;
    fs::path cache;
    std::uint64_t seed = 1;
    bool verbose = false;
};

void note(const Context& c, const std::string& s) {
    if (c.verbose) std::fprintf(stderr, "  %s\n", s.c_str());
}

// ------------------------------------------------------------ criterion 1

struct TrainedNet {
    MlpSdf net;
    double train_seconds = 0;
};

// Synthesizes and trains one link with the shipped training settings; the
// result and its training time are cached under a key of everything it
// depends on.
TrainedNet trained_net(const Context& c, const RobotModel& model, std::size_t k) {
    const RunConfig cfg = load_run_config(c.data / "configs/train_links.json");
    const fs::path mesh_path = *model.link(k).mesh;
    const std::string key = sha256_hex(cfg.to_json() + sha256_file(mesh_path) + std::to_string(c.seed) + kToolVersion)
                                .substr(0, 16);
    const fs::path net_path = c.cache / (model.link(k).name + "-" + key + ".sdfnet");
    const fs::path time_path = net_path.string() + ".seconds";
    if (fs::exists(net_path) && fs::exists(time_path)) {
        TrainedNet t{MlpSdf::load(net_path), 0};
        std::ifstream(time_path) >> t.train_seconds;
        note(c, "cached " + net_path.string());
        return t;
    }
    const MeshSdf sdf(load_mesh(mesh_path).mesh);
    const auto t0 = Clock::now();
    SynthesisParams sp = cfg.synthesis;
    sp.seed = c.seed + k;
    const LinkDataset ds = synthesize_dataset(sdf, sp, k, model.link(k).name);
    TrainConfig tc = cfg.train;
    tc.seed = c.seed;
    TrainedNet t{train_link_sdf(ds, tc, nullptr, sdf.mesh().bounding_radius()), 0};
    t.train_seconds = seconds_since(t0);
    fs::create_directories(c.cache);
    t.net.save(net_path);
    std::ofstream(time_path) << fmt("%.3f\n", t.train_seconds);
    return t;
}

Outcome criterion_sdf_accuracy(const Context& c) {
    const std::vector<Band> bands = {{0.0, 0.4}, {0.4, 1.2}};
    const RobotModel sphere = load_robot(c.data / "robots/sphere_link.json");
    const RobotModel panda = load_robot(c.data / "robots/panda_like.json");
    // the convex primitive and the longest arm link
    const std::vector<std::pair<const RobotModel*, std::size_t>> cases = {{&sphere, 0}, {&panda, *panda.find_link("link5")}};
    Outcome o{true, ""};
    for (const auto& [model, k] : cases) {
        const TrainedNet t = trained_net(c, *model, k);
        const MeshSdf sdf(load_mesh(*model->link(k).mesh).mesh);
        const auto rep = evaluate_bands(t.net, sdf, bands, 5000, c.seed + 1000);
        const bool ok = rep[0].samples > 0 && rep[1].samples > 0 && rep[0].rmsd_d <= 0.005 &&
                        rep[1].rmsd_d <= 0.008 && t.train_seconds <= 900;
        o.pass = o.pass && ok;
        o.detail += fmt("%s%s RMSD %.3f / %.3f cm, trained in %.0f s", o.detail.empty() ? "" : "; ",
                        model->link(k).name.c_str(), 100 * rep[0].rmsd_d, 100 * rep[1].rmsd_d, t.train_seconds);
    }
    return o;
}

// ------------------------------------------------------------ criterion 2

Outcome criterion_query_latency(const Context& c) {
    const RobotModel sphere = load_robot(c.data / "robots/sphere_link.json");
    const CompositeSdf sdf(sphere, {trained_net(c, sphere, 0).net});
    const Eigen::VectorXd q = Eigen::VectorXd::Zero(0);
    auto rng = stream_rng(c.seed, 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::pair<int, double>> lat;
    for (int n : {1, 10, 100, 1000, 10000}) {
        Eigen::Matrix3Xd p(3, n);
        for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
        std::vector<double> ts;
        for (int rep = 0; rep < 15; ++rep) {
            const auto t0 = Clock::now();
            const MinDistance md = composite_min_distance(sdf, q, p);
            ts.push_back(seconds_since(t0));
            if (!md.d.allFinite()) return {false, "non-finite distance"};
        }
        std::nth_element(ts.begin(), ts.begin() + ts.size() / 2, ts.end());
        lat.emplace_back(n, ts[ts.size() / 2]);
    }
    const double t1 = lat.front().second, t10k = lat.back().second;
    const double slope = std::log(t10k / t1) / std::log(10000.0);
    std::string table;
    for (const auto& [n, t] : lat) table += fmt(" %d:%.3fms", n, 1e3 * t);
    return {t10k <= 0.050 && slope < 1.0,
            fmt("10k points in %.1f ms on %d thread(s), log-log growth slope %.2f;%s", 1e3 * t10k, num_threads(), slope,
                table.c_str())};
}

// ------------------------------------------------------------ criterion 3

Outcome criterion_gp(const Context& c) {
    const auto t0 = Clock::now();
    const int H = 20;
    const Eigen::VectorXd start = Eigen::Vector2d(0.2, 0.5), goal = Eigen::Vector2d(0.8, 0.5);
    const GpHyper hyper{1.0, 0.1};
    const GpPrior prior = condition_on_endpoints(uniform_times(H), start, goal, hyper);
    const Eigen::VectorXd mv = prior.marginal_variance();
    const double end_var = std::max(std::abs(mv[0]), std::abs(mv[H]));

    const int n = 50000;
    const auto samples = sample_trajectories(prior, n, c.seed);
    bool pinned = true;
    Eigen::MatrixXd dev(H - 1, n);
    for (int s = 0; s < n; ++s) {
        pinned = pinned && samples[s].row(0) == start.transpose() && samples[s].row(H) == goal.transpose();
        dev.col(s) = samples[s].col(0).segment(1, H - 1) - prior.mean().col(0).segment(1, H - 1);
    }
    const Eigen::MatrixXd emp = dev * dev.transpose() / n;
    const Eigen::MatrixXd& K = prior.interior_covariance();
    double worst = 0;
    for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j)
            worst = std::max(worst, std::abs(emp(i, j) - K(i, j)) / std::sqrt(K(i, i) * K(j, j)));

    const GpPrior prior4 = condition_on_endpoints(uniform_times(H), start, goal, GpHyper{4.0, 0.1});
    const auto a = sample_trajectories(prior, 200, c.seed + 1), b = sample_trajectories(prior4, 200, c.seed + 1);
    double scale_err = 0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        const Eigen::MatrixXd da = a[s] - prior.mean(), db = b[s] - prior4.mean();
        scale_err = std::max(scale_err, (db - 4.0 * da).cwiseAbs().maxCoeff() / std::max(1e-300, da.cwiseAbs().maxCoeff()));
    }
    const double secs = seconds_since(t0);
    return {end_var <= 1e-10 && pinned && worst <= 0.05 && scale_err <= 1e-9 && secs <= 10,
            fmt("endpoint variance %.1e, pinning %s, covariance error %.2f%% of scale, sigma_f x4 error %.1e, %.1f s",
                end_var, pinned ? "exact" : "broken", 100 * worst, scale_err, secs)};
}

// ------------------------------------------------------------ criterion 4

Outcome criterion_kus(const Context& c) {
    const auto t0 = Clock::now();
    const RunConfig base = load_run_config(c.data / "configs/plan2d.json");
    const Scene2D scene = load_scene2d(c.data / "scenes/2d/concave_trap.json");
    const Scene2dChecker checker(scene);
    struct Variant {
        const char* name;
        bool kus;
        double sigma;
        int successes = 0;
        double length_sum = 0;
    };
    std::vector<Variant> vs = {{"KUS", true, base.planner.sigma_f_init},
                               {"fixed 0.001", false, 0.001},
                               {"fixed 0.02", false, 0.02}};
    const int seeds = 20;
    for (auto& v : vs) {
        for (int s = 0; s < seeds; ++s) {
            PlannerConfig pc = base.planner;
            pc.kernel_update = v.kus;
            pc.sigma_f_init = v.sigma;
            pc.seed = c.seed + s;
            const PlanResult r = plan(scene.start, scene.goal, checker, pc, base.cost);
            if (r.success) {
                ++v.successes;
                v.length_sum += r.final_cost.length;
            }
        }
    }
    const auto mean_len = [](const Variant& v) { return v.successes ? v.length_sum / v.successes : NAN; };
    const double secs = seconds_since(t0);
    const bool ok = vs[0].successes >= 16 && vs[1].successes <= 4 && vs[2].successes > 0 &&
                    mean_len(vs[2]) >= mean_len(vs[0]) && secs <= 300;
    return {ok, fmt("success KUS %d/20, fixed 0.001 %d/20, fixed 0.02 %d/20; mean length KUS %.4f vs fixed 0.02 %.4f; %.0f s",
                    vs[0].successes, vs[1].successes, vs[2].successes, mean_len(vs[0]), mean_len(vs[2]), secs)};
}

// ------------------------------------------------------------ criterion 5

Outcome criterion_thin_wall(const Context& c) {
    const RunConfig base = load_run_config(c.data / "configs/plan2d.json");
    const Scene2D scene = load_scene2d(c.data / "scenes/2d/thin_wall.json");
    const Scene2dChecker checker(scene);
    CostSpec dense = base.cost;
    dense.obstacle.interp_points = 200;
    const int seeds = 20;
    int violations[2] = {0, 0};
    const int interp[2] = {0, 5};
    for (int v = 0; v < 2; ++v) {
        for (int s = 0; s < seeds; ++s) {
            PlannerConfig pc = base.planner;
            pc.seed = c.seed + s;
            CostSpec cs = base.cost;
            cs.obstacle.interp_points = interp[v];
            const PlanResult r = plan(scene.start, scene.goal, checker, pc, cs);
            if (obstacle_cost(r.final_mean, checker, dense) > 0) ++violations[v];
        }
    }
    return {violations[0] >= seeds / 2 && seeds - violations[1] >= 0.9 * seeds,
            fmt("dense recheck violations: %d/20 without interpolation, %d/20 with 5 interpolants", violations[0],
                violations[1])};
}

// ------------------------------------------------------------ criterion 6

Outcome criterion_arm(const Context& c) {
    const auto t0 = Clock::now();
    RunConfig cfg = load_run_config(c.data / "configs/plan_arm.json");
    const RobotModel model = load_robot(c.data / "robots/panda_like.json");
    const CompositeSdf sdf = CompositeSdf::load(model, c.data / "nets");
    const Scene3D scene = load_scene3d(c.data / "scenes/arm/box_on_table.json");
    Scene3dChecker checker(scene, sdf);
    checker.set_far_field_margin(cfg.far_field_margin);
    cfg.cost.boundary.z_floor = scene.z_floor;
    const double eta = cfg.planner.eta, smin = cfg.planner.sigma_min, s0 = cfg.planner.sigma_f_init;

    int early = 0, shaped = 0;
    std::string firsts;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        PlannerConfig pc = cfg.planner;
        pc.seed = c.seed + s;
        const PlanResult r = plan(scene.start_q, scene.goal_q, checker, pc, cfg.cost, &model);
        int first = -1;
        for (const auto& e : r.log)
            if (e.obstacle_cost == 0) {
                first = e.iter;
                break;
            }
        // iteration indices start at 0, so "within 15 iterations" is index < 15
        if (first >= 0 && first < 15) ++early;
        firsts += fmt("%s%d", firsts.empty() ? "" : ",", first);

        // the sigma_f used at iteration k+1 follows from the mean's cost after iteration k
        bool ok = first >= 0 && !r.log.empty() && r.log.front().sigma_f == s0;
        for (std::size_t k = 0; ok && k + 1 < r.log.size(); ++k) {
            const double expect =
                r.log[k].obstacle_cost > 0 ? r.log[k].sigma_f : std::max(eta * r.log[k].sigma_f, smin);
            ok = std::abs(r.log[k + 1].sigma_f - expect) <= 1e-12 * expect;
            if (static_cast<int>(k) < first) ok = ok && r.log[k].sigma_f == s0;
        }
        ok = ok && std::abs(r.log.back().sigma_f - smin) <= 1e-12;
        if (ok) ++shaped;
    }
    const double secs = seconds_since(t0);
    return {early >= 8 && shaped >= 8,
            fmt("obstacle cost of the mean reached 0 within 15 iterations in %d/10 seeds (first zero at %s), sigma_f "
                "curve shape holds in %d/10; %.0f s",
                early, firsts.c_str(), shaped, secs)};
}

// ------------------------------------------------------------ criterion 7

double timed_duration(const Eigen::MatrixXd& waypoints, const Eigen::VectorXd& v, const Eigen::VectorXd& a,
                      int grid = 512) {
    return time_parameterize(SplinePath(waypoints), v, a, grid).duration();
}

Outcome criterion_topp(const Context& c) {
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    // 1 m at v 10, a 1 never reaches the velocity cap: 2 sqrt(d / a) = 2 s.
    const double tri = timed_duration(Eigen::VectorXd::LinSpaced(11, 0, 1), 10 * one, one);
    // 4 m at v 1, a 1: d / v + v / a = 5 s.
    const double trap = timed_duration(Eigen::VectorXd::LinSpaced(11, 0, 4), one, one);
    const double closed = std::max(std::abs(tri - 2.0) / 2.0, std::abs(trap - 5.0) / 5.0);

    // random smooth paths plus a planned arm path with the robot's scaled limits
    auto rng = stream_rng(c.seed, 7);
    std::uniform_real_distribution<double> u(-1, 1), lim(0.5, 2.0);
    double worst_util = 0, worst_refine = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int dims = 1 + trial % 7, H = 20;
        Eigen::MatrixXd w(H + 1, dims);
        Eigen::VectorXd v(dims), a(dims);
        for (int d = 0; d < dims; ++d) {
            v[d] = lim(rng);
            a[d] = lim(rng);
            double x = u(rng);
            for (int i = 0; i <= H; ++i) w(i, d) = x += 0.3 * u(rng);
        }
        const SplinePath path(w);
        const TimedTrajectory t = time_parameterize(path, v, a, 512);
        const LimitUtilization lu = limit_utilization(t, v, a);
        worst_util = std::max({worst_util, lu.velocity, lu.acceleration});
        const double fine = time_parameterize(path, v, a, 1024).duration();
        worst_refine = std::max(worst_refine, std::abs(t.duration() - fine) / fine);
    }
    const RobotModel model = load_robot(c.data / "robots/panda_like.json");
    const Scene3D scene = load_scene3d(c.data / "scenes/arm/box_on_table.json");
    Eigen::MatrixXd arm(21, scene.start_q.size());
    for (int i = 0; i <= 20; ++i) arm.row(i) = (scene.start_q + (scene.goal_q - scene.start_q) * (i / 20.0)).transpose();
    const Eigen::VectorXd va = model.vel_limits() * model.timing_limit_scale();
    const Eigen::VectorXd aa = model.acc_limits() * model.timing_limit_scale();
    const TimedTrajectory ta = time_parameterize(SplinePath(arm), va, aa);
    const LimitUtilization lu = limit_utilization(ta, va, aa);
    worst_util = std::max({worst_util, lu.velocity, lu.acceleration});

    return {closed <= 0.02 && worst_util <= 1.01 && worst_refine < 0.01,
            fmt("triangular %.4f s (2), trapezoidal %.4f s (5), peak utilization %.4f, grid 512 vs 1024 duration change "
                "%.3f%%",
                tri, trap, worst_util, 100 * worst_refine)};
}

// ------------------------------------------------------------ criterion 8

Outcome criterion_oracle(const Context& c) {
    const RobotModel model = load_robot(c.data / "robots/panda_like.json");
    const CompositeSdf sdf = CompositeSdf::load(model, c.data / "nets");
    const ExactComposite exact = ExactComposite::load(model);
    const std::vector<Band> bands = {{0.0, 0.4}, {0.4, 1.2}};

    // pooled per-link band RMSD of the shipped networks
    double se[2] = {0, 0};
    std::size_t cnt[2] = {0, 0};
    for (std::size_t k = 0; k < model.num_links(); ++k) {
        const auto rep = evaluate_bands(sdf.nets()[k], exact.meshes()[k], bands, 2000, c.seed + 2000, k);
        for (int b = 0; b < 2; ++b) {
            se[b] += rep[b].rmsd_d * rep[b].rmsd_d * rep[b].samples;
            cnt[b] += rep[b].samples;
        }
    }
    const double rmsd[2] = {std::sqrt(se[0] / cnt[0]), std::sqrt(se[1] / cnt[1])};

    // random configurations and workspace points inside every link's trusted radius, so no network is clamped
    auto rng = stream_rng(c.seed, 8);
    std::uniform_real_distribution<double> u01(0, 1);
    const Eigen::VectorXd lo = model.lower_limits(), hi = model.upper_limits();
    double err2[2] = {0, 0};
    int n[2] = {0, 0};
    int pairs = 0;
    while (pairs < 1000) {
        Eigen::VectorXd q(lo.size());
        for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = lo[i] + (hi[i] - lo[i]) * u01(rng);
        const Eigen::Vector3d p(1.6 * u01(rng) - 0.8, 1.6 * u01(rng) - 0.8, 1.3 * u01(rng) - 0.1);
        const LinkPoseSet poses = forward_kinematics(model, q);
        bool trusted = true;
        for (std::size_t k = 0; k < model.num_links(); ++k)
            trusted = trusted && (p - poses.poses[k].t).norm() <= sdf.nets()[k].trust_radius;
        if (!trusted) continue;
        const Eigen::Matrix3Xd pm = p;
        const double de = exact_composite_min_distance(exact, poses, pm).d[0];
        if (de < 0 || de > 1.2) continue;
        const double dl = composite_min_distance(sdf, poses, pm).d[0];
        const int b = de < 0.4 ? 0 : 1;
        err2[b] += (dl - de) * (dl - de);
        ++n[b];
        ++pairs;
    }
    const double rms[2] = {n[0] ? std::sqrt(err2[0] / n[0]) : 0.0, n[1] ? std::sqrt(err2[1] / n[1]) : 0.0};
    bool agree = true;
    for (int b = 0; b < 2; ++b) agree = agree && rms[b] <= 2 * rmsd[b];

    // rigid attachment: points fixed in a link frame keep their distance to that link for every q
    double spread_exact = 0, spread_net = 0;
    for (std::size_t k = 1; k < model.num_links(); ++k) {
        Eigen::Matrix3Xd local(3, 20);
        for (Eigen::Index i = 0; i < local.cols(); ++i)
            local.col(i) = Eigen::Vector3d(u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5) * 0.8;
        Eigen::VectorXd emin = Eigen::VectorXd::Constant(20, INFINITY), emax = -emin, nmin = emin, nmax = -emin;
        for (int t = 0; t < 10; ++t) {
            Eigen::VectorXd q(lo.size());
            for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = lo[i] + (hi[i] - lo[i]) * u01(rng);
            const LinkPoseSet poses = forward_kinematics(model, q);
            const Eigen::Matrix3Xd world = poses.poses[k].apply(local);
            const Eigen::MatrixXd learned = sdf.per_link(poses, world);
            for (Eigen::Index i = 0; i < local.cols(); ++i) {
                const double e = exact.meshes()[k].query(poses.poses[k].apply_inverse(Eigen::Vector3d(world.col(i)))).d;
                emin[i] = std::min(emin[i], e);
                emax[i] = std::max(emax[i], e);
                nmin[i] = std::min(nmin[i], learned(static_cast<Eigen::Index>(k), i));
                nmax[i] = std::max(nmax[i], learned(static_cast<Eigen::Index>(k), i));
            }
        }
        spread_exact = std::max(spread_exact, (emax - emin).maxCoeff());
        spread_net = std::max(spread_net, (nmax - nmin).maxCoeff());
    }
    const bool rigid = spread_exact <= 1e-9 && spread_net <= 2 * std::min(rmsd[0], rmsd[1]);
    return {agree && rigid,
            fmt("composite disagreement RMS %.3f / %.3f cm over %d / %d pairs vs band RMSD %.3f / %.3f cm; rigid "
                "spread exact %.1e m, learned %.1e m",
                100 * rms[0], 100 * rms[1], n[0], n[1], 100 * rmsd[0], 100 * rmsd[1], spread_exact, spread_net)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdfplan acceptance checks"};
    Context c;
    std::string data = SDFPLAN_DATA_DIR, cache = "acceptance_cache";
    std::vector<int> only;
    int threads = 0;
    app.add_option("--data", data, "Fixture directory")->capture_default_str();
    app.add_option("--cache", cache, "Directory for trained networks reused across runs")->capture_default_str();
    app.add_option("--seed", c.seed)->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0: runtime default)");
    app.add_option("--only", only, "Run only these criteria");
    app.add_flag("--verbose", c.verbose);
    CLI11_PARSE(app, argc, argv);
    c.data = data;
    c.cache = cache;
    set_num_threads(threads);

    const std::vector<std::pair<const char*, std::function<Outcome(const Context&)>>> checks = {
        {"SDF accuracy", criterion_sdf_accuracy},     {"batched query latency", criterion_query_latency},
        {"GP prior invariants", criterion_gp},        {"2D KUS ablation", criterion_kus},
        {"thin-obstacle interpolation", criterion_thin_wall}, {"arm planning", criterion_arm},
        {"time parameterization", criterion_topp},    {"oracle equivalence", criterion_oracle},
    };
    const std::set<int> selected(only.begin(), only.end());
    bool all = true;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = checks[i].second(c);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, checks[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
