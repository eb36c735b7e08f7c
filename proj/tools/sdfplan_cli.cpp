// sdfplan command-line tool: dataset synthesis, SDF training and evaluation,
// 2D and arm planning, time parameterization.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdfplan/composite_sdf.hpp"
#include "sdfplan/config.hpp"
#include "sdfplan/errors.hpp"
#include "sdfplan/manifest.hpp"
#include "sdfplan/mesh.hpp"
#include "sdfplan/parallel.hpp"
#include "sdfplan/planner.hpp"
#include "sdfplan/scenes.hpp"
#include "sdfplan/sdf_eval.hpp"
#include "sdfplan/time_param.hpp"
#include "sdfplan/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace sdfplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;

struct Globals {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string config;
    bool quiet = false;
    std::vector<std::string> argv;
};

RunConfig resolve_config(const Globals& g, RunManifest& m) {
    RunConfig c;
    if (!g.config.empty()) {
        c = load_run_config(g.config);
        m.add_input(g.config);
    }
    c.planner.seed = g.seed;
    c.train.seed = g.seed;
    c.synthesis.seed = g.seed;
    if (c.synthesis.offsets.empty()) c.synthesis.offsets = default_offsets(c.offset_scale);
    m.config_hash = sha256_hex(c.to_json());
    return c;
}

RunManifest start_manifest(const Globals& g, const std::string& command) {
    RunManifest m;
    m.command = command;
    m.argv = g.argv;
    m.seed = g.seed;
    m.threads = num_threads();
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& manifest, const std::vector<fs::path>& outputs) {
    for (const auto& o : outputs) m.add_output(o, manifest.parent_path());
    m.write(manifest);
}

std::vector<std::string> header(const fs::path& manifest, std::uint64_t seed) {
    return {"manifest: " + manifest.filename().string(), "seed: " + std::to_string(seed)};
}

Eigen::VectorXd parse_list(const std::string& text, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InputError(what + ": not a number: '" + tok + "'");
        }
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::size_t require_link(const RobotModel& model, const std::string& name) {
    const auto k = model.find_link(name);
    if (!k) throw InputError("robot has no link named '" + name + "'");
    return *k;
}

MeshSdf link_oracle(const RobotModel& model, std::size_t k) {
    const Link& link = model.link(k);
    if (!link.mesh) throw InputError("missing mesh for link '" + link.name + "'");
    MeshLoadResult r = load_mesh(*link.mesh);
    for (const auto& w : r.warnings) std::cerr << "warning: " << link.name << ": " << w << "\n";
    return MeshSdf(std::move(r.mesh));
}

// ---------------------------------------------------------------- make-mesh

struct MakeMeshArgs {
    std::string shape = "icosphere";
    double radius = 0.1;
    int subdivisions = 3;
    int segments = 32;
    std::string half_extents = "0.1,0.1,0.1";
    double max_edge = 0.02;
    std::string a = "0,0,0", b = "0,0,0.2";
    std::string out;
};

int cmd_make_mesh(const Globals& g, const MakeMeshArgs& a) {
    RunManifest m = start_manifest(g, "make-mesh");
    TriMesh mesh;
    std::string desc;
    if (a.shape == "icosphere") {
        mesh = make_icosphere(a.radius, a.subdivisions);
        desc = "icosphere radius " + std::to_string(a.radius);
    } else if (a.shape == "box") {
        const Eigen::VectorXd h = parse_list(a.half_extents, "--half-extents");
        if (h.size() != 3) throw InputError("--half-extents needs three numbers");
        mesh = make_box(h, a.max_edge);
        desc = "box";
    } else if (a.shape == "capsule") {
        const Eigen::VectorXd p = parse_list(a.a, "--a"), q = parse_list(a.b, "--b");
        if (p.size() != 3 || q.size() != 3) throw InputError("--a and --b need three numbers");
        mesh = make_capsule(p, q, a.radius, a.segments);
        desc = "capsule radius " + std::to_string(a.radius);
    } else {
        throw InputError("unknown shape '" + a.shape + "'");
    }
    write_obj(a.out, mesh, desc);
    finish_manifest(m, manifest_path_for(a.out), {a.out});
    if (!g.quiet) std::cout << "wrote " << a.out << " (" << mesh.vertices.cols() << " vertices)\n";
    return kExitOk;
}

// ------------------------------------------------------------ synth-dataset

struct SynthArgs {
    std::string robot, link, out, out_dir, offsets;
    std::optional<std::size_t> max_samples;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
    if (a.out.empty() == a.out_dir.empty()) throw InputError("give exactly one of --out (with --link) or --out-dir");
    const fs::path manifest = manifest_path_for(a.out.empty() ? fs::path(a.out_dir) / "datasets" : fs::path(a.out));
    RunManifest m = start_manifest(g, "synth-dataset");
    RunConfig cfg = resolve_config(g, m);
    if (!a.offsets.empty()) {
        const Eigen::VectorXd o = parse_list(a.offsets, "--offsets");
        cfg.synthesis.offsets.assign(o.data(), o.data() + o.size());
    }
    if (a.max_samples) cfg.synthesis.max_samples = *a.max_samples;
    m.config_hash = sha256_hex(cfg.to_json());

    const RobotModel model = load_robot(a.robot);
    m.add_input(a.robot);
    std::vector<std::size_t> links;
    if (!a.link.empty()) {
        links.push_back(require_link(model, a.link));
    } else {
        if (a.out_dir.empty()) throw InputError("--link is required with --out");
        for (std::size_t k = 0; k < model.num_links(); ++k) links.push_back(k);
    }
    if (!a.out_dir.empty()) fs::create_directories(a.out_dir);

    std::vector<fs::path> outputs;
    for (std::size_t k : links) {
        const MeshSdf sdf = link_oracle(model, k);
        m.add_input(*model.link(k).mesh);
        LinkDataset ds;
        {
            StageTimer t(m, "synthesize " + model.link(k).name);
            SynthesisParams p = cfg.synthesis;
            p.seed = g.seed + k;
            ds = synthesize_dataset(sdf, p, static_cast<int>(k), model.link(k).name);
        }
        const fs::path out = a.out.empty() ? fs::path(a.out_dir) / (model.link(k).name + ".dataset") : fs::path(a.out);
        save_dataset(out, ds);
        outputs.push_back(out);
        if (!g.quiet)
            std::cout << model.link(k).name << ": " << ds.samples.size() << " samples (" << ds.stats.candidates
                      << " candidates, " << ds.stats.inconsistent_vertices << " inconsistent vertices, "
                      << ds.stats.rejected_reprojection << " re-projection rejects)\n";
    }
    finish_manifest(m, manifest, outputs);
    return kExitOk;
}

// ---------------------------------------------------------------- train-sdf

struct TrainArgs {
    std::string robot, link, dataset, dataset_dir, out, out_dir;
    std::optional<int> epochs;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
    if (a.dataset.empty() == a.dataset_dir.empty()) throw InputError("give exactly one of --dataset or --dataset-dir");
    if (!a.dataset.empty() && a.out.empty()) throw InputError("--out is required with --dataset");
    if (!a.dataset_dir.empty() && a.out_dir.empty()) throw InputError("--out-dir is required with --dataset-dir");
    const fs::path manifest = manifest_path_for(a.out.empty() ? fs::path(a.out_dir) / "nets" : fs::path(a.out));
    RunManifest m = start_manifest(g, "train-sdf");
    RunConfig cfg = resolve_config(g, m);
    if (a.epochs) {
        cfg.train.epochs = *a.epochs;
        cfg.train.lr_step_epochs = std::max(1, *a.epochs / 3);
    }
    cfg.train.validate();
    m.config_hash = sha256_hex(cfg.to_json());
    const RobotModel model = load_robot(a.robot);
    m.add_input(a.robot);

    std::vector<std::pair<fs::path, fs::path>> jobs;  // dataset, net
    if (!a.dataset.empty()) {
        jobs.emplace_back(a.dataset, a.out);
    } else {
        fs::create_directories(a.out_dir);
        for (const auto& link : model.links())
            jobs.emplace_back(fs::path(a.dataset_dir) / (link.name + ".dataset"),
                              fs::path(a.out_dir) / (link.name + ".sdfnet"));
    }

    std::vector<fs::path> outputs;
    for (const auto& [ds_path, net_path] : jobs) {
        const LinkDataset ds = load_dataset(ds_path);
        m.add_input(ds_path);
        const std::string link_name = !a.link.empty() ? a.link : ds.link_name;
        const std::size_t k = require_link(model, link_name);
        const MeshSdf sdf = link_oracle(model, k);
        TrainReport rep;
        MlpSdf net;
        {
            StageTimer t(m, "train " + link_name);
            net = train_link_sdf(ds, cfg.train, &rep, sdf.mesh().bounding_radius());
        }
        auto prov = nlohmann::json::parse(net.provenance);
        prov["dataset_sha256"] = m.inputs.back().sha256;
        prov["manifest"] = manifest.filename().string();
        net.provenance = prov.dump();
        net.save(net_path);
        outputs.push_back(net_path);
        if (!g.quiet)
            std::printf("%s: %zu train / %zu val samples, val RMSD d %.3f cm, alignment %.4f\n", link_name.c_str(),
                        rep.train_size, rep.val_size, 100 * rep.val_rmsd_d, rep.val_rmsd_align);
    }
    finish_manifest(m, manifest, outputs);
    return kExitOk;
}

// ----------------------------------------------------------------- eval-sdf

struct EvalArgs {
    std::string robot, nets, link, out;
    std::size_t points = 2000;
    std::string bands = "0,0.4,0.8,1.2";
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
    RunManifest m = start_manifest(g, "eval-sdf");
    const RobotModel model = load_robot(a.robot);
    m.add_input(a.robot);
    const std::vector<Band> bands = parse_bands(a.bands);
    std::vector<std::size_t> links;
    if (!a.link.empty()) {
        links.push_back(require_link(model, a.link));
    } else {
        for (std::size_t k = 0; k < model.num_links(); ++k) links.push_back(k);
    }

    std::ostringstream rep;
    rep << "sdfplan-sdf-report 1\n";
    if (!a.out.empty()) rep << "# manifest: " << manifest_path_for(a.out).filename().string() << "\n";
    rep << "# seed: " << g.seed << "\n";
    char buf[64];
    for (std::size_t k : links) {
        const fs::path net_path = fs::path(a.nets) / (model.link(k).name + ".sdfnet");
        const MlpSdf net = MlpSdf::load(net_path);
        m.add_input(net_path);
        const MeshSdf sdf = link_oracle(model, k);
        std::vector<BandReport> r;
        {
            StageTimer t(m, "evaluate " + model.link(k).name);
            r = evaluate_bands(net, sdf, bands, a.points, g.seed, k);
        }
        rep << "\nlink " << model.link(k).name << "\n";
        rep << "band (cm)      ";
        for (const auto& b : r) {
            std::snprintf(buf, sizeof buf, " %14s",
                          ("[" + std::to_string(static_cast<int>(std::lround(100 * b.band.lo))) + ", " +
                           std::to_string(static_cast<int>(std::lround(100 * b.band.hi))) + "]")
                              .c_str());
            rep << buf;
        }
        rep << "\nsamples       ";
        for (const auto& b : r) {
            std::snprintf(buf, sizeof buf, " %14zu", b.samples);
            rep << buf;
        }
        rep << "\nRMSD, d (cm)  ";
        for (const auto& b : r) {
            if (b.samples == 0) std::snprintf(buf, sizeof buf, " %14s", "empty");
            else std::snprintf(buf, sizeof buf, " %14.3f", 100 * b.rmsd_d);
            rep << buf;
        }
        rep << "\nRMSD, n       ";
        for (const auto& b : r) {
            if (b.samples == 0) std::snprintf(buf, sizeof buf, " %14s", "empty");
            else std::snprintf(buf, sizeof buf, " %14.4f", b.rmsd_align);
            rep << buf;
        }
        rep << "\n";
    }
    if (!g.quiet) std::cout << rep.str();
    if (!a.out.empty()) {
        std::ofstream(a.out, std::ios::binary) << rep.str();
        finish_manifest(m, manifest_path_for(a.out), {a.out});
    }
    return kExitOk;
}

// ------------------------------------------------------------------- plan2d

struct PlanArgs {
    std::string robot, scene, nets, out;
    bool exact = false;
    bool no_kus = false;
    std::optional<double> sigma_f;
    std::optional<int> interp_points;
    std::optional<int> iters;
};

void apply_overrides(RunConfig& cfg, const PlanArgs& a) {
    if (a.no_kus) cfg.planner.kernel_update = false;
    if (a.sigma_f) cfg.planner.sigma_f_init = *a.sigma_f;
    if (a.interp_points) cfg.cost.obstacle.interp_points = *a.interp_points;
    if (a.iters) cfg.planner.iters = *a.iters;
    cfg.planner.validate();
    cfg.cost.validate();
}

void report_plan(const Globals& g, const PlanResult& r) {
    if (g.quiet) return;
    std::printf("%s after %d iterations: obstacle cost %g, length %.6g, final sigma_f %g\n",
                r.success ? "success" : "FAILED", r.iterations, r.final_cost.obstacle, r.final_cost.length,
                r.log.empty() ? 0.0 : r.log.back().sigma_f);
}

int cmd_plan2d(const Globals& g, const PlanArgs& a) {
    RunManifest m = start_manifest(g, "plan2d");
    RunConfig cfg = resolve_config(g, m);
    apply_overrides(cfg, a);
    cfg.planner.keep_snapshots = true;
    m.config_hash = sha256_hex(cfg.to_json());
    const Scene2D scene = load_scene2d(a.scene);
    m.add_input(a.scene);
    const Scene2dChecker checker(scene);
    cfg.cost.boundary.enabled = false;

    PlanResult r;
    {
        StageTimer t(m, "plan");
        r = plan(scene.start, scene.goal, checker, cfg.planner, cfg.cost);
    }
    const fs::path out(a.out);
    const fs::path manifest = manifest_path_for(out);
    const auto hdr = header(manifest, g.seed);
    const fs::path traj = out.string() + ".traj", log = out.string() + ".log", samples = out.string() + ".samples",
                   means = out.string() + ".means";
    write_trajectory(traj, r.final_mean, hdr);
    write_plan_log(log, r, hdr);
    write_samples(samples, {{"first", &r.first_samples}, {"last", &r.last_samples}}, hdr);
    write_means(means, r.means, hdr);
    finish_manifest(m, manifest, {traj, log, samples, means});
    report_plan(g, r);
    return r.success ? kExitOk : kExitFailed;
}

// ----------------------------------------------------------------- plan-arm

struct ArmContext {
    RobotModel model;
    std::optional<CompositeSdf> sdf;
    std::optional<ExactComposite> exact;
};

ArmContext load_arm(const std::string& robot, const std::string& nets, bool exact, RunManifest& m) {
    ArmContext c{load_robot(robot), {}, {}};
    m.add_input(robot);
    if (exact) {
        c.exact = ExactComposite::load(c.model);
        for (const auto& l : c.model.links()) m.add_input(*l.mesh);
    } else {
        if (nets.empty()) throw InputError("give --nets <dir> or --exact");
        c.sdf = CompositeSdf::load(c.model, nets);
        for (const auto& l : c.model.links()) m.add_input(fs::path(nets) / (l.name + ".sdfnet"));
    }
    return c;
}

std::unique_ptr<Scene3dChecker> make_arm_checker(const ArmContext& c, const Scene3D& scene, double margin) {
    auto chk = c.sdf ? std::make_unique<Scene3dChecker>(scene, *c.sdf) : std::make_unique<Scene3dChecker>(scene, *c.exact);
    chk->set_far_field_margin(margin);
    return chk;
}

int cmd_plan_arm(const Globals& g, const PlanArgs& a) {
    RunManifest m = start_manifest(g, "plan-arm");
    RunConfig cfg = resolve_config(g, m);
    apply_overrides(cfg, a);
    const ArmContext ctx = load_arm(a.robot, a.nets, a.exact, m);
    const Scene3D scene = load_scene3d(a.scene);
    m.add_input(a.scene);
    cfg.cost.boundary.z_floor = scene.z_floor;
    m.config_hash = sha256_hex(cfg.to_json());
    const auto checker = make_arm_checker(ctx, scene, cfg.far_field_margin);

    PlanResult r;
    {
        StageTimer t(m, "plan");
        r = plan(scene.start_q, scene.goal_q, *checker, cfg.planner, cfg.cost, &ctx.model);
    }
    const fs::path out(a.out);
    const fs::path manifest = manifest_path_for(out);
    const auto hdr = header(manifest, g.seed);
    const fs::path traj = out.string() + ".traj", log = out.string() + ".log", means = out.string() + ".means";
    write_trajectory(traj, r.final_mean, hdr);
    write_plan_log(log, r, hdr);
    write_means(means, r.means, hdr);
    finish_manifest(m, manifest, {traj, log, means});
    report_plan(g, r);
    return r.success ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------- timeparam

struct TimeArgs {
    std::string trajectory, robot, vel, acc, out, scene, nets;
    bool exact = false;
    int grid = 512;
};

int cmd_timeparam(const Globals& g, const TimeArgs& a) {
    RunManifest m = start_manifest(g, "timeparam");
    const Eigen::MatrixXd states = read_trajectory(a.trajectory);
    m.add_input(a.trajectory);
    Eigen::VectorXd vel, acc;
    std::optional<ArmContext> arm;
    if (!a.robot.empty()) {
        if (!a.scene.empty()) {
            arm = load_arm(a.robot, a.nets, a.exact, m);
        } else {
            arm = ArmContext{load_robot(a.robot), {}, {}};
            m.add_input(a.robot);
        }
        vel = arm->model.vel_limits() * arm->model.timing_limit_scale();
        acc = arm->model.acc_limits() * arm->model.timing_limit_scale();
    }
    if (!a.vel.empty()) vel = parse_list(a.vel, "--vel-limits");
    if (!a.acc.empty()) acc = parse_list(a.acc, "--acc-limits");
    if (vel.size() == 0 || acc.size() == 0) throw InputError("give --robot or both --vel-limits and --acc-limits");
    if (vel.size() != states.cols() || acc.size() != states.cols())
        throw InputError("limit vectors must have one entry per trajectory column");

    TimedTrajectory timed;
    SplinePath path;
    {
        StageTimer t(m, "time parameterization");
        path = SplinePath(states);
        timed = time_parameterize(path, vel, acc, a.grid);
    }
    for (const auto& w : path.warnings()) std::cerr << "warning: " << w << "\n";
    const LimitUtilization u = limit_utilization(timed, vel, acc);

    std::optional<double> recheck;
    if (!a.scene.empty()) {
        if (!arm) throw InputError("--scene needs --robot");
        const Scene3D scene = load_scene3d(a.scene);
        m.add_input(a.scene);
        RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
        const auto checker = make_arm_checker(*arm, scene, cfg.far_field_margin);
        const Eigen::VectorXd d = checker->distances(timed.q);
        recheck = static_cast<double>((d.array() <= cfg.cost.obstacle.epsilon).count());
    }

    const fs::path manifest = manifest_path_for(a.out);
    auto hdr = header(manifest, g.seed);
    char buf[160];
    std::snprintf(buf, sizeof buf, "duration %.17g s, velocity utilization %.6f, acceleration utilization %.6f",
                  timed.duration(), u.velocity, u.acceleration);
    hdr.emplace_back(buf);
    write_timed_trajectory(a.out, timed, hdr);
    finish_manifest(m, manifest, {a.out});
    if (!g.quiet) {
        std::printf("duration %.6f s\npeak velocity utilization %.4f\npeak acceleration utilization %.4f\n",
                    timed.duration(), u.velocity, u.acceleration);
        if (recheck) std::printf("timed-trajectory obstacle recheck: %g samples within clearance\n", *recheck);
    }
    return kExitOk;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const Globals& g, const std::string& manifest) {
    const auto bad = verify_manifest(manifest);
    for (const auto& b : bad) std::cerr << "hash mismatch: " << b << "\n";
    if (!g.quiet && bad.empty()) std::cout << "all outputs verify\n";
    return bad.empty() ? kExitOk : kExitFailed;
}

void print_error(const char* kind, const std::string& msg) {
    nlohmann::json j = {{"error", kind}, {"message", msg}};
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdfplan: learned signed distance fields and stochastic trajectory optimization"};
    app.require_subcommand(1);
    Globals g;
    for (int i = 0; i < argc; ++i) g.argv.emplace_back(argv[i]);
    app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0: runtime default)")->capture_default_str();
    app.add_option("--config", g.config, "Settings file (sdfplan-config JSON)");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    MakeMeshArgs mm;
    auto* c_mesh = app.add_subcommand("make-mesh", "Write a primitive triangle mesh (OBJ)");
    c_mesh->add_option("--shape", mm.shape, "icosphere | box | capsule")->capture_default_str();
    c_mesh->add_option("--radius", mm.radius)->capture_default_str();
    c_mesh->add_option("--subdivisions", mm.subdivisions)->capture_default_str();
    c_mesh->add_option("--segments", mm.segments)->capture_default_str();
    c_mesh->add_option("--half-extents", mm.half_extents)->capture_default_str();
    c_mesh->add_option("--max-edge", mm.max_edge)->capture_default_str();
    c_mesh->add_option("--a", mm.a, "Capsule axis start x,y,z")->capture_default_str();
    c_mesh->add_option("--b", mm.b, "Capsule axis end x,y,z")->capture_default_str();
    c_mesh->add_option("--out", mm.out)->required();

    SynthArgs sa;
    auto* c_synth = app.add_subcommand("synth-dataset", "Synthesize per-link SDF training data");
    c_synth->add_option("--robot", sa.robot, "Robot description")->required();
    c_synth->add_option("--link", sa.link, "Link name (default: every link, needs --out-dir)");
    c_synth->add_option("--offsets", sa.offsets, "Comma-separated surface offsets in meters");
    c_synth->add_option("--max-samples", sa.max_samples);
    c_synth->add_option("--out", sa.out, "Dataset file");
    c_synth->add_option("--out-dir", sa.out_dir, "Directory for <link>.dataset files");

    TrainArgs ta;
    auto* c_train = app.add_subcommand("train-sdf", "Train per-link SDF networks");
    c_train->add_option("--robot", ta.robot, "Robot description")->required();
    c_train->add_option("--link", ta.link, "Override the dataset's link name");
    c_train->add_option("--dataset", ta.dataset);
    c_train->add_option("--dataset-dir", ta.dataset_dir, "Directory of <link>.dataset files");
    c_train->add_option("--epochs", ta.epochs);
    c_train->add_option("--out", ta.out, "Network file");
    c_train->add_option("--out-dir", ta.out_dir, "Directory for <link>.sdfnet files");

    EvalArgs ea;
    auto* c_eval = app.add_subcommand("eval-sdf", "Per-band accuracy of trained networks against the mesh oracle");
    c_eval->add_option("--robot", ea.robot)->required();
    c_eval->add_option("--nets", ea.nets, "Directory of <link>.sdfnet files")->required();
    c_eval->add_option("--link", ea.link);
    c_eval->add_option("--points", ea.points, "Points per band")->capture_default_str();
    c_eval->add_option("--bands", ea.bands, "Band edges or intervals in meters")->capture_default_str();
    c_eval->add_option("--out", ea.out, "Report file");

    PlanArgs p2;
    auto* c_plan2d = app.add_subcommand("plan2d", "Plan for a point robot in a 2D scene");
    c_plan2d->add_option("--scene", p2.scene)->required();
    c_plan2d->add_option("--out", p2.out, "Output prefix")->required();
    c_plan2d->add_flag("--no-kus", p2.no_kus, "Keep sigma_f fixed");
    c_plan2d->add_option("--sigma-f", p2.sigma_f, "Initial sigma_f");
    c_plan2d->add_option("--interp-points", p2.interp_points);
    c_plan2d->add_option("--iters", p2.iters);

    PlanArgs pa;
    auto* c_arm = app.add_subcommand("plan-arm", "Plan for the arm in a sphere scene");
    c_arm->add_option("--robot", pa.robot)->required();
    c_arm->add_option("--scene", pa.scene)->required();
    c_arm->add_option("--nets", pa.nets, "Directory of <link>.sdfnet files");
    c_arm->add_flag("--exact", pa.exact, "Use the mesh oracle instead of networks");
    c_arm->add_option("--out", pa.out, "Output prefix")->required();
    c_arm->add_flag("--no-kus", pa.no_kus, "Keep sigma_f fixed");
    c_arm->add_option("--sigma-f", pa.sigma_f, "Initial sigma_f");
    c_arm->add_option("--interp-points", pa.interp_points);
    c_arm->add_option("--iters", pa.iters);

    TimeArgs tp;
    auto* c_time = app.add_subcommand("timeparam", "Time-optimal timing of a waypoint trajectory");
    c_time->add_option("--trajectory", tp.trajectory)->required();
    c_time->add_option("--robot", tp.robot, "Take scaled limits from the robot description");
    c_time->add_option("--vel-limits", tp.vel, "Comma-separated velocity limits");
    c_time->add_option("--acc-limits", tp.acc, "Comma-separated acceleration limits");
    c_time->add_option("--grid", tp.grid)->capture_default_str();
    c_time->add_option("--scene", tp.scene, "Arm scene for an obstacle recheck of the timed samples");
    c_time->add_option("--nets", tp.nets);
    c_time->add_flag("--exact", tp.exact);
    c_time->add_option("--out", tp.out)->required();

    std::string manifest;
    auto* c_verify = app.add_subcommand("verify", "Re-hash the outputs listed in a manifest");
    c_verify->add_option("manifest", manifest)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        set_num_threads(g.threads);
        if (*c_mesh) return cmd_make_mesh(g, mm);
        if (*c_synth) return cmd_synth(g, sa);
        if (*c_train) return cmd_train(g, ta);
        if (*c_eval) return cmd_eval(g, ea);
        if (*c_plan2d) return cmd_plan2d(g, p2);
        if (*c_arm) return cmd_plan_arm(g, pa);
        if (*c_time) return cmd_timeparam(g, tp);
        if (*c_verify) return cmd_verify(g, manifest);
    } catch (const InputError& e) {
        print_error("input", e.what());
        return kExitInput;
    } catch (const NumericalError& e) {
        print_error("numerical", e.what());
        return kExitFailed;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return kExitFailed;
    }
    return kExitInput;
}
