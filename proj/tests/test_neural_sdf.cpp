#include <chrono>
#include <cmath>
#include <doctest.h>
#include "sdfplan/composite_sdf.hpp"
#include "sdfplan/errors.hpp"
#include "sdfplan/mesh.hpp"
#include "sdfplan/mesh_sdf.hpp"
#include "sdfplan/mlp.hpp"
#include "sdfplan/parallel.hpp"
#include "sdfplan/sdf_eval.hpp"
#include "sdfplan/train.hpp"
#include "support.hpp"

using namespace sdfplan;
using testing::Gen;

namespace {

// Pre-activation signs of every hidden unit; a change between two inputs
// means a rectifier gate lies between them.
std::vector<bool> gate_pattern(const MlpSdf& net, const Eigen::Vector3d& p) {
    std::vector<bool> out;
    Eigen::VectorXd a = p;
    const auto& L = net.layers();
    for (std::size_t l = 0; l + 1 < L.size(); ++l) {
        const Eigen::VectorXd z = L[l].W * a + L[l].b;
        for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z[i] > 0);
        a = z.cwiseMax(0.0);
    }
    return out;
}

double forward_reference(const MlpSdf& net, const Eigen::Vector3d& p) {
    Eigen::VectorXd a = p;
    const auto& L = net.layers();
    for (std::size_t l = 0; l < L.size(); ++l) {
        a = L[l].W * a + L[l].b;
        if (l + 1 < L.size()) a = a.cwiseMax(0.0);
    }
    return a[0];
}

LinkDataset sphere_dataset(std::size_t n, std::uint64_t seed) {
    const MeshSdf ico(make_icosphere(0.1, 3));
    SynthesisParams sp;
    sp.offsets = default_offsets();
    sp.max_samples = n;
    sp.seed = seed;
    return synthesize_dataset(ico, sp, 0, "sphere");
}

RobotModel two_link_robot() {
    // two fixed links, the second offset by 0.3 m along x
    std::vector<Link> links(2);
    links[0].name = "a";
    links[1].name = "b";
    links[1].joint.origin = Rigid::translation({0.3, 0, 0});
    return RobotModel("pair", links);
}

RobotModel revolute_pair() {
    std::vector<Link> links(2);
    links[0].name = "a";
    links[0].joint.kind = JointKind::Revolute;
    links[0].joint.lower = -3;
    links[0].joint.upper = 3;
    links[1].name = "b";
    links[1].joint.kind = JointKind::Revolute;
    links[1].joint.axis = Eigen::Vector3d::UnitY();
    links[1].joint.origin = Rigid::translation({0.3, 0, 0});
    links[1].joint.lower = -3;
    links[1].joint.upper = 3;
    return RobotModel("arm", links);
}

}  // namespace

TEST_SUITE("neural_sdf") {

TEST_CASE("zero weights give the output bias") {
    MlpSdf net = MlpSdf::random(MlpSdf::default_shape(), 1);
    for (auto& l : net.layers()) {
        l.W.setZero();
        l.b.setZero();
    }
    net.layers().back().b[0] = 0.37;
    Gen g(1);
    Eigen::Matrix3Xd p(3, 10);
    for (int i = 0; i < 10; ++i) p.col(i) = g.point(1.0);
    CHECK((net.evaluate(p).array() == 0.37).all());
}

TEST_CASE("linear network has its weight vector as gradient") {
    DenseLayer l;
    l.W = Eigen::RowVector3d(0.2, -1.5, 3.0);
    l.b = Eigen::VectorXd::Constant(1, 0.1);
    const MlpSdf net({l});
    Gen g(2);
    Eigen::Matrix3Xd p(3, 5);
    for (int i = 0; i < 5; ++i) p.col(i) = g.point(1.0);
    Eigen::VectorXd d;
    Eigen::Matrix3Xd grad;
    net.evaluate_with_gradient(p, d, grad);
    for (int i = 0; i < 5; ++i) {
        CHECK((grad.col(i) - Eigen::Vector3d(0.2, -1.5, 3.0)).norm() == 0.0);
        CHECK(d[i] == doctest::Approx(l.W.row(0).dot(p.col(i)) + 0.1).epsilon(1e-14));
    }
}

TEST_CASE("forward pass matches a reference loop") {
    const MlpSdf net = MlpSdf::random(MlpSdf::default_shape(), 3);
    CHECK(net.has_default_shape());
    CHECK(net.num_parameters() == 3 * 64 + 64 + 3 * (64 * 64 + 64) + 64 + 1);
    Gen g(3);
    Eigen::Matrix3Xd p(3, 100);
    for (int i = 0; i < 100; ++i) p.col(i) = g.point(1.0);
    const Eigen::VectorXd d = net.evaluate(p);
    for (int i = 0; i < 100; ++i) CHECK(std::abs(d[i] - forward_reference(net, p.col(i))) < 1e-12);
}

TEST_CASE("input gradient matches central differences away from gates") {
    const MlpSdf net = MlpSdf::random(MlpSdf::default_shape(), 4);
    Gen g(4);
    const double h = 1e-5;
    int tested = 0, resampled = 0;
    while (tested < 1000) {
        const Eigen::Vector3d p = g.point(1.0);
        const auto pattern = gate_pattern(net, p);
        bool near_gate = false;
        for (int a = 0; a < 3 && !near_gate; ++a)
            for (double s : {-h, h})
                if (gate_pattern(net, p + s * Eigen::Vector3d::Unit(a)) != pattern) near_gate = true;
        if (near_gate) {
            ++resampled;
            continue;
        }
        Eigen::Matrix3Xd one = p;
        Eigen::VectorXd d;
        Eigen::Matrix3Xd grad;
        net.evaluate_with_gradient(one, d, grad);
        Eigen::Vector3d fd;
        for (int a = 0; a < 3; ++a) {
            const Eigen::Vector3d e = h * Eigen::Vector3d::Unit(a);
            fd[a] = (forward_reference(net, p + e) - forward_reference(net, p - e)) / (2 * h);
        }
        CHECK((grad.col(0) - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
        ++tested;
    }
    CHECK(resampled < 200);
}

TEST_CASE("loss gradient matches finite differences over parameters") {
    const MlpSdf net = MlpSdf::random({3, 8, 8, 1}, 5);
    const LinkDataset ds = sphere_dataset(64, 5);
    const SampleBatch batch = SampleBatch::from(ds.samples);
    TrainConfig cfg;
    cfg.lambda_n = 0.3;
    std::vector<DenseLayer> grad;
    const double loss = loss_and_gradient(net, batch, cfg, grad);
    CHECK(loss > 0);

    TrainConfig fd_cfg = cfg;
    fd_cfg.finite_difference_alignment = true;
    std::vector<DenseLayer> grad_fd_flag;
    const double loss_fd_flag = loss_and_gradient(net, batch, fd_cfg, grad_fd_flag);
    CHECK(loss_fd_flag == doctest::Approx(loss).epsilon(1e-6));

    const double h = 1e-6;
    double max_rel = 0, max_rel_flag = 0;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        for (Eigen::Index i = 0; i < net.layers()[l].W.size(); ++i) {
            MlpSdf plus = net, minus = net;
            plus.layers()[l].W.data()[i] += h;
            minus.layers()[l].W.data()[i] -= h;
            std::vector<DenseLayer> dummy;
            const double fd = (loss_and_gradient(plus, batch, cfg, dummy) - loss_and_gradient(minus, batch, cfg, dummy)) / (2 * h);
            const double an = grad[l].W.data()[i];
            const double scale = std::max(1e-3, std::abs(fd));
            max_rel = std::max(max_rel, std::abs(an - fd) / scale);
            max_rel_flag = std::max(max_rel_flag, std::abs(grad_fd_flag[l].W.data()[i] - fd) / scale);
        }
        for (Eigen::Index i = 0; i < net.layers()[l].b.size(); ++i) {
            MlpSdf plus = net, minus = net;
            plus.layers()[l].b[i] += h;
            minus.layers()[l].b[i] -= h;
            std::vector<DenseLayer> dummy;
            const double fd = (loss_and_gradient(plus, batch, cfg, dummy) - loss_and_gradient(minus, batch, cfg, dummy)) / (2 * h);
            max_rel = std::max(max_rel, std::abs(grad[l].b[i] - fd) / std::max(1e-3, std::abs(fd)));
        }
    }
    CHECK(max_rel < 1e-4);
    CHECK(max_rel_flag < 1e-2);
}

TEST_CASE("training memorizes a single repeated sample") {
    SdfSample s;
    s.p = Eigen::Vector3d(0.1, 0.05, -0.02);
    s.d = 0.07;
    s.n = Eigen::Vector3d(1, 1, 0).normalized();
    LinkDataset ds;
    ds.samples.assign(64, s);
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 64;
    cfg.lr_step_epochs = 200;
    TrainReport rep;
    const MlpSdf net = train_link_sdf(ds, cfg, &rep);
    REQUIRE(rep.epochs.size() == 400);
    CHECK(rep.epochs.back().train_loss < 1e-6);
    CHECK(std::abs(net.evaluate(Eigen::Matrix3Xd(s.p))[0] - 0.07) < 1e-3);
}

TEST_CASE("training configuration is validated") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.validation_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    LinkDataset empty;
    CHECK_THROWS_AS(train_link_sdf(empty, TrainConfig{}), InputError);
}

TEST_CASE("trained sphere network is accurate near the surface") {
    const LinkDataset ds = sphere_dataset(4000, 6);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.batch_size = 256;
    cfg.seed = 6;
    TrainReport rep;
    const MlpSdf net = train_link_sdf(ds, cfg, &rep, 0.1);
    CHECK(rep.val_rmsd_d <= 5e-3);
    Gen g(6);
    Eigen::Matrix3Xd p(3, 50);
    for (int i = 0; i < 50; ++i) p.col(i) = 0.25 * g.unit();
    const Eigen::VectorXd d = net.evaluate(p);
    for (int i = 0; i < 50; ++i) CHECK(std::abs(d[i] - 0.15) < 5e-3);

    const MeshSdf ico(make_icosphere(0.1, 3));
    const auto bands = evaluate_bands(net, ico, {{0.0, 0.4}}, 1000, 6);
    CHECK(bands[0].samples == 1000);
    CHECK(bands[0].rmsd_d <= 5e-3);
}

TEST_CASE("alignment term improves normal alignment") {
    const LinkDataset ds = sphere_dataset(2000, 7);
    TrainConfig cfg;
    cfg.epochs = 120;
    cfg.batch_size = 256;
    cfg.seed = 7;
    TrainReport with, without;
    train_link_sdf(ds, cfg, &with);
    cfg.lambda_n = 0.0;
    train_link_sdf(ds, cfg, &without);
    CHECK(with.val_rmsd_align < without.val_rmsd_align);
}

TEST_CASE("network files round-trip exactly") {
    MlpSdf net = MlpSdf::random(MlpSdf::default_shape(), 9);
    net.bound_radius = 0.12;
    net.provenance = R"({"seed": 9})";
    const auto dir = testing::scratch_dir("net");
    net.save(dir / "a.sdfnet");
    const MlpSdf back = MlpSdf::load(dir / "a.sdfnet");
    REQUIRE(back.shape() == net.shape());
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        CHECK((back.layers()[l].W - net.layers()[l].W).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.layers()[l].b - net.layers()[l].b).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(back.bound_radius == 0.12);
    CHECK(back.provenance == net.provenance);
    testing::spit(dir / "bad.sdfnet", "not a network");
    CHECK_THROWS_AS(MlpSdf::load(dir / "bad.sdfnet"), InputError);
    CHECK_THROWS_AS(MlpSdf::load(dir / "missing.sdfnet"), InputError);
}

TEST_CASE("exact composite examples") {
    const MeshSdf ico(make_icosphere(0.1, 3));
    std::vector<Link> one(1);
    one[0].name = "s";
    const ExactComposite single(RobotModel("s", one), {ico});
    Gen g(10);
    Eigen::Matrix3Xd p(3, 20);
    for (int i = 0; i < 20; ++i) p.col(i) = 0.3 * g.unit();
    const MinDistance md = exact_composite_min_distance(single, Eigen::VectorXd(), p);
    for (int i = 0; i < 20; ++i) CHECK(std::abs(md.d[i] - 0.2) < 2e-3);

    // surface points of every link at an arbitrary pose
    const ExactComposite arm(revolute_pair(), {ico, ico});
    Eigen::VectorXd q(2);
    q << 0.7, -1.1;
    const LinkPoseSet poses = forward_kinematics(arm.model(), q);
    Eigen::Matrix3Xd surf(3, 10);
    for (int i = 0; i < 10; ++i) surf.col(i) = poses.poses[i % 2].apply(Eigen::Vector3d(ico.mesh().vertex(i * 13)));
    const MinDistance ms = exact_composite_min_distance(arm, q, surf);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(ms.d[i]) < 1e-9);

    // equidistant point: lower link index wins
    const ExactComposite pair(two_link_robot(), {ico, ico});
    Eigen::Matrix3Xd mid(3, 1);
    mid << 0.15, 0.2, 0.0;
    const MinDistance mt = exact_composite_min_distance(pair, Eigen::VectorXd(), mid);
    CHECK(mt.link[0] == 0);
}

TEST_CASE("composite learned distance properties") {
    const RobotModel model = revolute_pair();
    std::vector<MlpSdf> nets = {MlpSdf::random(MlpSdf::default_shape(), 21), MlpSdf::random(MlpSdf::default_shape(), 22)};
    for (auto& n : nets) n.bound_radius = 0.1;
    const CompositeSdf sdf(model, nets);
    Gen g(12);
    Eigen::VectorXd q(2);
    q << 0.3, -0.4;
    const LinkPoseSet poses = forward_kinematics(model, q);

    SUBCASE("far points are clamped") {
        Eigen::Matrix3Xd far(3, 100);
        for (int i = 0; i < 100; ++i) far.col(i) = (2.0 + g.uniform(0, 1)) * g.unit();
        const MinDistance md = composite_min_distance(sdf, q, far);
        CHECK(md.d.minCoeff() >= 0.8);
    }
    SUBCASE("minimum never exceeds a single link") {
        Eigen::Matrix3Xd p(3, 500);
        for (int i = 0; i < 500; ++i) p.col(i) = g.point(0.8);
        const MinDistance md = composite_min_distance(sdf, q, p);
        const Eigen::MatrixXd per = sdf.per_link(poses, p);
        for (int i = 0; i < 500; ++i) {
            CHECK(md.d[i] <= per(0, i));
            CHECK(md.d[i] <= per(1, i));
            CHECK(md.d[i] == per(md.link[i], i));
        }
    }
    SUBCASE("batches and thread counts do not change results") {
        Eigen::Matrix3Xd p(3, 10000);
        for (int i = 0; i < p.cols(); ++i) p.col(i) = g.point(1.5);
        const MinDistance all = composite_min_distance(sdf, q, p);
        for (int i = 0; i < p.cols(); i += 97) {
            Eigen::Matrix3Xd one = p.col(i);
            CHECK(composite_min_distance(sdf, q, one).d[0] == all.d[i]);
        }
        const int before = num_threads();
        set_num_threads(1);
        const MinDistance serial = composite_min_distance(sdf, q, p);
        set_num_threads(before);
        CHECK((serial.d - all.d).cwiseAbs().maxCoeff() == 0.0);
        CHECK((serial.link - all.link).cwiseAbs().maxCoeff() == 0);
    }
    SUBCASE("network count must match the links") {
        CHECK_THROWS_AS(CompositeSdf(model, {nets[0]}), InputError);
    }
}

TEST_CASE("rigidly attached points keep their exact distance") {
    // link 1 is a capsule starting 0.3 m from link 0's sphere, so points within
    // 5 cm of it are always closest to link 1
    const MeshSdf capsule(make_capsule({0, 0, 0}, {0.2, 0, 0}, 0.05, 16));
    const ExactComposite arm(revolute_pair(), {MeshSdf(make_icosphere(0.1, 2)), capsule});
    Gen g(13);
    int tested = 0;
    while (tested < 50) {
        const Eigen::Vector3d local = g.point(0.15) + Eigen::Vector3d(0.1, 0, 0);
        const double ref = capsule.query(local).d;
        if (ref > 0.05) continue;
        ++tested;
        for (int k = 0; k < 5; ++k) {
            const LinkPoseSet poses = forward_kinematics(arm.model(), g.vec(2, -3, 3));
            const Eigen::Matrix3Xd w = poses.poses[1].apply(Eigen::Matrix3Xd(local));
            CHECK(std::abs(exact_composite_min_distance(arm, poses, w).d[0] - ref) < 1e-9);
        }
    }
}

}  // TEST_SUITE
