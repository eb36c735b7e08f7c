#include "sdfplan/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include <json.hpp>

#include "sdfplan/errors.hpp"

namespace sdfplan {

void TrainConfig::validate() const {
    if (epochs <= 0 || batch_size <= 0 || !(learning_rate > 0) || lr_step_epochs <= 0 || !(lr_step_factor > 0))
        throw InputError("TrainConfig: epochs, batch size, learning rate and schedule must be positive");
    if (!(lambda_d > 0) || lambda_n < 0) throw InputError("TrainConfig: lambda_d must be positive, lambda_n >= 0");
    if (!(validation_fraction > 0 && validation_fraction < 1))
        throw InputError("TrainConfig: validation fraction must lie in (0, 1)");
}

SampleBatch SampleBatch::from(const std::vector<SdfSample>& samples) {
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    return gather(samples, idx);
}

SampleBatch SampleBatch::gather(const std::vector<SdfSample>& samples, const std::vector<std::size_t>& idx) {
    SampleBatch b;
    const auto n = static_cast<Eigen::Index>(idx.size());
    b.p.resize(3, n);
    b.d.resize(n);
    b.n.resize(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[idx[static_cast<std::size_t>(i)]];
        b.p.col(i) = s.p;
        b.d[i] = s.d;
        b.n.col(i) = s.n;
    }
    return b;
}

namespace {

// Alignment penalty A = |u x n|^2 = 1 - (u.n)^2 for unit n, and dA/dg.
void alignment_terms(const Eigen::Matrix3Xd& g, const Eigen::Matrix3Xd& n, Eigen::VectorXd& A, Eigen::Matrix3Xd& dA) {
    const Eigen::Index B = g.cols();
    A.resize(B);
    dA.resize(3, B);
    for (Eigen::Index i = 0; i < B; ++i) {
        const double gn = g.col(i).norm();
        if (!(gn > 1e-12)) {  // dead region: no direction to align
            A[i] = 1.0;
            dA.col(i).setZero();
            continue;
        }
        const Eigen::Vector3d u = g.col(i) / gn;
        const double c = u.dot(n.col(i));
        A[i] = 1.0 - c * c;
        dA.col(i) = -2.0 * c * (n.col(i) - c * u) / gn;
    }
}

void zero_like(const MlpSdf& net, std::vector<DenseLayer>& grad) {
    grad.resize(net.layers().size());
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        grad[l].W = Eigen::MatrixXd::Zero(net.layers()[l].W.rows(), net.layers()[l].W.cols());
        grad[l].b = Eigen::VectorXd::Zero(net.layers()[l].b.size());
    }
}

// Standard backprop of sum_i w_i f(p_i) into grad (accumulating).
void accumulate_output_gradient(const MlpSdf& net, const Eigen::Matrix3Xd& p, const Eigen::RowVectorXd& w,
                                std::vector<DenseLayer>& grad) {
    const auto& layers = net.layers();
    const std::size_t L = layers.size();
    std::vector<Eigen::MatrixXd> act(L);
    Eigen::MatrixXd a = p;
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z = layers[l].W * a;
        z.colwise() += layers[l].b;
        if (l + 1 < L) z = z.cwiseMax(0.0);
        act[l] = z;
        a = std::move(z);
    }
    const Eigen::MatrixXd input = p;
    Eigen::MatrixXd delta = w;  // d(sum)/dz for the output layer
    for (std::size_t l = L; l-- > 0;) {
        const Eigen::MatrixXd& in = l == 0 ? input : act[l - 1];
        grad[l].W.noalias() += delta * in.transpose();
        grad[l].b += delta.rowwise().sum();
        if (l == 0) break;
        delta = layers[l].W.transpose() * delta;
        delta = (act[l - 1].array() > 0.0).select(delta, 0.0);
    }
}

}  // namespace

double loss_and_gradient(const MlpSdf& net, const SampleBatch& batch, const TrainConfig& cfg,
                         std::vector<DenseLayer>& grad) {
    const auto& layers = net.layers();
    const std::size_t L = layers.size();
    const Eigen::Index B = batch.p.cols();
    const double inv_b = 1.0 / static_cast<double>(B);
    zero_like(net, grad);

    // forward
    std::vector<Eigen::MatrixXd> act(L);
    {
        Eigen::MatrixXd a = batch.p;
        for (std::size_t l = 0; l < L; ++l) {
            Eigen::MatrixXd z = layers[l].W * a;
            z.colwise() += layers[l].b;
            if (l + 1 < L) z = z.cwiseMax(0.0);
            act[l] = z;
            a = std::move(z);
        }
    }
    const Eigen::RowVectorXd f = act[L - 1].row(0);
    const Eigen::RowVectorXd err = f - batch.d.transpose();

    // delta[l] = df/dz_l for hidden layer l (gated), computed for every sample
    std::vector<Eigen::MatrixXd> delta(L);
    delta[L - 1] = Eigen::MatrixXd::Ones(1, B);
    {
        Eigen::MatrixXd g = layers[L - 1].W.transpose() * delta[L - 1];
        for (std::size_t l = L - 1; l-- > 0;) {
            delta[l] = (act[l].array() > 0.0).select(g, 0.0);
            g = layers[l].W.transpose() * delta[l];
        }
    }
    const Eigen::Matrix3Xd input_grad = layers[0].W.transpose() * delta[0];

    Eigen::VectorXd A;
    Eigen::Matrix3Xd dA;
    alignment_terms(input_grad, batch.n, A, dA);

    const double loss = inv_b * (cfg.lambda_d * err.squaredNorm() + cfg.lambda_n * A.sum());

    // distance term: d/dz_l = delta_l * s with s = 2 lambda_d err / B
    const Eigen::RowVectorXd s = (2.0 * cfg.lambda_d * inv_b) * err;
    const double align_scale = cfg.lambda_n * inv_b;

    if (cfg.lambda_n > 0 && cfg.finite_difference_alignment) {
        // d/dtheta sum_i c_i . g_i with g_i ~ (f(p + h e_k) - f(p - h e_k)) / 2h
        accumulate_output_gradient(net, batch.p, s, grad);
        for (int k = 0; k < 3; ++k) {
            const Eigen::RowVectorXd w = (align_scale / (2.0 * cfg.fd_step)) * dA.row(k);
            Eigen::Matrix3Xd pp = batch.p, pm = batch.p;
            pp.row(k).array() += cfg.fd_step;
            pm.row(k).array() -= cfg.fd_step;
            accumulate_output_gradient(net, pp, w, grad);
            accumulate_output_gradient(net, pm, -w, grad);
        }
        return loss;
    }

    // Alignment term: c . g = r_{L-1}^T w_L where r_0 = c and
    // r_l = gate_l (W_l r_{l-1}); so d/dW_l = delta_l r_{l-1}^T and biases get nothing.
    std::vector<Eigen::MatrixXd> r(L);
    if (cfg.lambda_n > 0) {
        r[0] = align_scale * dA;
        for (std::size_t l = 1; l < L; ++l) {
            Eigen::MatrixXd z = layers[l - 1].W * r[l - 1];
            r[l] = (act[l - 1].array() > 0.0).select(z, 0.0);
        }
    }
    const Eigen::MatrixXd input = batch.p;
    for (std::size_t l = 0; l < L; ++l) {
        const Eigen::MatrixXd& in_act = l == 0 ? input : act[l - 1];
        Eigen::MatrixXd rhs = in_act.array().rowwise() * s.array();
        if (cfg.lambda_n > 0) rhs += r[l];
        grad[l].W.noalias() = delta[l] * rhs.transpose();
        grad[l].b = delta[l] * s.transpose();
    }
    return loss;
}

std::pair<double, double> evaluate_rmsd(const MlpSdf& net, const SampleBatch& batch) {
    if (batch.p.cols() == 0) return {0.0, 0.0};
    Eigen::VectorXd d;
    Eigen::Matrix3Xd g;
    net.evaluate_with_gradient(batch.p, d, g);
    Eigen::VectorXd A;
    Eigen::Matrix3Xd dA;
    alignment_terms(g, batch.n, A, dA);
    const double n = static_cast<double>(batch.p.cols());
    return {std::sqrt((d - batch.d).squaredNorm() / n), std::sqrt(A.sum() / n)};
}

MlpSdf train_link_sdf(const LinkDataset& dataset, const TrainConfig& cfg, TrainReport* report, double bound_radius) {
    cfg.validate();
    if (dataset.samples.empty()) throw InputError("train_link_sdf: empty dataset");

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> idx(dataset.samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(idx.size())));
    if (idx.size() < 2) n_val = 0;
    std::vector<std::size_t> train_idx(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> val_idx(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
    const SampleBatch val = SampleBatch::gather(dataset.samples, val_idx);

    MlpSdf net = MlpSdf::random(MlpSdf::default_shape(), cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    net.bound_radius = bound_radius;

    // Adam state
    std::vector<DenseLayer> m, v, grad;
    zero_like(net, m);
    zero_like(net, v);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    TrainReport local;
    local.train_size = train_idx.size();
    local.val_size = val_idx.size();
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    int batch_id = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(cfg.lr_step_factor, epoch / cfg.lr_step_epochs);
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += bs, ++batch_id) {
            const std::size_t end = std::min(train_idx.size(), start + bs);
            std::vector<std::size_t> bidx(train_idx.begin() + static_cast<std::ptrdiff_t>(start),
                                          train_idx.begin() + static_cast<std::ptrdiff_t>(end));
            const SampleBatch batch = SampleBatch::gather(dataset.samples, bidx);
            const double loss = loss_and_gradient(net, batch, cfg, grad);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "training diverged: non-finite loss at epoch " << epoch << ", batch " << batch_id;
                throw NumericalError(msg.str());
            }
            loss_sum += loss * static_cast<double>(end - start);
            seen += end - start;

            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < grad.size(); ++l) {
                auto& P = net.layers()[l];
                m[l].W = beta1 * m[l].W + (1 - beta1) * grad[l].W;
                v[l].W = beta2 * v[l].W + (1 - beta2) * grad[l].W.cwiseAbs2();
                P.W.array() -= lr * (m[l].W.array() / c1) / ((v[l].W.array() / c2).sqrt() + eps);
                m[l].b = beta1 * m[l].b + (1 - beta1) * grad[l].b;
                v[l].b = beta2 * v[l].b + (1 - beta2) * grad[l].b.cwiseAbs2();
                P.b.array() -= lr * (m[l].b.array() / c1) / ((v[l].b.array() / c2).sqrt() + eps);
            }
        }
        EpochStats es;
        es.epoch = epoch;
        es.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(seen, 1));
        if (!val_idx.empty() && (epoch % 10 == 9 || epoch + 1 == cfg.epochs)) {
            std::tie(es.val_rmsd_d, es.val_rmsd_align) = evaluate_rmsd(net, val);
        }
        local.epochs.push_back(es);
    }
    if (!net.all_finite()) throw NumericalError("training produced non-finite parameters");
    std::tie(local.val_rmsd_d, local.val_rmsd_align) = evaluate_rmsd(net, val);

    nlohmann::json prov = {
        {"link_index", dataset.link_index},
        {"link_name", dataset.link_name},
        {"dataset_seed", dataset.params.seed},
        {"dataset_size", dataset.samples.size()},
        {"train",
         {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"lr_step_epochs", cfg.lr_step_epochs},
          {"lr_step_factor", cfg.lr_step_factor},
          {"lambda_d", cfg.lambda_d},
          {"lambda_n", cfg.lambda_n},
          {"seed", cfg.seed},
          {"validation_fraction", cfg.validation_fraction}}},
        {"val_rmsd_d", local.val_rmsd_d},
        {"val_rmsd_align", local.val_rmsd_align},
    };
    net.provenance = prov.dump();
    if (report) *report = std::move(local);
    return net;
}

}  // namespace sdfplan
