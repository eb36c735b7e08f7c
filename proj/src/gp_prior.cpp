#include "sdfplan/gp_prior.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "sdfplan/errors.hpp"
#include "sdfplan/parallel.hpp"
#include "sdfplan/rng.hpp"

namespace sdfplan {

void GpHyper::validate() const {
    if (!(sigma_f > 0) || !(h > 0)) throw InputError("GP hyperparameters must be positive (sigma_f, h)");
}

double se_kernel(double ti, double tj, const GpHyper& hyper) {
    const double dt = ti - tj;
    return hyper.sigma_f * hyper.sigma_f * std::exp(-dt * dt / (2.0 * hyper.h * hyper.h));
}

Eigen::VectorXd uniform_times(int H) {
    if (H < 2) throw InputError("trajectory needs H >= 2 segments");
    Eigen::VectorXd t(H + 1);
    for (int i = 0; i <= H; ++i) t[i] = static_cast<double>(i) / H;
    return t;
}

GpPrior::GpPrior(Eigen::VectorXd times, Eigen::MatrixXd mean, const GpHyper& hyper, Eigen::VectorXd dim_scale)
    : times_(std::move(times)), mean_(std::move(mean)), hyper_(hyper), dim_scale_(std::move(dim_scale)) {
    hyper_.validate();
    const Eigen::Index n = times_.size();
    if (n < 3) throw InputError("GP prior needs at least 3 timestamps (H >= 2)");
    if (times_[0] != 0.0 || times_[n - 1] != 1.0) throw InputError("GP timestamps must start at 0 and end at 1");
    for (Eigen::Index i = 1; i < n; ++i)
        if (!(times_[i] > times_[i - 1])) throw InputError("GP timestamps must be strictly increasing");
    if (mean_.rows() != n) throw InputError("GP mean must have one row per timestamp");
    if (!mean_.allFinite()) throw NumericalError("GP mean is not finite");
    if (dim_scale_.size() == 0) dim_scale_ = Eigen::VectorXd::Ones(mean_.cols());
    if (dim_scale_.size() != mean_.cols()) throw InputError("GP per-dimension scale has the wrong size");

    const Eigen::Index m = n - 2;  // interior
    Eigen::MatrixXd Kss(m, m), Ks(2, m);
    Eigen::Matrix2d Kobs;
    const double obs_t[2] = {times_[0], times_[n - 1]};
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) Kss(i, j) = se_kernel(times_[i + 1], times_[j + 1], hyper_);
        for (int o = 0; o < 2; ++o) Ks(o, i) = se_kernel(obs_t[o], times_[i + 1], hyper_);
    }
    const double s2 = hyper_.sigma_f * hyper_.sigma_f;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) Kobs(a, b) = se_kernel(obs_t[a], obs_t[b], hyper_);
    Kobs.diagonal().array() += 1e-12 * s2;  // near-exact observations

    cov_ = Kss - Ks.transpose() * Kobs.inverse() * Ks;
    cov_ = 0.5 * (cov_ + cov_.transpose());

    // jitter relative to sigma_f^2, so the factor scales exactly with sigma_f
    for (double rel = 1e-10; rel <= 1e-6 * 1.0000001; rel *= 10.0) {
        Eigen::MatrixXd K = cov_;
        K.diagonal().array() += rel * s2;
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() == Eigen::Success) {
            chol_ = llt.matrixL();
            if (chol_.allFinite()) {
                jitter_ = rel * s2;
                return;
            }
        }
    }
    throw NumericalError("GP prior: Cholesky factorization failed at maximum jitter");
}

Eigen::VectorXd GpPrior::marginal_variance() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(times_.size());
    v.segment(1, cov_.rows()) = cov_.diagonal();
    return v;
}

Eigen::MatrixXd GpPrior::sample(std::mt19937_64& rng) const {
    std::normal_distribution<double> N01(0.0, 1.0);
    const Eigen::Index m = chol_.rows();
    Eigen::MatrixXd z(m, mean_.cols());
    for (Eigen::Index d = 0; d < z.cols(); ++d)
        for (Eigen::Index i = 0; i < m; ++i) z(i, d) = N01(rng);
    Eigen::MatrixXd out = mean_;
    out.middleRows(1, m) += (chol_.triangularView<Eigen::Lower>() * z) * dim_scale_.asDiagonal();
    return out;
}

GpPrior condition_on_endpoints(const Eigen::VectorXd& times, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                               const GpHyper& hyper) {
    if (start.size() != goal.size()) throw InputError("start and goal dimensions differ");
    Eigen::MatrixXd mean(times.size(), start.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) mean.row(i) = (start + times[i] * (goal - start)).transpose();
    // exact endpoints, free of rounding in the interpolation
    mean.row(0) = start.transpose();
    mean.row(times.size() - 1) = goal.transpose();
    return GpPrior(times, std::move(mean), hyper);
}

std::vector<Eigen::MatrixXd> sample_trajectories(const GpPrior& prior, int n, std::uint64_t seed,
                                                 std::uint64_t stream_offset) {
    if (n < 1) throw InputError("sample count must be at least 1");
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::ptrdiff_t i) {
        auto rng = stream_rng(seed, streams::kGpSample + stream_offset, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = prior.sample(rng);
    });
    return out;
}

}  // namespace sdfplan
