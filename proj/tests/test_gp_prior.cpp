#include <cmath>
#include <doctest.h>
#include <Eigen/Eigenvalues>
#include "sdfplan/errors.hpp"
#include "sdfplan/gp_prior.hpp"
#include "sdfplan/parallel.hpp"
#include "support.hpp"

using namespace sdfplan;
using testing::Gen;

namespace {

// Standard GP conditional on exact endpoint observations, written out
// directly with a full inverse.
Eigen::MatrixXd oracle_conditional(const Eigen::VectorXd& t, const GpHyper& hp) {
    const int H = static_cast<int>(t.size()) - 1;
    auto k = [&](double a, double b) { return hp.sigma_f * hp.sigma_f * std::exp(-(a - b) * (a - b) / (2 * hp.h * hp.h)); };
    Eigen::MatrixXd Kss(H - 1, H - 1), Ks(2, H - 1);
    Eigen::Matrix2d Ko;
    const double obs[2] = {t[0], t[H]};
    for (int i = 0; i < H - 1; ++i) {
        for (int j = 0; j < H - 1; ++j) Kss(i, j) = k(t[i + 1], t[j + 1]);
        for (int a = 0; a < 2; ++a) Ks(a, i) = k(obs[a], t[i + 1]);
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) Ko(a, b) = k(obs[a], obs[b]);
    return Kss - Ks.transpose() * Ko.inverse() * Ks;
}

}  // namespace

TEST_SUITE("gp_prior") {

TEST_CASE("kernel examples") {
    CHECK(se_kernel(0.3, 0.3, {4.0, 0.1}) == 16.0);
    CHECK(se_kernel(0.2, 0.3, {1.0, 0.1}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(se_kernel(0.0, 1.0, {1.0, 0.1}) == doctest::Approx(1.9287498479639178e-22).epsilon(1e-9));
}

TEST_CASE("property: kernel is stationary and symmetric") {
    Gen g(1);
    for (int i = 0; i < 200; ++i) {
        const GpHyper hp{g.uniform(0.1, 5), g.uniform(0.01, 1)};
        const double a = g.uniform(0, 0.5), b = g.uniform(0, 0.5), s = g.uniform(0, 0.5);
        CHECK(se_kernel(a, b, hp) == doctest::Approx(se_kernel(a + s, b + s, hp)).epsilon(1e-12));
        CHECK(se_kernel(a, b, hp) == se_kernel(b, a, hp));
    }
}

TEST_CASE("hyperparameters are validated") {
    CHECK_THROWS_AS((GpHyper{0.0, 0.1}).validate(), InputError);
    CHECK_THROWS_AS((GpHyper{1.0, -0.1}).validate(), InputError);
    CHECK_THROWS_AS(condition_on_endpoints(uniform_times(1), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), {1, 0.1}),
                    InputError);
}

TEST_CASE("conditioning pins the endpoints") {
    const Eigen::VectorXd start = Eigen::Vector2d(0.2, 0.5), goal = Eigen::Vector2d(0.8, 0.4);
    const GpPrior prior = condition_on_endpoints(uniform_times(20), start, goal, {4.0, 0.1});
    const Eigen::VectorXd var = prior.marginal_variance();
    CHECK(var[0] <= 1e-10);
    CHECK(var[20] <= 1e-10);
    CHECK(prior.mean().row(0).transpose() == start);
    CHECK(prior.mean().row(20).transpose() == goal);
    // straight-line mean
    for (int i = 0; i <= 20; ++i)
        CHECK((prior.mean().row(i).transpose() - (start + (goal - start) * i / 20.0)).norm() < 1e-15);
    // mid-trajectory spread is essentially the unconditioned one
    CHECK(std::sqrt(var[10]) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("conditioned covariance matches a direct inverse") {
    for (double h : {0.01, 0.1, 0.3, 0.5}) {
        const GpHyper hp{1.5, h};
        const Eigen::VectorXd t = uniform_times(20);
        const GpPrior prior = condition_on_endpoints(t, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3), hp);
        const Eigen::MatrixXd ref = oracle_conditional(t, hp);
        CHECK((prior.interior_covariance() - ref).cwiseAbs().maxCoeff() < 1e-9);
        const Eigen::MatrixXd L = prior.chol();
        CHECK((L * L.transpose() - ref).cwiseAbs().maxCoeff() <= prior.jitter() * 1.01 + 1e-9);
        CHECK(prior.jitter() <= 1e-6 * hp.sigma_f * hp.sigma_f);
    }
}

TEST_CASE("property: conditioned kernel is positive semidefinite") {
    Gen g(2);
    for (int trial = 0; trial < 40; ++trial) {
        const GpHyper hp{g.uniform(0.001, 5), g.uniform(0.005, 1.0)};
        const int H = g.integer(2, 40);
        const GpPrior prior = condition_on_endpoints(uniform_times(H), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), hp);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prior.interior_covariance());
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * hp.sigma_f * hp.sigma_f);
    }
}

TEST_CASE("marginal spread scales exactly with sigma_f") {
    const Eigen::VectorXd t = uniform_times(20);
    const GpPrior one = condition_on_endpoints(t, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {1.0, 0.1});
    const GpPrior four = condition_on_endpoints(t, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {4.0, 0.1});
    const Eigen::VectorXd s1 = one.marginal_variance().cwiseSqrt(), s4 = four.marginal_variance().cwiseSqrt();
    for (int i = 1; i < 20; ++i) CHECK(s4[i] == doctest::Approx(4.0 * s1[i]).epsilon(1e-9));
}

TEST_CASE("samples are pinned and deterministic") {
    const Eigen::VectorXd start = Eigen::Vector2d(0.2, 0.5), goal = Eigen::Vector2d(0.8, 0.5);
    const GpPrior prior = condition_on_endpoints(uniform_times(20), start, goal, {4.0, 0.1});
    const auto a = sample_trajectories(prior, 20, 42);
    REQUIRE(a.size() == 20);
    double spread = 0;
    for (const auto& s : a) {
        CHECK(s.row(0).transpose() == start);
        CHECK(s.row(20).transpose() == goal);
        spread = std::max(spread, (s - prior.mean()).cwiseAbs().maxCoeff());
    }
    CHECK(spread > 4.0);  // wide spread at sigma_f = 4

    const int before = num_threads();
    set_num_threads(1);
    const auto b = sample_trajectories(prior, 20, 42);
    set_num_threads(before);
    for (int i = 0; i < 20; ++i) CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0);
    const auto c = sample_trajectories(prior, 20, 43);
    CHECK((a[0] - c[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("vanishing variance collapses onto the mean") {
    const GpPrior prior = condition_on_endpoints(uniform_times(20), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), {1e-12, 0.1});
    for (const auto& s : sample_trajectories(prior, 10, 1)) CHECK((s - prior.mean()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sample mean converges to the prior mean") {
    const double sf = 0.5;
    const GpPrior prior = condition_on_endpoints(uniform_times(20), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), {sf, 0.1});
    const auto s = sample_trajectories(prior, 10000, 7);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(21, 2);
    for (const auto& x : s) mean += x;
    mean /= 10000.0;
    CHECK((mean - prior.mean()).cwiseAbs().maxCoeff() <= 3 * sf / std::sqrt(10000.0));
}

TEST_CASE("empirical covariance recovers the conditioned kernel") {
    const GpPrior prior = condition_on_endpoints(uniform_times(20), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {1.0, 0.1});
    const int n = 50000;
    const auto s = sample_trajectories(prior, n, 11);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(21), sq = Eigen::VectorXd::Zero(21);
    for (const auto& x : s) {
        m += x.col(0);
        sq += x.col(0).cwiseAbs2();
    }
    m /= n;
    const Eigen::VectorXd var = sq / n - m.cwiseAbs2();
    const Eigen::MatrixXd& K = prior.interior_covariance();
    for (int i = 1; i < 20; ++i) CHECK(std::abs(var[i] - K(i - 1, i - 1)) <= 0.05 * K(i - 1, i - 1));
}

TEST_CASE("per-dimension scale") {
    Eigen::VectorXd scale(2);
    scale << 1.0, 3.0;
    const GpPrior prior(uniform_times(20), Eigen::MatrixXd::Zero(21, 2), {1.0, 0.1}, scale);
    const auto s = sample_trajectories(prior, 4000, 3);
    double v0 = 0, v1 = 0;
    for (const auto& x : s) {
        v0 += x(10, 0) * x(10, 0);
        v1 += x(10, 1) * x(10, 1);
    }
    CHECK(std::sqrt(v1 / v0) == doctest::Approx(3.0).epsilon(0.05));
}

}  // TEST_SUITE
