#include "sdfplan/time_param.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sdfplan/errors.hpp"

namespace sdfplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Second derivatives of a natural cubic spline; Thomas algorithm per column.
Eigen::MatrixXd natural_second_derivatives(const Eigen::VectorXd& x, const Eigen::MatrixXd& y) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, y.cols());
    if (n < 3) return m;
    const Eigen::Index k = n - 2;
    Eigen::VectorXd diag(k), upper(k), lower(k);
    Eigen::MatrixXd rhs(k, y.cols());
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        lower[i - 1] = h0;
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs.row(i - 1) = 6.0 * ((y.row(i + 1) - y.row(i)) / h1 - (y.row(i) - y.row(i - 1)) / h0);
    }
    for (Eigen::Index i = 1; i < k; ++i) {
        const double f = lower[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs.row(i) -= f * rhs.row(i - 1);
    }
    m.row(k) = rhs.row(k - 1) / diag[k - 1];
    for (Eigen::Index i = k - 2; i >= 0; --i) m.row(i + 1) = (rhs.row(i) - upper[i] * m.row(i + 2)) / diag[i];
    return m;
}

}  // namespace

SplinePath::SplinePath(const Eigen::MatrixXd& waypoints) {
    if (waypoints.rows() < 1 || waypoints.cols() < 1) throw InputError("spline needs at least one waypoint");
    if (!waypoints.allFinite()) throw InputError("waypoints must be finite");

    std::vector<Eigen::Index> keep{0};
    std::vector<double> cum{0.0};
    for (Eigen::Index i = 1; i < waypoints.rows(); ++i) {
        const double step = (waypoints.row(i) - waypoints.row(keep.back())).norm();
        if (step <= 1e-12) {
            warnings_.push_back("repeated waypoint " + std::to_string(i) + " collapsed into one knot");
            continue;
        }
        keep.push_back(i);
        cum.push_back(cum.back() + step);
    }
    chord_length_ = cum.back();
    points_.resize(static_cast<Eigen::Index>(keep.size()), waypoints.cols());
    knots_.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        points_.row(static_cast<Eigen::Index>(i)) = waypoints.row(keep[i]);
        knots_[static_cast<Eigen::Index>(i)] = chord_length_ > 0 ? cum[i] / chord_length_ : 0.0;
    }
    if (knots_.size() >= 2) knots_[knots_.size() - 1] = 1.0;
    m2_ = natural_second_derivatives(knots_, points_);
}

Eigen::Index SplinePath::segment_of(double s) const {
    const Eigen::Index n = knots_.size();
    if (s <= knots_[0]) return 0;
    if (s >= knots_[n - 1]) return n - 2;
    const double* begin = knots_.data();
    const auto it = std::upper_bound(begin, begin + n, s);
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(it - begin) - 1, 0, n - 2);
}

Eigen::VectorXd SplinePath::eval_segment(Eigen::Index i, double s, int order) const {
    const double x0 = knots_[i], x1 = knots_[i + 1], h = x1 - x0;
    const double a = (x1 - s) / h, b = (s - x0) / h;
    const auto y0 = points_.row(i).transpose(), y1 = points_.row(i + 1).transpose();
    const auto m0 = m2_.row(i).transpose(), m1 = m2_.row(i + 1).transpose();
    switch (order) {
        case 0:
            return a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h / 6.0);
        case 1:
            return (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * (h / 6.0);
        case 2:
            return a * m0 + b * m1;
        default:
            throw InputError("spline derivative order must be 0, 1 or 2");
    }
}

Eigen::VectorXd SplinePath::eval(double s) const {
    if (degenerate()) return points_.row(0).transpose();
    return eval_segment(segment_of(s), s, 0);
}

Eigen::VectorXd SplinePath::d1(double s) const {
    if (degenerate()) return Eigen::VectorXd::Zero(dims());
    return eval_segment(segment_of(s), s, 1);
}

Eigen::VectorXd SplinePath::d2(double s) const {
    if (degenerate()) return Eigen::VectorXd::Zero(dims());
    return eval_segment(segment_of(s), s, 2);
}

SplinePath fit_spline(const Eigen::MatrixXd& waypoints) {
    if (waypoints.rows() < 3) throw InputError("spline fitting needs H >= 2 (at least 3 waypoints)");
    return SplinePath(waypoints);
}

namespace {

// Half-plane gx * x + gy * y <= c over the squared path speeds (x, y) at the
// two ends of a grid segment.
struct HalfPlane {
    double gx, gy, c;
};

// |q'_d u + q''_d x| <= a_d at both segment ends, with the segment's constant
// path acceleration u = (y - x) / (2 ds).
std::vector<HalfPlane> segment_constraints(const Eigen::VectorXd& qs0, const Eigen::VectorXd& qss0,
                                           const Eigen::VectorXd& qs1, const Eigen::VectorXd& qss1,
                                           const Eigen::VectorXd& acc, double ds) {
    std::vector<HalfPlane> h;
    h.reserve(static_cast<std::size_t>(4 * acc.size()));
    const double k = 1.0 / (2.0 * ds);
    for (Eigen::Index d = 0; d < acc.size(); ++d) {
        const double ax = qss0[d] - k * qs0[d], ay = k * qs0[d];
        const double bx = -k * qs1[d], by = k * qs1[d] + qss1[d];
        h.push_back({ax, ay, acc[d]});
        h.push_back({-ax, -ay, acc[d]});
        h.push_back({bx, by, acc[d]});
        h.push_back({-bx, -by, acc[d]});
    }
    return h;
}

bool feasible(const std::vector<HalfPlane>& hs, double x, double y) {
    for (const auto& h : hs)
        if (h.gx * x + h.gy * y > h.c + 1e-9 * (std::abs(h.c) + std::abs(h.gx * x) + std::abs(h.gy * y))) return false;
    return true;
}

// Largest x of the bounded polygon hs; (0, 0) is always inside. Two
// variables, so the optimum is found among pairwise line intersections.
double max_x(const std::vector<HalfPlane>& hs) {
    double best = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (std::size_t j = i + 1; j < hs.size(); ++j) {
            const double det = hs[i].gx * hs[j].gy - hs[i].gy * hs[j].gx;
            if (std::abs(det) < 1e-300) continue;
            const double x = (hs[i].c * hs[j].gy - hs[i].gy * hs[j].c) / det;
            const double y = (hs[i].gx * hs[j].c - hs[i].c * hs[j].gx) / det;
            if (x > best && std::isfinite(x) && feasible(hs, x, y)) best = x;
        }
    }
    return best;
}

// Largest y compatible with a fixed x.
double max_y(const std::vector<HalfPlane>& hs, double x) {
    double hi = kInf;
    for (const auto& h : hs)
        if (h.gy > 0) hi = std::min(hi, (h.c - h.gx * x) / h.gy);
    return hi;
}

}  // namespace

TimedTrajectory time_parameterize(const SplinePath& path, const Eigen::VectorXd& vel_limits,
                                  const Eigen::VectorXd& acc_limits, int grid) {
    const Eigen::Index D = path.dims();
    if (vel_limits.size() != D || acc_limits.size() != D) throw InputError("limit vectors must match path dimension");
    if (!(vel_limits.array() > 0).all() || !(acc_limits.array() > 0).all())
        throw InputError("velocity and acceleration limits must be positive");
    if (grid < 2) throw InputError("time parameterization grid needs at least 2 points");

    TimedTrajectory out;
    if (path.degenerate()) {
        out.t = Eigen::VectorXd::Zero(1);
        out.s = Eigen::VectorXd::Zero(1);
        out.q = path.eval(0.0).transpose();
        out.qd = Eigen::MatrixXd::Zero(1, D);
        out.qdd = Eigen::MatrixXd::Zero(1, D);
        return out;
    }

    const int N = grid;
    const double ds = 1.0 / (N - 1);
    std::vector<Eigen::VectorXd> qs(N), qss(N);
    Eigen::VectorXd s(N), cap(N);
    for (int i = 0; i < N; ++i) {
        s[i] = i == N - 1 ? 1.0 : i * ds;
        qs[i] = path.d1(s[i]);
        qss[i] = path.d2(s[i]);
        double c = kInf;
        for (Eigen::Index d = 0; d < D; ++d) {
            const double a = std::abs(qs[i][d]);
            if (a > 1e-12) c = std::min(c, (vel_limits[d] / a) * (vel_limits[d] / a));
            else if (std::abs(qss[i][d]) > 0) c = std::min(c, acc_limits[d] / std::abs(qss[i][d]));
        }
        cap[i] = c;
    }
    // a dimension whose q' changes sign between grid points passes through
    // q' = 0 there, where only |q''| x <= a limits the speed
    for (int i = 0; i + 1 < N; ++i) {
        for (Eigen::Index d = 0; d < D; ++d) {
            if (qs[i][d] * qs[i + 1][d] > 0) continue;
            const double curv = std::max(std::abs(qss[i][d]), std::abs(qss[i + 1][d]));
            if (curv > 0) {
                cap[i] = std::min(cap[i], acc_limits[d] / curv);
                cap[i + 1] = std::min(cap[i + 1], acc_limits[d] / curv);
            }
        }
    }
    for (int i = 0; i < N; ++i)
        if (!std::isfinite(cap[i])) throw NumericalError("unbounded path speed at s = " + std::to_string(s[i]));

    std::vector<std::vector<HalfPlane>> stage(N - 1);
    for (int i = 0; i + 1 < N; ++i) stage[i] = segment_constraints(qs[i], qss[i], qs[i + 1], qss[i + 1], acc_limits, ds);

    // backward pass: B_i is the largest x at i from which x_N = 0 stays reachable
    Eigen::VectorXd B(N);
    B[N - 1] = 0.0;
    for (int i = N - 2; i >= 0; --i) {
        std::vector<HalfPlane> hs = stage[i];
        hs.push_back({1.0, 0.0, cap[i]});
        hs.push_back({0.0, 1.0, B[i + 1]});
        hs.push_back({-1.0, 0.0, 0.0});
        hs.push_back({0.0, -1.0, 0.0});
        B[i] = max_x(hs);
    }

    // forward pass: greedy maximum speed inside the controllable band
    Eigen::VectorXd x(N);
    x[0] = 0.0;
    for (int i = 0; i + 1 < N; ++i) x[i + 1] = std::clamp(max_y(stage[i], x[i]), 0.0, B[i + 1]);

    out.t.resize(N);
    out.s = s;
    out.q.resize(N, D);
    out.qd.resize(N, D);
    out.qdd.resize(N, D);
    out.t[0] = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
        const double v0 = std::sqrt(x[i]), v1 = std::sqrt(x[i + 1]);
        if (!(v0 + v1 > 0)) throw NumericalError("path speed vanished inside the path at s = " + std::to_string(s[i]));
        out.t[i + 1] = out.t[i] + 2.0 * ds / (v0 + v1);
    }
    for (int i = 0; i < N; ++i) {
        // each segment's u holds at both of its ends; the last sample reuses the final segment's
        const int seg = std::min(i, N - 2);
        const double u = (x[seg + 1] - x[seg]) / (2.0 * ds);
        out.q.row(i) = path.eval(s[i]).transpose();
        out.qd.row(i) = (qs[i] * std::sqrt(x[i])).transpose();
        out.qdd.row(i) = (qs[i] * u + qss[i] * x[i]).transpose();
    }
    return out;
}

LimitUtilization limit_utilization(const TimedTrajectory& traj, const Eigen::VectorXd& vel_limits,
                                   const Eigen::VectorXd& acc_limits) {
    LimitUtilization u;
    for (Eigen::Index i = 0; i < traj.q.rows(); ++i) {
        for (Eigen::Index d = 0; d < traj.q.cols(); ++d) {
            u.velocity = std::max(u.velocity, std::abs(traj.qd(i, d)) / vel_limits[d]);
            u.acceleration = std::max(u.acceleration, std::abs(traj.qdd(i, d)) / acc_limits[d]);
        }
    }
    return u;
}

}  // namespace sdfplan
