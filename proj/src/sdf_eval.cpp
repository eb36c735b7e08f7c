#include "sdfplan/sdf_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "sdfplan/errors.hpp"
#include "sdfplan/rng.hpp"

namespace sdfplan {

std::vector<Band> parse_bands(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    std::vector<double> nums;
    std::string tok;
    const bool explicit_pairs = s.find('[') != std::string::npos;
    std::string cleaned = s;
    std::replace(cleaned.begin(), cleaned.end(), '[', ',');
    std::replace(cleaned.begin(), cleaned.end(), ']', ',');
    std::istringstream in(cleaned);
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t used = 0;
            nums.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InputError("bands: not a number: '" + tok + "'");
        }
    }
    std::vector<Band> bands;
    if (explicit_pairs) {
        if (nums.size() % 2 != 0 || nums.empty()) throw InputError("bands: intervals need two numbers each");
        for (std::size_t i = 0; i < nums.size(); i += 2) bands.push_back({nums[i], nums[i + 1]});
    } else {
        if (nums.size() < 2) throw InputError("bands: need at least two edges");
        for (std::size_t i = 0; i + 1 < nums.size(); ++i) bands.push_back({nums[i], nums[i + 1]});
    }
    for (const auto& b : bands)
        if (!(b.hi > b.lo)) throw InputError("bands: every interval needs lo < hi");
    return bands;
}

BandPoints sample_band_points(const MeshSdf& sdf, const Band& band, std::size_t n, std::uint64_t seed,
                              std::uint64_t stream) {
    const Eigen::Vector3d lo = sdf.mesh().aabb_min(), hi = sdf.mesh().aabb_max();
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo).maxCoeff() + std::max(band.hi, 0.0) + 1e-3;
    const double reach = 0.5 * (hi - lo).norm();  // every surface point lies within this of center
    auto rng = stream_rng(seed, streams::kEvalPoints, stream);
    std::uniform_real_distribution<double> U(-half, half);

    std::vector<Eigen::Vector3d> pts;
    std::vector<double> dist;
    std::vector<Eigen::Vector3d> nrm;
    const std::size_t max_attempts = 2000 * std::max<std::size_t>(n, 1);
    for (std::size_t a = 0; a < max_attempts && pts.size() < n; ++a) {
        const Eigen::Vector3d p = center + Eigen::Vector3d(U(rng), U(rng), U(rng));
        const double r = (p - center).norm();
        if (r - reach > band.hi) continue;  // too far to be in band
        const SdfQuery q = sdf.query(p);
        if (q.d < band.lo || q.d > band.hi) continue;
        pts.push_back(p);
        dist.push_back(q.d);
        nrm.push_back(q.n);
    }
    BandPoints out;
    const auto m = static_cast<Eigen::Index>(pts.size());
    out.p.resize(3, m);
    out.d.resize(m);
    out.n.resize(3, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out.p.col(i) = pts[static_cast<std::size_t>(i)];
        out.d[i] = dist[static_cast<std::size_t>(i)];
        out.n.col(i) = nrm[static_cast<std::size_t>(i)];
    }
    return out;
}

std::vector<BandReport> evaluate_bands(const MlpSdf& net, const MeshSdf& sdf, const std::vector<Band>& bands,
                                       std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<BandReport> out;
    for (std::size_t b = 0; b < bands.size(); ++b) {
        BandReport r;
        r.band = bands[b];
        const BandPoints pts = sample_band_points(sdf, bands[b], n, seed, stream * 64 + b);
        r.samples = static_cast<std::size_t>(pts.p.cols());
        if (r.samples > 0) {
            Eigen::VectorXd f;
            Eigen::Matrix3Xd g;
            net.evaluate_with_gradient(pts.p, f, g);
            double se = 0, sa = 0;
            for (Eigen::Index i = 0; i < pts.p.cols(); ++i) {
                se += (f[i] - pts.d[i]) * (f[i] - pts.d[i]);
                const double gn = g.col(i).norm();
                const double cross = gn > 0 ? (g.col(i) / gn).cross(pts.n.col(i)).norm() : 1.0;
                sa += cross * cross;
            }
            r.rmsd_d = std::sqrt(se / static_cast<double>(r.samples));
            r.rmsd_align = std::sqrt(sa / static_cast<double>(r.samples));
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace sdfplan
