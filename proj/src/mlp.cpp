#include "sdfplan/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "sdfplan/errors.hpp"
#include "sdfplan/parallel.hpp"

namespace sdfplan {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'F', 'P', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kNetFormatVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw InputError("network file truncated");
    return v;
}

}  // namespace

MlpSdf::MlpSdf(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw InputError("network has no layers");
    if (layers_.front().W.cols() != 3) throw InputError("network input must be 3-dimensional");
    if (layers_.back().W.rows() != 1) throw InputError("network output must be scalar");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].b.size() != layers_[l].W.rows()) throw InputError("network bias size mismatch");
        if (l > 0 && layers_[l].W.cols() != layers_[l - 1].W.rows()) throw InputError("network layer size mismatch");
    }
}

MlpSdf MlpSdf::random(const std::vector<int>& shape, std::uint64_t seed) {
    if (shape.size() < 2) throw InputError("network shape needs at least two sizes");
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
        const int in = shape[l], out = shape[l + 1];
        const bool hidden = l + 2 < shape.size();
        const double bound = hidden ? std::sqrt(6.0 / in) : std::sqrt(3.0 / in);
        std::uniform_real_distribution<double> U(-bound, bound);
        DenseLayer L;
        L.W.resize(out, in);
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j) L.W(i, j) = U(rng);
        L.b = Eigen::VectorXd::Zero(out);
        layers.push_back(std::move(L));
    }
    return MlpSdf(std::move(layers));
}

std::vector<int> MlpSdf::shape() const {
    std::vector<int> s;
    if (layers_.empty()) return s;
    s.push_back(static_cast<int>(layers_.front().W.cols()));
    for (const auto& L : layers_) s.push_back(static_cast<int>(L.W.rows()));
    return s;
}

std::size_t MlpSdf::num_parameters() const {
    std::size_t n = 0;
    for (const auto& L : layers_) n += static_cast<std::size_t>(L.W.size() + L.b.size());
    return n;
}

bool MlpSdf::all_finite() const {
    for (const auto& L : layers_)
        if (!L.W.allFinite() || !L.b.allFinite()) return false;
    return true;
}

namespace {

// Points are pushed through the network in blocks of this many columns, the
// last one zero-padded, so a point's result never depends on the batch size.
constexpr Eigen::Index kBlock = 64;

Eigen::Matrix3Xd padded_block(const Eigen::Matrix3Xd& p, Eigen::Index first) {
    const Eigen::Index n = std::min(kBlock, p.cols() - first);
    Eigen::Matrix3Xd blk = Eigen::Matrix3Xd::Zero(3, kBlock);
    blk.leftCols(n) = p.middleCols(first, n);
    return blk;
}

}  // namespace

Eigen::VectorXd MlpSdf::evaluate(const Eigen::Matrix3Xd& p) const {
    const Eigen::Index n = p.cols();
    Eigen::VectorXd out(n);
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::ptrdiff_t b) {
        const Eigen::Index first = b * kBlock;
        Eigen::MatrixXd a = padded_block(p, first);
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Eigen::MatrixXd z = layers_[l].W * a;
            z.colwise() += layers_[l].b;
            if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
            a = std::move(z);
        }
        const Eigen::Index m = std::min(kBlock, n - first);
        out.segment(first, m) = a.row(0).head(m).transpose();
    });
    return out;
}

void MlpSdf::evaluate_with_gradient(const Eigen::Matrix3Xd& p, Eigen::VectorXd& d, Eigen::Matrix3Xd& grad) const {
    const std::size_t L = layers_.size();
    const Eigen::Index n = p.cols();
    d.resize(n);
    grad.resize(3, n);
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::ptrdiff_t b) {
        const Eigen::Index first = b * kBlock;
        std::vector<Eigen::MatrixXd> act(L);  // post-activation of hidden layers
        Eigen::MatrixXd a = padded_block(p, first);
        for (std::size_t l = 0; l < L; ++l) {
            Eigen::MatrixXd z = layers_[l].W * a;
            z.colwise() += layers_[l].b;
            if (l + 1 < L) z = z.cwiseMax(0.0);
            act[l] = z;
            a = std::move(z);
        }
        // backward: g = df/d(activation), masked by the rectifier gates
        Eigen::MatrixXd g = layers_[L - 1].W.transpose() * Eigen::RowVectorXd::Ones(kBlock);
        for (std::size_t l = L - 1; l-- > 0;) {
            g = (act[l].array() > 0.0).select(g, 0.0);
            g = layers_[l].W.transpose() * g;
        }
        const Eigen::Index m = std::min(kBlock, n - first);
        d.segment(first, m) = a.row(0).head(m).transpose();
        grad.middleCols(first, m) = g.leftCols(m);
    });
}

Eigen::VectorXd MlpSdf::evaluate_clamped(const Eigen::Matrix3Xd& p) const {
    const Eigen::Index n = p.cols();
    Eigen::VectorXd out(n);
    std::vector<Eigen::Index> near;
    near.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = p.col(i).norm();
        if (r > trust_radius) out[i] = r - bound_radius;
        else near.push_back(i);
    }
    if (near.empty()) return out;
    if (static_cast<Eigen::Index>(near.size()) == n) return evaluate(p);
    Eigen::Matrix3Xd sub(3, static_cast<Eigen::Index>(near.size()));
    for (std::size_t j = 0; j < near.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = p.col(near[j]);
    const Eigen::VectorXd v = evaluate(sub);
    for (std::size_t j = 0; j < near.size(); ++j) out[near[j]] = v[static_cast<Eigen::Index>(j)];
    return out;
}

void MlpSdf::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write network: " + path.string());
    out.write(kMagic, sizeof kMagic);
    put(out, kNetFormatVersion);
    const auto s = shape();
    put(out, static_cast<std::uint32_t>(s.size()));
    for (int v : s) put(out, static_cast<std::uint32_t>(v));
    put(out, bound_radius);
    put(out, trust_radius);
    for (const auto& L : layers_) {
        out.write(reinterpret_cast<const char*>(L.W.data()), static_cast<std::streamsize>(L.W.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(L.b.data()), static_cast<std::streamsize>(L.b.size() * sizeof(double)));
    }
    put(out, static_cast<std::uint64_t>(provenance.size()));
    out.write(provenance.data(), static_cast<std::streamsize>(provenance.size()));
}

MlpSdf MlpSdf::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("network not found: " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw InputError("not a network file: " + path.string());
    const auto version = get<std::uint32_t>(in);
    if (version != kNetFormatVersion) throw InputError("unsupported network file version " + std::to_string(version));
    const auto ns = get<std::uint32_t>(in);
    if (ns < 2 || ns > 64) throw InputError("network file: bad layer count");
    std::vector<int> s;
    for (std::uint32_t i = 0; i < ns; ++i) s.push_back(static_cast<int>(get<std::uint32_t>(in)));
    const double br = get<double>(in);
    const double tr = get<double>(in);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < s.size(); ++l) {
        DenseLayer L;
        L.W.resize(s[l + 1], s[l]);
        L.b.resize(s[l + 1]);
        in.read(reinterpret_cast<char*>(L.W.data()), static_cast<std::streamsize>(L.W.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(L.b.data()), static_cast<std::streamsize>(L.b.size() * sizeof(double)));
        if (!in) throw InputError("network file truncated");
        layers.push_back(std::move(L));
    }
    const auto plen = get<std::uint64_t>(in);
    std::string prov(plen, '\0');
    in.read(prov.data(), static_cast<std::streamsize>(plen));
    if (!in) throw InputError("network file truncated");
    MlpSdf net(std::move(layers));
    if (!net.all_finite()) throw InputError("network file contains non-finite parameters");
    net.bound_radius = br;
    net.trust_radius = tr;
    net.provenance = std::move(prov);
    return net;
}

}  // namespace sdfplan
