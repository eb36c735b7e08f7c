#pragma once
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <Eigen/Core>

namespace testing {

inline std::filesystem::path data_dir() { return SDFPLAN_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("sdfplan_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Small hand-rolled generators for property tests.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    double normal() { return std::normal_distribution<double>()(rng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    Eigen::Vector3d point(double half) { return {uniform(-half, half), uniform(-half, half), uniform(-half, half)}; }
    Eigen::Vector3d unit() {
        Eigen::Vector3d v(normal(), normal(), normal());
        return v.normalized();
    }
    Eigen::VectorXd vec(Eigen::Index n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }
    Eigen::VectorXd between(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        Eigen::VectorXd v(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
        return v;
    }
};

}  // namespace testing
