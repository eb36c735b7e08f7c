#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sdfplan {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct FileRecord {
    std::string path;  // as given, relative to the manifest's directory when possible
    std::string sha256;
};

/// Provenance sidecar written next to a command's outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::string config_hash;
    std::uint64_t seed = 0;
    int threads = 0;
    std::vector<FileRecord> inputs;
    std::vector<FileRecord> outputs;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::string tool_version = kToolVersion;

    void add_input(const std::filesystem::path& p);
    /// Hashes p; call after the file is complete.
    void add_output(const std::filesystem::path& p, const std::filesystem::path& manifest_dir);

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
    void write(const std::filesystem::path& path) const;
};

/// Paths (relative ones resolved against the manifest's directory) whose
/// current hash differs from the record. Empty means every output verifies.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

/// Manifest path paired with an output prefix: <out>.manifest.json.
std::filesystem::path manifest_path_for(const std::filesystem::path& out);

class StageTimer {
public:
    explicit StageTimer(RunManifest& m, std::string name)
        : m_(m), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        m_.stage_seconds.emplace_back(
            name_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count());
    }
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    RunManifest& m_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace sdfplan
