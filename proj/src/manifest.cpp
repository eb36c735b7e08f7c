#include "sdfplan/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "sdfplan/errors.hpp"

namespace sdfplan {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

void RunManifest::add_input(const std::filesystem::path& p) { inputs.push_back({p.string(), sha256_file(p)}); }

void RunManifest::add_output(const std::filesystem::path& p, const std::filesystem::path& manifest_dir) {
    std::filesystem::path rel = p;
    std::error_code ec;
    const auto r = std::filesystem::relative(p, manifest_dir.empty() ? "." : manifest_dir, ec);
    if (!ec && !r.empty()) rel = r;
    outputs.push_back({rel.string(), sha256_file(p)});
}

std::string RunManifest::to_json() const {
    json j;
    j["format"] = "sdfplan-manifest";
    j["version"] = 1;
    j["command"] = command;
    j["argv"] = argv;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["threads"] = threads;
    j["tool_version"] = tool_version;
    auto files = [](const std::vector<FileRecord>& v) {
        json a = json::array();
        for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
        return a;
    };
    j["inputs"] = files(inputs);
    j["outputs"] = files(outputs);
    json st = json::array();
    for (const auto& [name, sec] : stage_seconds) st.push_back({{"stage", name}, {"seconds", sec}});
    j["stages"] = st;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("manifest: malformed JSON: ") + e.what());
    }
    if (j.value("format", "") != "sdfplan-manifest") throw InputError("not a manifest document");
    RunManifest m;
    m.command = j.value("command", "");
    m.argv = j.value("argv", std::vector<std::string>{});
    m.config_hash = j.value("config_hash", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.threads = j.value("threads", 0);
    m.tool_version = j.value("tool_version", "");
    for (const char* key : {"inputs", "outputs"}) {
        auto& dst = std::string(key) == "inputs" ? m.inputs : m.outputs;
        for (const auto& f : j.value(key, json::array())) dst.push_back({f.at("path"), f.at("sha256")});
    }
    for (const auto& s : j.value("stages", json::array())) m.stage_seconds.emplace_back(s.at("stage"), s.at("seconds"));
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << to_json();
}

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw InputError("manifest not found: " + manifest_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const RunManifest m = RunManifest::from_json(ss.str());
    std::vector<std::string> bad;
    for (const auto& f : m.outputs) {
        std::filesystem::path p = f.path;
        if (p.is_relative()) p = manifest_path.parent_path() / p;
        std::error_code ec;
        if (!std::filesystem::exists(p, ec) || sha256_file(p) != f.sha256) bad.push_back(f.path);
    }
    return bad;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& out) {
    return std::filesystem::path(out.string() + ".manifest.json");
}

}  // namespace sdfplan
