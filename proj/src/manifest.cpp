#include "socnet/manifest.hpp"

#include "socnet/common.hpp"

#include "json.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace socnet {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read input file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a64(ss.str()));
}

void RunManifest::add_input(const std::filesystem::path& path) {
    input_hashes[std::filesystem::absolute(path).lexically_normal().string()] = hash_file(path);
}

namespace {

nlohmann::ordered_json body(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["parameters"] = m.parameters;
    j["seed"] = m.seed;
    j["input_hashes"] = m.input_hashes;
    j["version"] = m.version;
    return j;
}

} // namespace

std::string RunManifest::compute_id() const {
    return hex64(fnv1a64(body(*this).dump()));
}

void RunManifest::finalize() {
    id = compute_id();
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    timestamp = buf;
}

std::string RunManifest::to_json() const {
    auto j = body(*this);
    j["manifest_id"] = id;
    j["timestamp"] = timestamp;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.parameters = j.value("parameters", std::map<std::string, std::string>{});
        m.seed = j.value("seed", std::uint64_t(0));
        m.input_hashes = j.value("input_hashes", std::map<std::string, std::string>{});
        m.version = j.value("version", std::string{});
        m.timestamp = j.value("timestamp", std::string{});
        m.id = j.value("manifest_id", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest: ") + e.what());
    }
    return m;
}

} // namespace socnet
