#pragma once

// Run manifests: what was run, on which inputs, with which seed. The id
// covers everything except the timestamp, so reruns embed the same id.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace socnet {

inline constexpr std::string_view kVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string hash_file(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    std::vector<std::string> argv; // effective arguments after config merging
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_hashes; // absolute path -> FNV-1a 64
    std::string version{kVersion};
    std::string timestamp; // UTC, ISO 8601
    std::string id;

    void add_input(const std::filesystem::path& path);
    std::string compute_id() const;
    void finalize(); // sets id and timestamp

    std::string to_json() const;
    static RunManifest from_json(std::string_view text);
};

} // namespace socnet
