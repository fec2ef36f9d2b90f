#pragma once
// Run manifest: every output directory records the subcommand, the fully
// resolved configuration, and fingerprints of the inputs, so a run can be
// reproduced exactly from the manifest alone.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tempagg/util.hpp"

namespace tempagg {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

inline std::uint64_t file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for fingerprinting: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

struct RunManifest {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> config;  // resolved flags
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> fingerprint

    void set(std::string key, std::string value) {
        config.emplace_back(std::move(key), std::move(value));
    }
    void set(std::string key, std::int64_t value) {
        set(std::move(key), std::to_string(value));
    }
    void set(std::string key, std::int32_t value) {
        set(std::move(key), std::to_string(value));
    }
    void set(std::string key, bool value) {
        set(std::move(key), std::string(value ? "true" : "false"));
    }
    void set_double(std::string key, double value) {
        set(std::move(key), fmt_double(value));
    }

    void add_input(const std::string& path) {
        inputs.emplace_back(path, to_hex(file_fingerprint(path)));
    }

    std::string render() const {
        std::string s;
        s += "artifact_version\t" + std::string(kArtifactVersion) + "\n";
        s += "subcommand\t" + subcommand + "\n";
        for (const auto& [k, v] : config) s += "config." + k + "\t" + v + "\n";
        for (const auto& [p, f] : inputs) s += "input." + p + "\t" + f + "\n";
        return s;
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
        out << render();
        if (!out) throw std::runtime_error("failed writing manifest: " + path);
    }
};

}  // namespace tempagg
