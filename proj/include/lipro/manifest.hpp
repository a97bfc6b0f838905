#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef LIPRO_VERSION
#define LIPRO_VERSION "0.0.0"
#endif

namespace lipro {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::ostringstream buf;
    buf << in.rdbuf();
    std::ostringstream hex;
    hex << "fnv1a:" << std::hex << fnv1a64(buf.str());
    return hex.str();
}

/// Record of one CLI run: command, parameters, seed and input digests.
/// Replaying the recorded command reproduces the outputs bit-for-bit in
/// exact-arithmetic mode and within the declared statistical tolerance for
/// Monte Carlo runs.
struct ExperimentManifest {
    std::string command;
    std::map<std::string, std::string> args;
    std::uint64_t seed = 0;
    bool seeded = false;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::vector<std::string> outputs;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema"] = 1;
        j["tool"] = "lipro";
        j["version"] = LIPRO_VERSION;
        j["command"] = command;
        j["args"] = args;
        if (seeded) j["seed"] = seed;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace lipro
