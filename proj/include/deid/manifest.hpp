#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deid/error.hpp"
#include "deid/version.hpp"

namespace deid {

/// Written as manifest.json next to every command's outputs. Re-running the
/// command with the recorded configuration reproduces the data outputs
/// byte-identically (the manifest itself carries the wall-clock duration).
struct RunManifest {
    std::string command;
    nlohmann::ordered_json config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;
};

inline void write_manifest(const std::string& out_dir, const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["tool_version"] = kToolVersion;
    j["config"] = manifest.config;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["duration_seconds"] = manifest.duration_seconds;
    const std::string path = out_dir + "/manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

}  // namespace deid
