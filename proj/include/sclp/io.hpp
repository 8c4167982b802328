#pragma once

#include "sclp/common.hpp"
#include "sclp/sclp.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sclp::io {

inline constexpr const char* kVersion = "1.0.0";

// Parses a JSON file; parse errors report line and column.
nlohmann::json read_json(const std::string& path);
void write_json(const nlohmann::json& j, const std::string& path);
void write_text(const std::string& text, const std::string& path);

nlohmann::json tolerances_to_json(const Tolerances& t);

// Robust solutions carry the cut realizations and certificates per interval.
nlohmann::json solution_file(const SclpSolution& s);

struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    nlohmann::json overrides = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::string version = kVersion;
    Tolerances tolerances = default_tolerances();
    int exit_code = 0;
    std::string message;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Path of the manifest written next to `output`.
std::string manifest_path(const std::string& output);
void write_manifest(const RunManifest& m, const std::string& output);

}  // namespace sclp::io
