#include "sclp/io.hpp"
#include "sclp/robust.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace sclp::io {

using nlohmann::json;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << path << ":" << line << ":" << col << ": parse error: " << e.what();
        throw InputError(os.str());
    }
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("write failed: " + path);
}

void write_json(const json& j, const std::string& path) { write_text(j.dump(2) + "\n", path); }

json tolerances_to_json(const Tolerances& t) {
    return {{"feasibility", t.feasibility},
            {"optimality", t.optimality},
            {"pivot", t.pivot},
            {"ratio_negative", t.ratio_negative},
            {"refactor_every", t.refactor_every},
            {"bland_after_factor", t.bland_after_factor}};
}

json solution_file(const SclpSolution& s) {
    json j = solution_to_json(s);
    if (s.robust) {
        json extra = robust::robust_extras_to_json(s);
        j["cuts"] = extra["cuts"];
        j["rc_certificates"] = extra["rc_certificates"];
    }
    return j;
}

json RunManifest::to_json() const {
    return {{"command", command},
            {"inputs", inputs},
            {"overrides", overrides},
            {"seed", seed},
            {"outputs", outputs},
            {"version", version},
            {"tolerances", tolerances_to_json(tolerances)},
            {"exit_code", exit_code},
            {"message", message}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.inputs = j.value("inputs", std::vector<std::string>{});
        m.overrides = j.value("overrides", json::object());
        m.seed = j.value("seed", std::uint64_t{0});
        m.outputs = j.value("outputs", std::vector<std::string>{});
        m.version = j.value("version", std::string(kVersion));
        m.exit_code = j.value("exit_code", 0);
        m.message = j.value("message", std::string());
        if (j.contains("tolerances")) {
            const json& t = j["tolerances"];
            m.tolerances.feasibility = t.value("feasibility", m.tolerances.feasibility);
            m.tolerances.optimality = t.value("optimality", m.tolerances.optimality);
            m.tolerances.pivot = t.value("pivot", m.tolerances.pivot);
            m.tolerances.ratio_negative = t.value("ratio_negative", m.tolerances.ratio_negative);
            m.tolerances.refactor_every = t.value("refactor_every", m.tolerances.refactor_every);
            m.tolerances.bland_after_factor = t.value("bland_after_factor", m.tolerances.bland_after_factor);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("manifest: ") + e.what());
    }
    return m;
}

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

void write_manifest(const RunManifest& m, const std::string& output) { write_json(m.to_json(), manifest_path(output)); }

}  // namespace sclp::io
