#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ilreg/error.hpp"
#include "ilreg/estimate.hpp"
#include "ilreg/pose.hpp"
#include "ilreg/raster.hpp"

namespace ilreg {

// Pose JSON: { "mu": [x,y], "delta": [x,y], "psi": [x,y], "f": 8000.0 | "inf" }
inline Pose pose_from_json(const nlohmann::json& j) {
    auto vec2 = [&](const char* key) -> Vec2 {
        if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
            throw ParseError(std::string("pose JSON: missing or malformed '") + key + "'");
        return {j[key][0].get<double>(), j[key][1].get<double>()};
    };
    Pose pose;
    pose.mu = vec2("mu");
    pose.delta = vec2("delta");
    pose.psi = vec2("psi");
    if (!j.contains("f")) throw ParseError("pose JSON: missing 'f'");
    if (j["f"].is_string()) {
        if (j["f"].get<std::string>() != "inf")
            throw ParseError("pose JSON: 'f' must be a number or \"inf\"");
        pose.f = kOrthographicF;
    } else {
        pose.f = j["f"].get<double>();
    }
    pose.validate();
    return pose;
}

inline nlohmann::ordered_json pose_to_json(const Pose& pose) {
    nlohmann::ordered_json j;
    j["mu"] = {pose.mu.x, pose.mu.y};
    j["delta"] = {pose.delta.x, pose.delta.y};
    j["psi"] = {pose.psi.x, pose.psi.y};
    if (pose.orthographic())
        j["f"] = "inf";
    else
        j["f"] = pose.f;
    return j;
}

// Lighting JSON: { "I_a": r, "I_d": r, "L": [x,y,z], "I_0": r }
inline Lighting lighting_from_json(const nlohmann::json& j) {
    for (const char* key : {"I_a", "I_d", "L", "I_0"})
        if (!j.contains(key)) throw ParseError(std::string("lighting JSON: missing '") + key + "'");
    if (!j["L"].is_array() || j["L"].size() != 3)
        throw ParseError("lighting JSON: 'L' must be a 3-vector");
    const Vec3 l{j["L"][0].get<double>(), j["L"][1].get<double>(), j["L"][2].get<double>()};
    return make_lighting(j["I_a"].get<double>(), j["I_d"].get<double>(), l,
                         j["I_0"].get<double>());
}

inline nlohmann::ordered_json lighting_to_json(const Lighting& light) {
    const LightingComponents c = lighting_components(light);
    nlohmann::ordered_json j;
    j["I_a"] = c.ambient;
    j["I_d"] = c.diffuse;
    j["L"] = {c.light_dir.x, c.light_dir.y, c.light_dir.z};
    j["I_0"] = c.offset;
    return j;
}

inline nlohmann::ordered_json estimate_to_json(const EstimateResult& r) {
    nlohmann::ordered_json j;
    j["pose"] = pose_to_json(r.best_pose);
    j["loss"] = r.best_loss;
    j["evals"] = r.evals;
    j["restarts"] = r.restarts_used;
    return j;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

}  // namespace ilreg
