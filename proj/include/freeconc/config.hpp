#pragma once

// Strict JSON config schema for BmcSpec documents:
//   {"spec_version": 1, "K": int, "p": [[...]], "cluster_sizes": [...], "n": int}
// d is inferred as the size sum; unknown keys are rejected.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "freeconc/bmc.hpp"
#include "freeconc/errors.hpp"

namespace freeconc {

inline BmcSpec bmc_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    const std::set<std::string> allowed = {"spec_version", "K", "p", "cluster_sizes", "n"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    for (const std::string& key : allowed)
        if (!j.contains(key)) throw ConfigError("config: missing key '" + key + "'");
    if (!j["spec_version"].is_number_integer() || j["spec_version"].get<int>() != 1)
        throw ConfigError("config: spec_version must be 1");

    BmcSpec spec;
    try {
        spec.K = j["K"].get<std::size_t>();
        spec.n = j["n"].get<std::size_t>();
        spec.p = j["p"].get<std::vector<std::vector<double>>>();
        spec.cluster_sizes = j["cluster_sizes"].get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (spec.p.size() != spec.K || spec.cluster_sizes.size() != spec.K)
        throw ConfigError("config: K does not match p / cluster_sizes shapes");
    try {
        spec.finalize();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return spec;
}

inline BmcSpec load_bmc_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return bmc_spec_from_json(j);
}

/// Canonical re-serialization of a parsed spec (--emit-config).
inline std::string emit_bmc_spec(const BmcSpec& spec) {
    nlohmann::json j;
    j["spec_version"] = 1;
    j["K"] = spec.K;
    j["p"] = spec.p;
    j["cluster_sizes"] = spec.cluster_sizes;
    j["n"] = spec.n;
    return j.dump(2) + "\n";
}

}  // namespace freeconc
