#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipro/cauchy_limit.hpp"
#include "lipro/heat_kernel.hpp"
#include "lipro/lp_metric.hpp"
#include "lipro/metric_map.hpp"
#include "lipro/metric_space.hpp"
#include "lipro/path_space.hpp"

namespace lipro::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline void check_schema(const json& j, const std::string& what) {
    if (!j.is_object()) throw std::invalid_argument(what + ": expected a JSON object");
    if (j.contains("schema") && j.at("schema").get<int>() != kSchemaVersion) {
        throw std::invalid_argument(what + ": unsupported schema version");
    }
}

inline json space_to_json(const FiniteMetricSpace& s) {
    json j;
    j["schema"] = kSchemaVersion;
    j["points"] = s.labels();
    std::vector<std::vector<double>> d(s.size(), std::vector<double>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t k = 0; k < s.size(); ++k) d[i][k] = s.dist(i, k);
    j["dist"] = d;
    return j;
}

inline SpacePtr space_from_json(const json& j) {
    check_schema(j, "space");
    if (!j.contains("points") || !j.contains("dist")) {
        throw std::invalid_argument("space: needs \"points\" and \"dist\"");
    }
    return make_space(FiniteMetricSpace(j.at("points").get<std::vector<std::string>>(),
                                        j.at("dist").get<std::vector<std::vector<double>>>()));
}

inline json map_to_json(const MetricMap& f) {
    json j;
    j["schema"] = kSchemaVersion;
    j["source"] = space_to_json(*f.source());
    j["target"] = space_to_json(*f.target());
    j["assignment"] = f.assignment();
    return j;
}

inline MetricMap map_from_json(const json& j) {
    check_schema(j, "map");
    return MetricMap(space_from_json(j.at("source")), space_from_json(j.at("target")),
                     j.at("assignment").get<std::vector<std::size_t>>());
}

inline json grid_to_json(const TimeGrid& g) {
    return json{{"T", g.horizon}, {"m", g.steps}};
}

inline TimeGrid grid_from_json(const json& j) {
    return TimeGrid(j.at("T").get<double>(), j.at("m").get<std::size_t>());
}

inline json measure_to_json(const GridPathMeasure& P) {
    json j;
    j["schema"] = kSchemaVersion;
    j["space"] = space_to_json(*P.ambient());
    j["grid"] = grid_to_json(P.grid());
    json atoms = json::array();
    for (const auto& a : P.atoms()) {
        atoms.push_back(json{{"path", a.path.values}, {"w", a.weight}});
    }
    j["atoms"] = atoms;
    return j;
}

inline GridPathMeasure measure_from_json(const json& j) {
    check_schema(j, "measure");
    SpacePtr space = space_from_json(j.at("space"));
    const TimeGrid grid = grid_from_json(j.at("grid"));
    std::vector<GridPathMeasure::Atom> atoms;
    for (const auto& a : j.at("atoms")) {
        atoms.push_back({GridPath(grid, a.at("path").get<std::vector<std::uint32_t>>()),
                         a.at("w").get<double>()});
    }
    return GridPathMeasure(std::move(space), grid, std::move(atoms));
}

/// A pair instance is stored as a measure with its ambient space embedded.
inline PairInstance instance_from_json(const json& j) {
    GridPathMeasure m = measure_from_json(j);
    SpacePtr space = m.ambient();
    return PairInstance(std::move(space), std::move(m));
}

inline json certificate_to_json(const IsoCertificate& c) {
    json j;
    j["schema"] = kSchemaVersion;
    j["assignment"] = c.f.assignment();
    j["eps"] = c.eps;
    j["delta"] = c.delta;
    return j;
}

/// Certificates are stored as the bare assignment plus levels; the spaces
/// come from the two instances being certified.
inline IsoCertificate certificate_from_json(const json& j, SpacePtr source, SpacePtr target) {
    check_schema(j, "certificate");
    return IsoCertificate{MetricMap(std::move(source), std::move(target),
                                    j.at("assignment").get<std::vector<std::size_t>>()),
                          j.at("eps").get<double>(), j.at("delta").get<double>()};
}

inline json bound_to_json(const HeatKernelBound& b) {
    return json{{"schema", kSchemaVersion}, {"Cprime", b.Cprime}, {"nu", b.nu}, {"tau", b.tau}};
}

inline HeatKernelBound bound_from_json(const json& j) {
    check_schema(j, "bound");
    return HeatKernelBound(j.at("Cprime").get<double>(), j.at("nu").get<double>(),
                           j.at("tau").get<double>());
}

inline ManifoldFamilyParams params_from_json(const json& j) {
    check_schema(j, "params");
    ManifoldFamilyParams p;
    p.n = j.value("n", 1);
    p.K = j.value("K", 0.0);
    p.V = j.value("V", 0.0);
    p.D = j.at("D").get<double>();
    p.Vprime = j.at("Vprime").get<double>();
    p.Lambda = j.value("Lambda", 1.0);
    p.validate();
    return p;
}

inline json coupling_to_json(const Coupling& c) {
    json j;
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["total"] = c.total;
    json mass = json::array();
    for (std::size_t r = 0; r < c.rows; ++r) {
        json row = json::array();
        for (std::size_t k = 0; k < c.cols; ++k) row.push_back(c(r, k));
        mass.push_back(row);
    }
    j["mass"] = mass;
    return j;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace lipro::io
