#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctwist/cantor.hpp"
#include "ctwist/errors.hpp"
#include "ctwist/io.hpp"

namespace ctwist {

enum class OutputFormat { Csv, Pgm, Json };

struct OutputSpec {
    OutputFormat format = OutputFormat::Csv;
    std::string path;

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// A full run description: fractal template, energy window, grid shape and
/// output files. Parsed from a JSON document; every numeric field accepts an
/// exact rational string ("1/7") as well as a plain number.
struct RunConfig {
    CantorParams params;     // eps is the fixed value unless eps_sweep
    bool eps_sweep = false;  // sweep eps over [0, eps_max] instead
    double phi_v = 0;
    double phi_min = 0.02;
    double phi_max = 0; // defaults to sqrt((3 pi)^2 - phi_v^2)
    std::size_t width = 600;
    std::size_t height = 400;
    double floor_db = -60;
    std::vector<OutputSpec> outputs;

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        return a.params.copies == b.params.copies && a.params.gamma == b.params.gamma &&
               a.params.eps == b.params.eps && a.params.stage == b.params.stage &&
               a.params.gamma_exact == b.params.gamma_exact &&
               a.params.eps_exact == b.params.eps_exact && a.eps_sweep == b.eps_sweep &&
               a.phi_v == b.phi_v && a.phi_min == b.phi_min && a.phi_max == b.phi_max &&
               a.width == b.width && a.height == b.height && a.floor_db == b.floor_db &&
               a.outputs == b.outputs;
    }
};

inline double default_phi_max(double phi_v) {
    // energy of the third vertical null
    return std::sqrt(9.0 * M_PI * M_PI - phi_v * phi_v);
}

namespace detail {

struct NumberValue {
    double value = 0;
    std::optional<Rational> exact;
};

inline NumberValue read_number(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) {
        const auto rat = Rational::parse(v.get<std::string>());
        if (!rat)
            throw ParseError("key '" + key + "': string values must be exact rationals like " +
                             "\"1/7\", got \"" + v.get<std::string>() + "\"");
        return {rat->to_double(), rat};
    }
    if (v.is_number()) {
        const double d = v.get<double>();
        return {d, Rational::from_double(d)};
    }
    throw ParseError("key '" + key + "': expected a number or a rational string");
}

inline OutputFormat parse_format(const std::string& name, const std::string& context) {
    if (name == "csv" || name == "CSV") return OutputFormat::Csv;
    if (name == "pgm" || name == "PGM") return OutputFormat::Pgm;
    if (name == "json" || name == "JSON") return OutputFormat::Json;
    throw ParseError(context + ": unknown output format '" + name + "'");
}

} // namespace detail

/// Infer an output format from a path's extension.
inline OutputFormat format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "csv") return OutputFormat::Csv;
    if (ext == "pgm") return OutputFormat::Pgm;
    if (ext == "json") return OutputFormat::Json;
    throw ParseError("cannot infer output format from path '" + path +
                     "' (expected .csv, .pgm or .json)");
}

/// Parse and validate a JSON run configuration.
///
/// Required keys: N, gamma, S, phi_v and one of eps / eps_sweep. Optional:
/// phi_min (default 0.02), phi_max (default: third vertical null), width and
/// height (600 x 400), floor_db (-60), outputs (array of {format, path}).
inline RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config must be a JSON object");

    auto require = [&](const char* key) -> const nlohmann::json& {
        const auto it = doc.find(key);
        if (it == doc.end()) throw ParseError(std::string("config is missing key '") + key + "'");
        return *it;
    };

    RunConfig cfg;
    const auto& n_val = require("N");
    if (!n_val.is_number_integer()) throw ParseError("key 'N': expected an integer");
    const int copies = n_val.get<int>();
    const auto gamma = detail::read_number(require("gamma"), "gamma");
    const auto& s_val = require("S");
    if (!s_val.is_number_integer()) throw ParseError("key 'S': expected an integer");
    const int stage = s_val.get<int>();

    detail::NumberValue eps{0.0, Rational(0)};
    if (doc.contains("eps_sweep") && doc["eps_sweep"].is_boolean() &&
        doc["eps_sweep"].get<bool>()) {
        cfg.eps_sweep = true;
    } else if (doc.contains("eps")) {
        eps = detail::read_number(doc["eps"], "eps");
    } else if (!doc.contains("eps_sweep")) {
        throw ParseError("config needs either 'eps' or 'eps_sweep'");
    }

    try {
        cfg.params = validate_params(copies, gamma.value, eps.value, stage, gamma.exact,
                                     eps.exact);
    } catch (const Error& e) {
        throw ValidationError(std::string("invalid parameters: ") + e.what());
    }

    cfg.phi_v = detail::read_number(require("phi_v"), "phi_v").value;
    if (cfg.phi_v < 0) throw ValidationError("phi_v must be >= 0");
    cfg.phi_min = doc.contains("phi_min")
                      ? detail::read_number(doc["phi_min"], "phi_min").value
                      : 0.02;
    cfg.phi_max = doc.contains("phi_max")
                      ? detail::read_number(doc["phi_max"], "phi_max").value
                      : default_phi_max(cfg.phi_v);
    if (!(cfg.phi_min > 0) || !(cfg.phi_min < cfg.phi_max))
        throw ValidationError("phi range must satisfy 0 < phi_min < phi_max");

    if (doc.contains("width")) cfg.width = doc["width"].get<std::size_t>();
    if (doc.contains("height")) cfg.height = doc["height"].get<std::size_t>();
    if (cfg.width < 2 || cfg.height < 2) throw ValidationError("width and height must be >= 2");
    if (doc.contains("floor_db")) cfg.floor_db = detail::read_number(doc["floor_db"],
                                                                     "floor_db").value;
    if (!(cfg.floor_db < 0)) throw ValidationError("floor_db must be < 0");

    if (doc.contains("outputs")) {
        if (!doc["outputs"].is_array()) throw ParseError("key 'outputs': expected an array");
        for (const auto& out : doc["outputs"]) {
            if (!out.is_object() || !out.contains("format") || !out.contains("path"))
                throw ParseError("outputs entries need 'format' and 'path'");
            OutputSpec spec;
            spec.format = detail::parse_format(out["format"].get<std::string>(), "outputs");
            spec.path = out["path"].get<std::string>();
            if (spec.path.empty()) throw ValidationError("output path must be nonempty");
            cfg.outputs.push_back(std::move(spec));
        }
    }
    return cfg;
}

inline const char* format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Pgm: return "pgm";
        default: return "json";
    }
}

/// Inverse of parse_config: parse_config(serialize_config(c)) == c for every
/// valid config.
inline std::string serialize_config(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["N"] = cfg.params.copies;
    if (cfg.params.gamma_exact)
        j["gamma"] = cfg.params.gamma_exact->str();
    else
        j["gamma"] = cfg.params.gamma;
    if (cfg.eps_sweep) {
        j["eps_sweep"] = true;
    } else if (cfg.params.eps_exact) {
        j["eps"] = cfg.params.eps_exact->str();
    } else {
        j["eps"] = cfg.params.eps;
    }
    j["S"] = cfg.params.stage;
    j["phi_v"] = cfg.phi_v;
    j["phi_min"] = cfg.phi_min;
    j["phi_max"] = cfg.phi_max;
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    j["floor_db"] = cfg.floor_db;
    auto outs = nlohmann::ordered_json::array();
    for (const auto& out : cfg.outputs)
        outs.push_back({{"format", format_name(out.format)}, {"path", out.path}});
    j["outputs"] = std::move(outs);
    return j.dump(2);
}

} // namespace ctwist
