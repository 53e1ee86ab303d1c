#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dbflow/models.hpp"
#include "dbflow/vdbf.hpp"

namespace dbflow {

/// Anything wrong with a run configuration: parse failures, unknown or
/// missing keys, bad values. The CLI maps this to its config exit status.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int version = 1;
    std::string label = "run";
    std::string output_dir = ".";
    ModelSpec model;
    VdbfConfig vdbf;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& scope) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("config: unknown key '" + scope + key + "'");
    }
}

template <class T>
T fetch(const json& obj, const char* key, const std::string& scope, const T& fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + scope + key + "'");
    }
}

template <class T>
T require(const json& obj, const char* key, const std::string& scope) {
    if (!obj.contains(key)) throw ConfigError("config: missing key '" + scope + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + scope + key + "'");
    }
}

}  // namespace detail

/// Occupation string the run will fold by: the configured one when present,
/// the alternating antiferromagnetic pattern for spin models otherwise.
/// Interaction models carry no safe default and must state their filling.
inline std::string resolved_occupation(const ModelSpec& model) {
    const int n = model.qubit_count();
    if (!model.reference_occupation.empty()) {
        if (int(model.reference_occupation.size()) != n)
            throw ConfigError("config: model.reference_occupation must have one bit per qubit (" +
                              std::to_string(n) + ")");
        for (char b : model.reference_occupation)
            if (b != '0' && b != '1')
                throw ConfigError("config: model.reference_occupation must be over {0,1}");
        return model.reference_occupation;
    }
    if (model.kind == ModelKind::hubbard)
        throw ConfigError("config: model.reference_occupation is required for hubbard models");
    return neel_occupation(n);
}

inline RunConfig parse_config(const std::string& text) {
    detail::json root;
    try {
        root = detail::json::parse(text);
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    detail::reject_unknown(root, {"version", "label", "output_dir", "model", "vdbf"}, "");

    RunConfig cfg;
    cfg.version = detail::require<int>(root, "version", "");
    if (cfg.version != 1)
        throw ConfigError("config: unsupported version " + std::to_string(cfg.version));
    cfg.label = detail::fetch<std::string>(root, "label", "", cfg.label);
    cfg.output_dir = detail::fetch<std::string>(root, "output_dir", "", cfg.output_dir);

    if (!root.contains("model")) throw ConfigError("config: missing key 'model'");
    const detail::json& m = root.at("model");
    if (!m.is_object()) throw ConfigError("config: 'model' must be an object");

    const std::string family = detail::require<std::string>(m, "family", "model.");
    if (family == "heisenberg") {
        cfg.model.kind = ModelKind::heisenberg;
        detail::reject_unknown(
            m, {"family", "rows", "cols", "boundary", "coupling", "reference_occupation"},
            "model.");
        cfg.model.c = detail::fetch<double>(m, "coupling", "model.", cfg.model.c);
    } else if (family == "hubbard") {
        cfg.model.kind = ModelKind::hubbard;
        detail::reject_unknown(m, {"family", "rows", "cols", "boundary", "t", "u",
                                   "reference_occupation"},
                               "model.");
        cfg.model.t = detail::fetch<double>(m, "t", "model.", cfg.model.t);
        cfg.model.u = detail::fetch<double>(m, "u", "model.", cfg.model.u);
    } else {
        throw ConfigError("config: model.family must be 'heisenberg' or 'hubbard'");
    }
    cfg.model.lattice.rows = detail::require<int>(m, "rows", "model.");
    cfg.model.lattice.cols = detail::require<int>(m, "cols", "model.");
    const std::string boundary = detail::fetch<std::string>(m, "boundary", "model.",
                                                            std::string("open"));
    if (boundary == "open") cfg.model.lattice.boundary = Boundary::open;
    else if (boundary == "periodic") cfg.model.lattice.boundary = Boundary::periodic;
    else throw ConfigError("config: model.boundary must be 'open' or 'periodic'");
    cfg.model.reference_occupation =
        detail::fetch<std::string>(m, "reference_occupation", "model.", std::string());

    if (root.contains("vdbf")) {
        const detail::json& v = root.at("vdbf");
        if (!v.is_object()) throw ConfigError("config: 'vdbf' must be an object");
        detail::reject_unknown(v,
                               {"epsilon", "n_rots", "max_iter", "conv_thresh", "gen_clip",
                                "track_variance", "variance_stride", "wall_cap_ms"},
                               "vdbf.");
        VdbfConfig& vc = cfg.vdbf;
        vc.epsilon = detail::fetch<double>(v, "epsilon", "vdbf.", vc.epsilon);
        vc.n_rots = detail::fetch<int>(v, "n_rots", "vdbf.", vc.n_rots);
        vc.max_iter = detail::fetch<int>(v, "max_iter", "vdbf.", vc.max_iter);
        vc.conv_thresh = detail::fetch<double>(v, "conv_thresh", "vdbf.", vc.conv_thresh);
        vc.gen_clip = detail::fetch<double>(v, "gen_clip", "vdbf.", vc.gen_clip);
        vc.track_variance = detail::fetch<bool>(v, "track_variance", "vdbf.", vc.track_variance);
        vc.variance_stride = detail::fetch<int>(v, "variance_stride", "vdbf.", vc.variance_stride);
        vc.wall_cap_ms =
            detail::fetch<std::uint64_t>(v, "wall_cap_ms", "vdbf.", vc.wall_cap_ms);
    }

    try {
        cfg.model.lattice.validate();
        cfg.vdbf.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!cfg.model.reference_occupation.empty()) resolved_occupation(cfg.model);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

inline std::string dump_config(const RunConfig& cfg) {
    detail::json m;
    m["family"] = cfg.model.kind == ModelKind::hubbard ? "hubbard" : "heisenberg";
    m["rows"] = cfg.model.lattice.rows;
    m["cols"] = cfg.model.lattice.cols;
    m["boundary"] = cfg.model.lattice.boundary == Boundary::periodic ? "periodic" : "open";
    if (cfg.model.kind == ModelKind::heisenberg) {
        m["coupling"] = cfg.model.c;
    } else {
        m["t"] = cfg.model.t;
        m["u"] = cfg.model.u;
    }
    if (!cfg.model.reference_occupation.empty())
        m["reference_occupation"] = cfg.model.reference_occupation;

    detail::json v;
    v["epsilon"] = cfg.vdbf.epsilon;
    v["n_rots"] = cfg.vdbf.n_rots;
    v["max_iter"] = cfg.vdbf.max_iter;
    v["conv_thresh"] = cfg.vdbf.conv_thresh;
    v["gen_clip"] = cfg.vdbf.gen_clip;
    v["track_variance"] = cfg.vdbf.track_variance;
    v["variance_stride"] = cfg.vdbf.variance_stride;
    v["wall_cap_ms"] = cfg.vdbf.wall_cap_ms;

    detail::json root;
    root["version"] = cfg.version;
    root["label"] = cfg.label;
    root["output_dir"] = cfg.output_dir;
    root["model"] = m;
    root["vdbf"] = v;
    return root.dump(2) + "\n";
}

}  // namespace dbflow
