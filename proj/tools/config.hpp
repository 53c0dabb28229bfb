#pragma once

// Run configuration for the command-line tool, read from YAML.
// Grammar documented in README.md ("Configuration file").

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ttsense/ttsense.hpp"

namespace ttsense::cli {

struct ModelConfig {
    std::string builtin;  // "sobol_g" | "decay_chain" | "" (subprocess)
    std::string command;
    std::vector<double> g_coefficients;
    int days = kDecayDefaultDays;
    Index points = 100;  // default axis size for built-in spaces
    Index batch_size = 64;
    double timeout = 60.0;
};

struct OutputConfig {
    std::string surrogate;
    std::string sobol;
    std::string report;
    std::string csv_prefix;
};

struct RunConfig {
    ModelConfig model;
    std::optional<ModelSpace> space;
    CrossConfig cross;
    double epsilon = kDefaultEpsilon;
    double sobol_round_tol = kDefaultSobolRoundTol;
    std::uint64_t seed = 0;
    Index workers = 1;
    OutputConfig outputs;
    /// FNV-1a of the effective (post-override) configuration text.
    std::string hash;
};

inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

namespace detail {

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
    const YAML::Node v = node[key];
    return v ? v.as<T>() : fallback;
}

inline Distribution parse_distribution(const YAML::Node& v) {
    const auto kind = v["distribution"].as<std::string>("uniform");
    const auto params = v["params"] ? v["params"].as<std::vector<double>>() : std::vector<double>{};
    auto need = [&](std::size_t count) {
        if (params.size() != count) {
            throw ConfigError("space: distribution '" + kind + "' takes " + std::to_string(count) + " params");
        }
    };
    Distribution d;
    if (kind == "uniform") {
        need(2);
        d = Distribution::uniform(params[0], params[1]);
    } else if (kind == "normal") {
        need(2);
        d = Distribution::normal(params[0], params[1]);
    } else if (kind == "lognormal") {
        need(2);
        d = Distribution::lognormal(params[0], params[1]);
    } else if (kind == "scaled_lognormal") {
        need(3);
        d = Distribution::scaled_lognormal(params[0], params[1], params[2]);
    } else {
        throw ConfigError("space: unknown distribution '" + kind + "'");
    }
    if (const YAML::Node t = v["truncation"]) {
        const auto bounds = t.as<std::vector<std::string>>();
        if (bounds.size() != 2) throw ConfigError("space: truncation takes [lower, upper]");
        auto bound = [](const std::string& s, double inf) {
            if (s == "inf" || s == "+inf") return inf;
            if (s == "-inf") return -inf;
            return std::stod(s);
        };
        const double inf = std::numeric_limits<double>::infinity();
        d = d.truncated(bound(bounds[0], -inf), bound(bounds[1], inf));
    }
    return d;
}

inline ModelSpace parse_space(const YAML::Node& node) {
    if (!node.IsSequence() || node.size() == 0) throw ConfigError("space: expected a non-empty list of variables");
    std::vector<AxisGrid> axes;
    std::vector<std::string> names;
    for (const YAML::Node& v : node) {
        const Index points = get_or<Index>(v, "points", 100);
        const Index count = get_or<Index>(v, "count", 1);
        const auto name = v["name"].as<std::string>("x");
        const Distribution d = parse_distribution(v);
        const AxisGrid axis = build_axis(d, points);
        for (Index c = 0; c < count; ++c) {
            axes.push_back(axis);
            names.push_back(count == 1 ? name : name + std::to_string(c + 1));
        }
    }
    return ModelSpace(std::move(axes), std::move(names));
}

// Assigns `value` (parsed as YAML) at a dotted path such as "cross.max_rank".
inline void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const YAML::Node value = YAML::Load(assignment.substr(eq + 1));
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node next = chain.back()[keys[i]];
        if (!next.IsMap()) next = YAML::Node(YAML::NodeType::Map);
        chain.back()[keys[i]] = next;
        chain.push_back(chain.back()[keys[i]]);
    }
    chain.back()[keys.back()] = value;
}

}  // namespace detail

/// Parses the configuration text after applying `overrides` ("a.b=value").
/// Every failure is reported as ConfigError.
inline RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
    RunConfig cfg;
    try {
        YAML::Node root = text.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::Load(text);
        if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
        if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
        for (const auto& o : overrides) detail::apply_override(root, o);

        YAML::Emitter canonical;
        canonical << root;
        cfg.hash = fnv1a_hex(canonical.c_str());

        const YAML::Node model = root["model"];
        if (!model) throw ConfigError("config: 'model' section is required");
        cfg.model.builtin = detail::get_or<std::string>(model, "builtin", "");
        cfg.model.command = detail::get_or<std::string>(model, "command", "");
        if (cfg.model.builtin.empty() == cfg.model.command.empty()) {
            throw ConfigError("model: give exactly one of 'builtin' or 'command'");
        }
        cfg.model.points = detail::get_or<Index>(model, "points", 100);
        cfg.model.batch_size = detail::get_or<Index>(model, "batch_size", 64);
        cfg.model.timeout = detail::get_or<double>(model, "timeout", 60.0);
        const YAML::Node params = model["params"];
        if (cfg.model.builtin == "sobol_g") {
            if (params && params["a"]) {
                cfg.model.g_coefficients = params["a"].as<std::vector<double>>();
            } else {
                const Index N = params ? detail::get_or<Index>(params, "N", 0) : 0;
                if (N < 1) throw ConfigError("model: sobol_g needs params.a or params.N");
                cfg.model.g_coefficients.assign(N, 0.0);
            }
            for (double a : cfg.model.g_coefficients)
                if (a < 0.0) throw ConfigError("model: sobol_g coefficients must be >= 0");
        } else if (cfg.model.builtin == "decay_chain") {
            cfg.model.days = params ? detail::get_or<int>(params, "days", kDecayDefaultDays) : kDecayDefaultDays;
            if (cfg.model.days < 1) throw ConfigError("model: decay_chain days must be >= 1");
        } else if (!cfg.model.builtin.empty()) {
            throw ConfigError("model: unknown builtin '" + cfg.model.builtin + "'");
        }

        if (const YAML::Node space = root["space"]) cfg.space = detail::parse_space(space);
        if (!cfg.space) {
            if (cfg.model.builtin == "sobol_g") {
                cfg.space = sobol_g_space(cfg.model.g_coefficients.size(), cfg.model.points);
            } else if (cfg.model.builtin == "decay_chain") {
                cfg.space = decay_chain_space(cfg.model.points);
            } else {
                throw ConfigError("config: a subprocess model needs a 'space' section");
            }
        }
        if (cfg.model.builtin == "sobol_g" && cfg.space->dimension() != cfg.model.g_coefficients.size()) {
            throw ConfigError("config: space has " + std::to_string(cfg.space->dimension()) +
                              " variables but sobol_g has " + std::to_string(cfg.model.g_coefficients.size()));
        }
        if (cfg.model.builtin == "decay_chain" && cfg.space->dimension() != kDecaySpecies - 1) {
            throw ConfigError("config: decay_chain needs exactly 10 variables");
        }

        cfg.seed = detail::get_or<std::uint64_t>(root, "seed", 0);
        cfg.workers = detail::get_or<Index>(root, "workers", 1);
        if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
        cfg.epsilon = detail::get_or<double>(root, "epsilon", kDefaultEpsilon);
        if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("config: epsilon must be in (0, 1)");
        cfg.sobol_round_tol = detail::get_or<double>(root, "sobol_round_tol", kDefaultSobolRoundTol);

        if (const YAML::Node c = root["cross"]) {
            cfg.cross.initial_rank = detail::get_or<Index>(c, "initial_rank", cfg.cross.initial_rank);
            cfg.cross.kick_rank = detail::get_or<Index>(c, "kick_rank", cfg.cross.kick_rank);
            cfg.cross.max_rank = detail::get_or<Index>(c, "max_rank", cfg.cross.max_rank);
            cfg.cross.max_sweeps = detail::get_or<Index>(c, "max_sweeps", cfg.cross.max_sweeps);
            cfg.cross.val_samples = detail::get_or<Index>(c, "val_samples", cfg.cross.val_samples);
            cfg.cross.val_rel_tol = detail::get_or<double>(c, "val_rel_tol", cfg.cross.val_rel_tol);
            cfg.cross.final_round_tol = detail::get_or<double>(c, "final_round_tol", cfg.cross.final_round_tol);
            cfg.cross.maxvol_tol = detail::get_or<double>(c, "maxvol_tol", cfg.cross.maxvol_tol);
        }
        cfg.cross.seed = cfg.seed;
        cfg.cross.validate();

        if (const YAML::Node o = root["outputs"]) {
            cfg.outputs.surrogate = detail::get_or<std::string>(o, "surrogate", "");
            cfg.outputs.sobol = detail::get_or<std::string>(o, "sobol", "");
            cfg.outputs.report = detail::get_or<std::string>(o, "report", "");
            cfg.outputs.csv_prefix = detail::get_or<std::string>(o, "csv", "");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

/// Evaluator for the configured model.
inline EvaluatorHandle make_evaluator(const RunConfig& cfg) {
    if (cfg.model.builtin == "sobol_g") return sobol_g_evaluator(cfg.model.g_coefficients, cfg.workers);
    if (cfg.model.builtin == "decay_chain") return decay_chain_evaluator(cfg.model.days, cfg.workers);
    SubprocessOptions opts;
    opts.batch_size = cfg.model.batch_size;
    opts.timeout_seconds = cfg.model.timeout;
    opts.workers = cfg.workers;
    return spawn_subprocess_evaluator(cfg.model.command, cfg.space->dimension(), opts);
}

}  // namespace ttsense::cli
