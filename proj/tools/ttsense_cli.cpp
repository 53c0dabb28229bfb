// ttsense: build TT surrogates, extract Sobol TTs and write sensitivity reports.
//
// Exit codes: 0 ok, 1 configuration / usage / IO, 2 evaluator failure,
// 3 approximation did not converge, 4 degenerate model variance, 5 other
// numerical failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using namespace ttsense;
using namespace ttsense::cli;

namespace {

enum ExitCode : int { kOk = 0, kConfig = 1, kEvaluator = 2, kConvergence = 3, kDegenerate = 4, kNumeric = 5 };

/// Raised for a build whose validation error missed the target.
struct NotConverged : Error {
    using Error::Error;
};

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<Index> workers;
};

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

RunConfig load(const Common& c) {
    std::vector<std::string> overrides = c.overrides;
    if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
    if (c.workers) overrides.push_back("workers=" + std::to_string(*c.workers));
    RunConfig cfg = parse_config(c.config_path.empty() ? std::string() : read_file(c.config_path), overrides);
    if (cfg.model.builtin == "sobol_g") {
        for (const AxisGrid& axis : cfg.space->axes()) {
            if (axis.nodes.front() < 0.0 || axis.nodes.back() > 1.0) {
                throw ConfigError("config: sobol_g inputs must lie in [0, 1]");
            }
        }
    }
    return cfg;
}

json envelope(const std::string& command, const std::string& method, const RunConfig* cfg) {
    json j;
    j["schema"] = kReportSchema;
    j["tool"] = "ttsense";
    j["version"] = TTSENSE_VERSION;
    j["command"] = command;
    j["method"] = method;
    if (cfg) {
        j["config_hash"] = cfg->hash;
        j["seed"] = cfg->seed;
    }
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << text;
    if (!os) throw ConfigError("write to '" + path + "' failed");
}

void emit_json(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_text(path, j.dump(2) + "\n");
    }
}

/// Wraps an evaluator so that any failure inside the model surfaces as an evaluator error.
struct EvaluatorFailure : Error {
    using Error::Error;
};

EvaluatorHandle guarded(const EvaluatorHandle& inner) {
    BatchFunction call = [inner](const RowMatrix& x, std::span<double> out) {
        std::vector<double> y;
        try {
            y = inner.evaluate_batch(x);
        } catch (const std::exception& e) {
            throw EvaluatorFailure(std::string("evaluator: ") + e.what());
        }
        std::copy(y.begin(), y.end(), out.begin());
    };
    return EvaluatorHandle(inner.arity(), {call}, inner.description());
}

std::vector<Index> parse_tuple(const std::string& text, Index N) {
    std::vector<Index> vars;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || v < 1 || v > static_cast<long long>(N)) {
            throw ConfigError("--index: '" + item + "' is not a variable number in 1.." + std::to_string(N));
        }
        vars.push_back(static_cast<Index>(v - 1));
    }
    std::sort(vars.begin(), vars.end());
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end()) throw ConfigError("--index: repeated variable");
    return vars;
}

// ---------------------------------------------------------------------------

struct BuildArgs {
    std::string surrogate;
    std::string report;
};

int cmd_build(const Common& common, const BuildArgs& args) {
    const RunConfig cfg = load(common);
    const std::string out = args.surrogate.empty() ? cfg.outputs.surrogate : args.surrogate;
    if (out.empty()) throw ConfigError("build: no surrogate path (outputs.surrogate or --out)");
    const EvaluatorHandle f = guarded(make_evaluator(cfg));
    const auto t0 = std::chrono::steady_clock::now();
    const CrossResult res = tt_cross(f, *cfg.space, cfg.cross);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_tt(out, res.tensor);

    json j = envelope("build", "tt_cross", &cfg);
    j["surrogate"] = out;
    j["names"] = cfg.space->names();
    j["mode_sizes"] = res.tensor.mode_sizes();
    j["cross_config"] = cross_json(cfg.cross);
    j["cross_report"] = cross_json(res.report);
    emit_json(j, args.report.empty() ? out + ".build.json" : args.report);
    std::cerr << "build: " << res.report.eval_count << " evaluations, ranks";
    for (Index r : res.report.ranks) std::cerr << ' ' << r;
    std::cerr << ", validation error " << res.report.val_error << ", " << seconds << " s\n";
    std::cout << json{{"surrogate", out},
                      {"eval_count", res.report.eval_count},
                      {"ranks", res.report.ranks},
                      {"val_error", res.report.val_error},
                      {"converged", res.report.converged}}
                     .dump()
              << '\n';
    if (!res.report.converged) {
        throw NotConverged("build: validation error " + std::to_string(res.report.val_error) + " above target " +
                           std::to_string(cfg.cross.val_rel_tol) + " after " + std::to_string(res.report.sweeps) +
                           " sweeps (surrogate written anyway)");
    }
    return kOk;
}

struct AnalyzeArgs {
    std::string surrogate;
    std::string from_sobol;
    std::string report;
    std::string csv_prefix;
    std::string dimdist;
    std::optional<std::string> index;
    std::optional<double> epsilon;
};

int cmd_analyze(const Common& common, const AnalyzeArgs& args) {
    const RunConfig cfg = load(common);
    const double eps = args.epsilon.value_or(cfg.epsilon);
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("--epsilon must be in (0, 1)");

    SobolTT s = [&] {
        if (!args.from_sobol.empty()) return load_sobol_tt(args.from_sobol);
        const std::string path = args.surrogate.empty() ? cfg.outputs.surrogate : args.surrogate;
        if (path.empty()) throw ConfigError("analyze: no surrogate path (outputs.surrogate or --surrogate)");
        const TTTensor surrogate = [&] {
            try {
                return load_tt(path);
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
        }();
        if (surrogate.mode_sizes() != cfg.space->sizes()) {
            throw ConfigError("analyze: surrogate mode sizes do not match the configured space");
        }
        SobolTT built = build_sobol_tt(surrogate, *cfg.space, cfg.sobol_round_tol);
        if (!cfg.outputs.sobol.empty()) save_sobol_tt(cfg.outputs.sobol, built);
        return built;
    }();
    const Index N = s.order();

    if (args.index) {
        const auto vars = parse_tuple(*args.index, N);
        const TTTensor closed = closed_tt(s);
        json j = envelope("analyze", "tt_automata", &cfg);
        j["tuple"] = json::array();
        for (Index v : vars) j["tuple"].push_back(v + 1);
        j["sobol"] = query_index(s, vars);
        j["closed"] = vars.empty() ? 0.0 : closed_index(closed, vars);
        j["total"] = vars.empty() ? 0.0 : total_index(closed, vars);
        std::cout << j.dump(2) << '\n';
        return kOk;
    }

    const SensitivityReport r = full_report(s, eps);
    json j = envelope("analyze", "tt_automata", &cfg);
    const json body = report_json(r);
    for (auto& [k, v] : body.items()) j[k] = v;
    j["sobol_tt_ranks"] = s.tensor.ranks();
    emit_json(j, args.report.empty() ? cfg.outputs.report : args.report);

    const std::string prefix = args.csv_prefix.empty() ? cfg.outputs.csv_prefix : args.csv_prefix;
    if (!prefix.empty()) {
        std::ostringstream a, b;
        write_indices_csv(a, r.names, r.first_order, r.totals, r.shapley);
        write_dimensions_csv(b, r);
        write_text(prefix + "_indices.csv", a.str());
        write_text(prefix + "_dimensions.csv", b.str());
    }
    if (!args.dimdist.empty()) {
        std::ostringstream os;
        write_dimdist_csv(os, r.dimension_distribution);
        write_text(args.dimdist, os.str());
    }
    return kOk;
}

struct BaselineArgs {
    std::string method;
    std::optional<Index> budget;
    Index inner = 3;
    Index bootstrap = 200;
    std::string report;
};

int cmd_baseline(const Common& common, const BaselineArgs& args) {
    const RunConfig cfg = load(common);
    const ModelSpace& space = *cfg.space;
    const EvaluatorHandle f = guarded(make_evaluator(cfg));
    json j = envelope("baseline", args.method, &cfg);
    json body;
    if (args.method == "brute_force") {
        if (space.dimension() > kBruteForceMaxOrder) {
            throw ConfigError("baseline brute_force: at most " + std::to_string(kBruteForceMaxOrder) + " variables");
        }
        const BruteForceANOVA a = brute_force_anova(f, space);
        body = report_json(brute_force_metrics(a, cfg.epsilon), a, space.names(), cfg.epsilon);
        body["evaluations"] = f.eval_count();
    } else if (args.method == "saltelli") {
        const Index base = args.budget.value_or(4096);
        const SaltelliResult r = saltelli_estimate(f, space, base, cfg.seed, args.bootstrap);
        if (r.degenerate) throw DegenerateModelError("baseline saltelli: sample variance is zero");
        body = report_json(r, space.names());
        body["base_samples"] = base;
    } else if (args.method == "shapley_mc") {
        const Index perms = args.budget.value_or(1000);
        const ShapleyEstimate r = shapley_permutation_estimate(f, space, perms, args.inner, cfg.seed);
        double sum = 0.0;
        for (double v : r.values) sum += v;
        if (sum == 0.0) throw DegenerateModelError("baseline shapley_mc: estimated variance is zero");
        body = report_json(r, space.names());
    } else {
        throw ConfigError("baseline: unknown method '" + args.method + "' (brute_force | saltelli | shapley_mc)");
    }
    for (auto& [k, v] : body.items()) j[k] = v;
    emit_json(j, args.report);
    return kOk;
}

struct MaskArgs {
    std::string kind;
    Index N = 0;
    Index n = 0;
    double tol = 1e-6;
    std::string out;
};

constexpr Index kMaskDumpMaxOrder = 12;

int cmd_mask(const MaskArgs& args) {
    const Index N = args.N;
    if (N < 1 || N > kMaskDumpMaxOrder) {
        throw ConfigError("mask: N must be in 1.." + std::to_string(kMaskDumpMaxOrder) + " for a dense dump");
    }
    const TTTensor t = [&] {
        try {
            if (args.kind == "weight") return hamming_weight_tt(N);
            if (args.kind == "hamming_mask") return hamming_mask_tt(N, args.n);
            if (args.kind == "hamming_state") return hamming_state_tt(N);
            if (args.kind == "length_mask") return length_mask_tt(N, args.n);
            if (args.kind == "length_state") return length_state_tt(N);
            if (args.kind == "reciprocal") return reciprocal_weight_tt(N, args.tol);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        throw ConfigError("mask: unknown kind '" + args.kind + "'");
    }();
    const Index channels = t.output_channels();
    const std::vector<double> dense = full(t);
    std::ostringstream os;
    os << std::setprecision(17) << "tuple";
    if (channels == 1) {
        os << ",value";
    } else {
        for (Index k = 0; k < channels; ++k) os << ",state" << k;
    }
    os << "\n# ranks";
    for (Index r : t.ranks()) os << ' ' << r;
    os << '\n';
    const Index tuples = Index{1} << N;
    for (Index flat = 0; flat < tuples; ++flat) {
        for (Index b = 0; b < N; ++b) os << (((flat >> (N - 1 - b)) & 1) ? '1' : '0');
        for (Index k = 0; k < channels; ++k) os << ',' << dense[flat * channels + k];
        os << '\n';
    }
    if (args.out.empty()) {
        std::cout << os.str();
    } else {
        write_text(args.out, os.str());
    }
    return kOk;
}

int cmd_info(const std::string& path) {
    const TTTensor t = [&] {
        try {
            return load_tt(path);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }();
    json j = envelope("info", "inspect", nullptr);
    j["file"] = path;
    const json info = tt_info_json(t);
    for (auto& [k, v] : info.items()) j[k] = v;
    const std::string sidecar = sobol_sidecar_path(path);
    if (fs::exists(sidecar)) {
        std::ifstream is(sidecar);
        try {
            j["sobol"] = json::parse(is);
        } catch (const json::exception&) {
            // a .json next to the file that is not ours
        }
    }
    std::cout << j.dump(2) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ttsense: tensor-train surrogates and variance-based sensitivity metrics"};
    app.set_version_flag("--version", TTSENSE_VERSION);
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("-c,--config", common.config_path, "YAML run configuration");
        if (config_required) opt->required();
        sub->add_option("--set", common.overrides, "override a config key: key.path=value (repeatable)");
        sub->add_option("--seed", common.seed, "random seed (overrides config 'seed')");
        sub->add_option("--workers", common.workers, "parallel evaluator workers (overrides config 'workers')")
            ->check(CLI::PositiveNumber);
    };

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "cross-approximate the model and save the TT surrogate");
    add_common(build_cmd, true);
    build_cmd->add_option("-o,--out", build.surrogate, "surrogate file (overrides outputs.surrogate)");
    build_cmd->add_option("--report", build.report, "build report JSON (default <surrogate>.build.json)");

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "extract the Sobol TT and compute every metric");
    add_common(analyze_cmd, true);
    analyze_cmd->add_option("-s,--surrogate", analyze.surrogate, "surrogate file (overrides outputs.surrogate)");
    analyze_cmd->add_option("--from-sobol", analyze.from_sobol, "use a saved Sobol TT instead of a surrogate");
    analyze_cmd->add_option("--report", analyze.report, "report JSON path (default outputs.report or stdout)");
    analyze_cmd->add_option("--csv", analyze.csv_prefix, "write <prefix>_indices.csv and <prefix>_dimensions.csv");
    analyze_cmd->add_option("--dimdist", analyze.dimdist, "write the dimension distribution as CSV");
    analyze_cmd->add_option("--index", analyze.index, "print S, closed and total index of a tuple, e.g. \"1,3,7\"");
    analyze_cmd->add_option("--epsilon", analyze.epsilon, "effective-dimension threshold (overrides config)");

    BaselineArgs baseline;
    auto* baseline_cmd = app.add_subcommand("baseline", "reference estimators for comparison");
    add_common(baseline_cmd, true);
    baseline_cmd->add_option("-m,--method", baseline.method, "brute_force | saltelli | shapley_mc")->required();
    baseline_cmd->add_option("--budget", baseline.budget,
                             "saltelli: base samples (default 4096); shapley_mc: permutations (default 1000)");
    baseline_cmd->add_option("--inner", baseline.inner, "shapley_mc inner samples per prefix")
        ->check(CLI::Range(2, 1 << 20));
    baseline_cmd->add_option("--bootstrap", baseline.bootstrap, "saltelli bootstrap resamples");
    baseline_cmd->add_option("--report", baseline.report, "report JSON path (default stdout)");

    MaskArgs mask;
    auto* mask_cmd = app.add_subcommand("mask", "dump an automaton mask tensor as CSV");
    mask_cmd->add_option("-k,--kind", mask.kind,
                         "weight | hamming_mask | hamming_state | length_mask | length_state | reciprocal")
        ->required();
    mask_cmd->add_option("-N", mask.N, "number of variables (<= 12)")->required();
    mask_cmd->add_option("-n", mask.n, "threshold for hamming_mask / length_mask");
    mask_cmd->add_option("--tol", mask.tol, "relative tolerance for reciprocal");
    mask_cmd->add_option("-o,--out", mask.out, "CSV path (default stdout)");

    std::string info_path;
    auto* info_cmd = app.add_subcommand("info", "describe a TT file");
    info_cmd->add_option("file", info_path, "TT file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*build_cmd) return cmd_build(common, build);
        if (*analyze_cmd) return cmd_analyze(common, analyze);
        if (*baseline_cmd) return cmd_baseline(common, baseline);
        if (*mask_cmd) return cmd_mask(mask);
        if (*info_cmd) return cmd_info(info_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const EvaluatorFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEvaluator;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEvaluator;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEvaluator;
    } catch (const NotConverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const ApproximationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const DegenerateModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kConfig;
}
