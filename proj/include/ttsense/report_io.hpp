#pragma once

// JSON and CSV serialisation of reports, and Sobol TT persistence
// (TT file plus a JSON sidecar next to it).

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ttsense/baselines.hpp"
#include "ttsense/cross.hpp"
#include "ttsense/metrics.hpp"
#include "ttsense/sobol_tt.hpp"
#include "ttsense/tt_io.hpp"

namespace ttsense {

using json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

namespace detail {

inline json one_based(const std::vector<Index>& vars) {
    json out = json::array();
    for (Index v : vars) out.push_back(v + 1);
    return out;
}

inline json named(const std::vector<Index>& vars, const std::vector<std::string>& names) {
    json out = json::array();
    for (Index v : vars) out.push_back(v < names.size() ? names[v] : std::to_string(v + 1));
    return out;
}

inline json effective_json(Index dimension, double achieved, bool reached) {
    return json{{"dimension", dimension}, {"achieved", achieved}, {"reached", reached}};
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

/// Report body shared by every method; fields a method does not produce are null.
inline json report_json(const SensitivityReport& r) {
    json j;
    j["names"] = r.names;
    j["epsilon"] = r.epsilon;
    j["mean"] = r.mean;
    j["variance"] = r.variance;
    j["mean_dimension"] = r.mean_dimension;
    j["dimension_distribution"] = std::vector<double>(r.dimension_distribution.begin() + 1, r.dimension_distribution.end());
    j["dimension_distribution_residual"] = r.dimension_distribution.front();
    j["length_spectrum"] = std::vector<double>(r.length_spectrum.begin() + 1, r.length_spectrum.end());
    j["effective_superposition"] =
        detail::effective_json(r.superposition.dimension, r.superposition.achieved, r.superposition.reached);
    json trunc = detail::effective_json(r.truncation.dimension, r.truncation.achieved, r.truncation.reached);
    trunc["tuple"] = detail::one_based(r.truncation.tuple);
    trunc["tuple_names"] = detail::named(r.truncation.tuple, r.names);
    trunc["profile"] = r.truncation.profile;
    j["effective_truncation"] = trunc;
    j["effective_successive"] =
        detail::effective_json(r.successive.dimension, r.successive.achieved, r.successive.reached);
    j["shapley"] = r.shapley;
    j["first_order"] = r.first_order;
    j["totals"] = r.totals;
    j["liu_owen_discrepancy"] = r.liu_owen_discrepancy;
    return j;
}

inline json report_json(const BruteForceMetrics& m, const BruteForceANOVA& a, const std::vector<std::string>& names,
                        double eps) {
    json j;
    j["names"] = names;
    j["epsilon"] = eps;
    j["mean"] = a.mean;
    j["variance"] = a.total_variance;
    j["mean_dimension"] = m.mean_dimension;
    j["dimension_distribution"] =
        std::vector<double>(m.dimension_distribution.begin() + 1, m.dimension_distribution.end());
    j["dimension_distribution_residual"] = m.dimension_distribution.front();
    j["length_spectrum"] = std::vector<double>(m.length_spectrum.begin() + 1, m.length_spectrum.end());
    const double target = 1.0 - eps;
    j["effective_superposition"] =
        detail::effective_json(m.superposition, m.superposition_achieved, m.superposition_achieved >= target);
    json trunc = detail::effective_json(m.truncation, m.truncation_achieved, m.truncation_achieved >= target);
    trunc["tuple"] = detail::one_based(m.truncation_tuple);
    trunc["tuple_names"] = detail::named(m.truncation_tuple, names);
    trunc["profile"] = m.truncation_profile;
    j["effective_truncation"] = trunc;
    j["effective_successive"] =
        detail::effective_json(m.successive, m.successive_achieved, m.successive_achieved >= target);
    j["shapley"] = m.shapley;
    j["first_order"] = m.first_order;
    j["totals"] = m.totals;
    double total_sum = 0.0;
    for (double t : m.totals) total_sum += t;
    j["liu_owen_discrepancy"] = std::abs(m.mean_dimension - total_sum);
    return j;
}

inline json report_json(const SaltelliResult& s, const std::vector<std::string>& names) {
    json j;
    j["names"] = names;
    j["mean"] = s.mean;
    j["variance"] = s.variance;
    j["first_order"] = s.first_order;
    j["totals"] = s.totals;
    j["shapley"] = nullptr;
    j["standard_errors"] = {{"first_order", s.first_order_se}, {"totals", s.totals_se}};
    j["evaluations"] = s.evaluations;
    j["degenerate_variance"] = s.degenerate;
    j["estimator"] = s.variant;
    return j;
}

inline json report_json(const ShapleyEstimate& s, const std::vector<std::string>& names) {
    json j;
    j["names"] = names;
    j["shapley"] = s.values;
    j["first_order"] = nullptr;
    j["totals"] = nullptr;
    j["standard_errors"] = {{"shapley", s.standard_errors}};
    j["evaluations"] = s.evaluations;
    j["permutations"] = s.permutations;
    j["inner_samples"] = s.inner_samples;
    return j;
}

inline json cross_json(const CrossConfig& c) {
    return json{{"initial_rank", c.initial_rank}, {"kick_rank", c.kick_rank},   {"max_rank", c.max_rank},
                {"max_sweeps", c.max_sweeps},     {"val_samples", c.val_samples}, {"val_rel_tol", c.val_rel_tol},
                {"seed", c.seed},                 {"final_round_tol", c.final_round_tol},
                {"maxvol_tol", c.maxvol_tol}};
}

inline json cross_json(const CrossReport& r) {
    return json{{"eval_count", r.eval_count},
                {"validation_evals", r.validation_evals},
                {"sweeps", r.sweeps},
                {"val_error", r.val_error},
                {"converged", r.converged},
                {"ranks", r.ranks},
                {"error_history", r.error_history},
                {"maxvol_fallbacks", r.maxvol_fallbacks}};
}

// ---------------------------------------------------------------------------
// CSV tables

/// Per-variable table: name, first-order, total, Shapley (+ optional standard errors).
inline void write_indices_csv(std::ostream& os, const std::vector<std::string>& names,
                              const std::vector<double>& first, const std::vector<double>& totals,
                              const std::vector<double>& shapley) {
    os << "variable,first_order,total,shapley\n";
    for (Index n = 0; n < names.size(); ++n) {
        auto cell = [&](const std::vector<double>& v) { return n < v.size() ? detail::csv_number(v[n]) : ""; };
        os << names[n] << ',' << cell(first) << ',' << cell(totals) << ',' << cell(shapley) << '\n';
    }
}

/// Dimension summary: metric, value, relative variance captured.
inline void write_dimensions_csv(std::ostream& os, const SensitivityReport& r) {
    os << "metric,value,relative_variance\n";
    os << "mean_dimension," << detail::csv_number(r.mean_dimension) << ",\n";
    os << "superposition," << r.superposition.dimension << ',' << detail::csv_number(r.superposition.achieved)
       << '\n';
    os << "truncation," << r.truncation.dimension << ',' << detail::csv_number(r.truncation.achieved) << '\n';
    os << "successive," << r.successive.dimension << ',' << detail::csv_number(r.successive.achieved) << '\n';
}

/// Two-column plot data: order, mass (orders 1..N).
inline void write_dimdist_csv(std::ostream& os, const std::vector<double>& nu) {
    os << "order,mass\n";
    for (Index n = 1; n < nu.size(); ++n) os << n << ',' << detail::csv_number(nu[n]) << '\n';
}

// ---------------------------------------------------------------------------
// Sobol TT persistence

inline std::string sobol_sidecar_path(const std::string& tt_path) { return tt_path + ".json"; }

inline void save_sobol_tt(const std::string& path, const SobolTT& s) {
    save_tt(path, s.tensor);
    std::ofstream os(sobol_sidecar_path(path));
    if (!os) throw Error("cannot open '" + sobol_sidecar_path(path) + "' for writing");
    const json j{{"mean", s.mean}, {"variance", s.variance}, {"round_tol", s.round_tol}, {"names", s.names}};
    os << j.dump(2) << '\n';
}

inline SobolTT load_sobol_tt(const std::string& path) {
    TTTensor t = load_tt(path);
    std::ifstream is(sobol_sidecar_path(path));
    if (!is) throw Error("cannot open '" + sobol_sidecar_path(path) + "' for reading");
    const json j = json::parse(is);
    SobolTT s{std::move(t), j.at("mean").get<double>(), j.at("variance").get<double>(),
              j.at("round_tol").get<double>(), j.at("names").get<std::vector<std::string>>()};
    if (s.names.size() != s.tensor.order()) throw Error("Sobol sidecar: one name per variable is required");
    return s;
}

/// Shape summary of a TT file for inspection.
inline json tt_info_json(const TTTensor& t) {
    return json{{"order", t.order()},
                {"mode_sizes", t.mode_sizes()},
                {"ranks", t.ranks()},
                {"max_rank", t.max_rank()},
                {"trailing_rank_open", t.trailing_rank_open()},
                {"parameters", t.parameter_count()}};
}

}  // namespace ttsense
