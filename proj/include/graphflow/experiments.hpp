#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphflow/calibrate.hpp"
#include "graphflow/flow.hpp"
#include "graphflow/pgap.hpp"
#include "graphflow/schemes.hpp"

namespace graphflow {

using Json = nlohmann::json;

namespace detail {

inline std::string format_sig(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

// CSV table with a fixed column schema. LF line endings, '.' decimals,
// 6 significant digits, RFC-4180-style quoting. The only run-dependent
// content is the timestamp comment on the first line.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns)
        : columns_(std::move(columns)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns_.size())
            throw std::invalid_argument("csv row width mismatch");
        rows_.push_back(std::move(cells));
    }

    static std::string cell(double v) { return detail::format_sig(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }

    void write(std::ostream& out) const {
        out << "# generated " << detail::utc_timestamp() << "\n";
        for (std::size_t c = 0; c < columns_.size(); ++c)
            out << (c ? "," : "") << detail::csv_escape(columns_[c]);
        out << "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << detail::csv_escape(row[c]);
            out << "\n";
        }
    }

    void write_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open output file: " + path);
        write(out);
        if (!out) throw IoError("write failed: " + path);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

inline void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

// Sidecar path for an output file: the extension is replaced by .json, or
// .params.json appended when the output itself is JSON.
inline std::string sidecar_path(const std::string& out_path) {
    const auto dot = out_path.find_last_of('.');
    const auto slash = out_path.find_last_of('/');
    const bool has_ext =
        dot != std::string::npos && (slash == std::string::npos || dot > slash);
    if (has_ext && out_path.substr(dot) == ".json")
        return out_path + ".params.json";
    if (has_ext) return out_path.substr(0, dot) + ".json";
    return out_path + ".json";
}

// Graph spec: {"family": "path"|"cycle"|"star"|"complete"|"grid"|"er"|
// "regular"|"karate", ...family parameters}, or {"file": path}.
inline Graph graph_from_spec(const Json& spec) {
    if (spec.contains("file")) return load_graph_file(spec.at("file"));
    const std::string family = spec.at("family");
    if (family == "path") return path_graph(spec.at("n"));
    if (family == "cycle") return cycle_graph(spec.at("n"));
    if (family == "star") return star_graph(spec.at("n"));
    if (family == "complete")
        return complete_graph(spec.at("n"), spec.value("w", 1.0));
    if (family == "grid") return grid_graph(spec.at("rows"), spec.at("cols"));
    if (family == "er")
        return erdos_renyi_graph(spec.at("n"), spec.at("prob"),
                                 spec.value("seed", 1));
    if (family == "regular")
        return random_regular_graph(spec.at("n"), spec.value("degree", 4),
                                    spec.value("seed", 7));
    if (family == "karate") return karate_club_graph();
    throw std::invalid_argument("unknown graph family: " + family);
}

inline std::string graph_spec_name(const Json& spec) {
    if (spec.contains("file")) return spec.at("file");
    const std::string family = spec.at("family");
    if (family == "path") return "P" + std::to_string(int(spec.at("n")));
    if (family == "cycle") return "C" + std::to_string(int(spec.at("n")));
    if (family == "star") return "S" + std::to_string(int(spec.at("n")));
    if (family == "complete") return "K" + std::to_string(int(spec.at("n")));
    if (family == "grid")
        return "grid" + std::to_string(int(spec.at("rows"))) + "x" +
               std::to_string(int(spec.at("cols")));
    if (family == "er")
        return "ER(" + std::to_string(int(spec.at("n"))) + "," +
               detail::format_sig(spec.at("prob")) + ")";
    if (family == "regular")
        return "reg" + std::to_string(int(spec.value("degree", 4))) + "-" +
               std::to_string(int(spec.at("n")));
    return family;
}

// Potential spec: {"kind": "quadratic"|"logcosh", "gamma": scalar|array,
// "h_star": scalar|array, "mu": scalar}. gamma applies to quadratic, mu to
// logcosh.
inline DissipationPotential potential_from_spec(const Json& spec, int n) {
    auto vec = [&](const Json& v, const char* what) {
        if (v.is_number()) return Eigen::VectorXd::Constant(n, double(v)).eval();
        if (v.is_array()) {
            if (int(v.size()) != n)
                throw std::invalid_argument(std::string(what) +
                                            " array length mismatch");
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i) x[i] = v.at(i);
            return x;
        }
        throw std::invalid_argument(std::string(what) +
                                    " must be a number or array");
    };
    const std::string kind = spec.value("kind", "quadratic");
    const Eigen::VectorXd h_star = vec(spec.value("h_star", Json(0.0)), "h_star");
    if (kind == "quadratic")
        return quadratic_potential(vec(spec.value("gamma", Json(1.0)), "gamma"),
                                   h_star);
    if (kind == "logcosh")
        return logcosh_potential(double(spec.value("mu", 1.0)), h_star);
    throw std::invalid_argument("unknown potential kind: " + kind);
}

struct ExperimentOutcome {
    std::vector<std::string> files;
    Json resolved;
};

namespace detail {

inline void emit(const CsvTable& table, const Json& resolved,
                 const std::string& out_path, ExperimentOutcome& outcome) {
    table.write_file(out_path);
    Json side = resolved;
    side["generated"] = utc_timestamp();
    write_json_file(side, sidecar_path(out_path));
    outcome.files.push_back(out_path);
    outcome.files.push_back(sidecar_path(out_path));
}

inline Json default_cp_graphs() {
    return Json::array({{{"family", "path"}, {"n", 10}},
                        {{"family", "path"}, {"n", 100}},
                        {{"family", "cycle"}, {"n", 20}},
                        {{"family", "grid"}, {"rows", 10}, {"cols", 10}},
                        {{"family", "karate"}},
                        {{"family", "er"}, {"n", 100}, {"prob", 0.1}, {"seed", 1}}});
}

}  // namespace detail

// Variational C_p estimate vs the closed-form comparison value over a graph
// suite.
inline ExperimentOutcome run_cp_table(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graphs")) resolved["graphs"] = detail::default_cp_graphs();
    if (!resolved.contains("p_values")) resolved["p_values"] = {3.0};
    resolved["restarts"] = resolved.value("restarts", 20);
    resolved["max_iter"] = resolved.value("max_iter", 5000);
    resolved["seed"] = resolved.value("seed", 0);
    resolved["jobs"] = resolved.value("jobs", 1);
    const std::string out = resolved.value("out", "cp_table.csv");
    resolved["out"] = out;

    CsvTable table({"graph", "p", "empirical", "lower_bound", "ratio"});
    for (const auto& spec : resolved["graphs"]) {
        const Graph g = graph_from_spec(spec);
        const std::string name = graph_spec_name(spec);
        for (double p : resolved["p_values"]) {
            PGapOptions opts;
            opts.restarts = resolved["restarts"];
            opts.max_iter = resolved["max_iter"];
            opts.seed = resolved["seed"].get<std::uint64_t>();
            opts.jobs = resolved["jobs"];
            const double emp = estimate_cp(g, p, opts).value;
            const double lb = cp_lower_bound(g, p);
            table.add_row({name, CsvTable::cell(p), CsvTable::cell(emp),
                           CsvTable::cell(lb), CsvTable::cell(emp / lb)});
        }
    }
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Mean time for ||h_perp|| to cross a threshold, across p values, with the
// same seeded initial conditions reused for every p.
inline ExperimentOutcome run_speedup_table(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graph"))
        resolved["graph"] = {{"family", "grid"}, {"rows", 20}, {"cols", 20}};
    if (!resolved.contains("p_values")) resolved["p_values"] = {2.0, 2.5, 3.0, 4.0};
    resolved["runs"] = resolved.value("runs", 100);
    resolved["alpha"] = resolved.value("alpha", 1.0);
    resolved["alpha_p"] = resolved.value("alpha_p", 0.5);
    resolved["mu"] = resolved.value("mu", 0.1);
    resolved["perp0"] = resolved.value("perp0", 5.0);
    resolved["threshold"] = resolved.value("threshold", 0.1);
    resolved["t_max"] = resolved.value("t_max", 200.0);
    resolved["seed"] = resolved.value("seed", 0);
    resolved["rel_tol"] = resolved.value("rel_tol", 1e-6);
    resolved["abs_tol"] = resolved.value("abs_tol", 1e-9);
    const std::string out = resolved.value("out", "speedup_table.csv");
    resolved["out"] = out;

    const Graph g = graph_from_spec(resolved["graph"]);
    const int n = g.node_count();
    const int runs = resolved["runs"];
    const double perp0 = resolved["perp0"];
    const std::uint64_t seed = resolved["seed"].get<std::uint64_t>();

    std::vector<Eigen::VectorXd> starts(runs);
    for (int r = 0; r < runs; ++r) {
        Rng rng(derive_seed(seed, r));
        Eigen::VectorXd h0 = rng.normal_vector(n);
        h0.array() -= h0.mean();
        starts[r] = h0 * (perp0 / h0.norm());
    }

    IntegrateOptions iopts;
    iopts.rel_tol = resolved["rel_tol"];
    iopts.abs_tol = resolved["abs_tol"];

    std::vector<double> mean_time;
    for (double p : resolved["p_values"]) {
        ModelParams mp{resolved["alpha"], resolved["alpha_p"], p,
                       quadratic_potential(double(resolved["mu"]), 0.0, n)};
        const SourceSignal src = SourceSignal::constant(Eigen::VectorXd::Zero(n));
        double acc = 0.0;
        for (int r = 0; r < runs; ++r) {
            const ThresholdCrossing tc = transient_time_to_threshold(
                mp, g, src, starts[r], resolved["threshold"], resolved["t_max"],
                iopts);
            if (!tc.reached)
                throw NumericalError("speedup run missed the threshold", tc.final_value);
            acc += tc.time;
        }
        mean_time.push_back(acc / runs);
    }

    CsvTable table({"p", "sim_time", "relative_speedup"});
    for (std::size_t i = 0; i < mean_time.size(); ++i) {
        const double p = resolved["p_values"].at(i);
        table.add_row({CsvTable::cell(p), CsvTable::cell(mean_time[i]),
                       CsvTable::cell(mean_time.front() / mean_time[i])});
    }
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Tail-averaged squared error of the stochastic resolvent scheme vs the
// theoretical floor, across step sizes.
inline ExperimentOutcome run_noise_floor_table(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graph"))
        resolved["graph"] = {{"family", "star"}, {"n", 50}};
    if (!resolved.contains("eta_values"))
        resolved["eta_values"] = {0.5, 1.0, 2.0, 4.0};
    resolved["alpha"] = resolved.value("alpha", 1.0);
    resolved["mu"] = resolved.value("mu", 0.5);
    resolved["sigma2"] = resolved.value("sigma2", 0.01);
    resolved["iterations"] = resolved.value("iterations", 200000);
    resolved["chains"] = resolved.value("chains", 1);
    resolved["tail_fraction"] = resolved.value("tail_fraction", 0.5);
    resolved["seed"] = resolved.value("seed", 0);
    resolved["jobs"] = resolved.value("jobs", 1);
    const std::string out = resolved.value("out", "noise_floor_table.csv");
    resolved["out"] = out;

    const Graph g = graph_from_spec(resolved["graph"]);
    const int n = g.node_count();
    const double mu = resolved["mu"];
    const double sigma2 = resolved["sigma2"];
    ModelParams mp{resolved["alpha"], 0.0, 2.0,
                   quadratic_potential(mu, 0.0, n)};
    const Eigen::VectorXd s_inf = Eigen::VectorXd::Constant(n, 1.0 / n);
    const Eigen::VectorXd h0 = solve_equilibrium(mp, g, s_inf);

    CsvTable table({"eta", "empirical_floor", "theoretical_bound", "ratio"});
    for (double eta : resolved["eta_values"]) {
        double floor_est;
        if (int(resolved["chains"]) > 1) {
            floor_est = stochastic_ensemble(mp, g, s_inf, sigma2, eta, h0,
                                            long(resolved["iterations"]),
                                            int(resolved["chains"]),
                                            resolved["seed"].get<std::uint64_t>(),
                                            resolved["tail_fraction"], 1,
                                            int(resolved["jobs"]))
                            .floor_estimate;
        } else {
            floor_est = run_stochastic_resolvent(
                            mp, g, s_inf, sigma2, eta, h0,
                            long(resolved["iterations"]),
                            resolved["seed"].get<std::uint64_t>(),
                            resolved["tail_fraction"])
                            .floor_estimate;
        }
        const double bound = noise_floor_bound(eta, mu, sigma2);
        table.add_row({CsvTable::cell(eta), CsvTable::cell(floor_est),
                       CsvTable::cell(bound), CsvTable::cell(floor_est / bound)});
    }
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Closed-form calibration on one graph; JSON is the primary output.
inline ExperimentOutcome run_sgps_demo(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graph"))
        resolved["graph"] = {{"family", "path"}, {"n", 3}};
    resolved["tau_star"] = resolved.value("tau_star", 1.0);
    resolved["h_target"] = resolved.value("h_target", 10.0);
    const std::string out = resolved.value("out", "sgps_demo.json");
    resolved["out"] = out;

    const Graph g = graph_from_spec(resolved["graph"]);
    const int n = g.node_count();
    CalibrationTargets t;
    t.tau_star = resolved["tau_star"];
    t.h_target = resolved["h_target"];
    t.h_star = Eigen::VectorXd::Zero(n);
    t.s_inf = Eigen::VectorXd::Constant(n, 1.0 / n);
    if (resolved.contains("s_inf"))
        for (int i = 0; i < n; ++i) t.s_inf[i] = resolved["s_inf"].at(i);
    if (resolved.contains("h_star"))
        for (int i = 0; i < n; ++i) t.h_star[i] = resolved["h_star"].at(i);
    const CalibrationResult r = sgps(g, t);

    Json j;
    j["alpha"] = r.alpha;
    j["gamma"] = std::vector<double>(r.gamma.begin(), r.gamma.end());
    j["h_inf"] = std::vector<double>(r.h_inf.begin(), r.h_inf.end());
    j["predicted_rate"] = r.predicted_rate;
    j["feasible"] = r.feasible;
    j["mass"] = r.h_inf.sum();
    if (!r.note.empty()) j["note"] = r.note;
    write_json_file(j, out);
    Json side = resolved;
    side["generated"] = detail::utc_timestamp();
    write_json_file(side, sidecar_path(out));
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    outcome.files = {out, sidecar_path(out)};
    return outcome;
}

// Closed-form calibration outputs across target pairs.
inline ExperimentOutcome run_sensitivity_table(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graph"))
        resolved["graph"] = {{"family", "path"}, {"n", 3}};
    if (!resolved.contains("targets"))
        resolved["targets"] = Json::array({{{"tau_star", 1.0}, {"h_target", 10.0}},
                                           {{"tau_star", 2.0}, {"h_target", 20.0}},
                                           {{"tau_star", 0.5}, {"h_target", 5.0}}});
    const std::string out = resolved.value("out", "sensitivity_table.csv");
    resolved["out"] = out;

    const Graph g = graph_from_spec(resolved["graph"]);
    const int n = g.node_count();
    CsvTable table({"tau_star", "h_target", "rho_star", "alpha", "gamma_bar"});
    for (const auto& row : resolved["targets"]) {
        CalibrationTargets t;
        t.tau_star = row.at("tau_star");
        t.h_target = row.at("h_target");
        t.h_star = Eigen::VectorXd::Zero(n);
        t.s_inf = Eigen::VectorXd::Constant(n, 1.0 / n);
        const CalibrationResult r = sgps(g, t);
        table.add_row({CsvTable::cell(t.tau_star), CsvTable::cell(t.h_target),
                       CsvTable::cell(r.rho_star), CsvTable::cell(r.alpha),
                       CsvTable::cell(r.gamma_bar)});
    }
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Euler step-size sweep through the stability threshold.
inline ExperimentOutcome run_euler_stress(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graph"))
        resolved["graph"] = {{"family", "path"}, {"n", 3}};
    resolved["alpha"] = resolved.value("alpha", 1.0);
    resolved["gamma"] = resolved.value("gamma", 0.1);
    if (!resolved.contains("eta_fractions"))
        resolved["eta_fractions"] = {0.3, 0.6, 0.9, 0.99, 1.01};
    resolved["iterations"] = resolved.value("iterations", 10000);
    resolved["seed"] = resolved.value("seed", 0);
    const std::string out = resolved.value("out", "euler_stress.csv");
    resolved["out"] = out;

    const Graph g = graph_from_spec(resolved["graph"]);
    const int n = g.node_count();
    const double alpha = resolved["alpha"];
    const Eigen::VectorXd gamma =
        Eigen::VectorXd::Constant(n, double(resolved["gamma"]));
    const Eigen::VectorXd h_star = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd s_inf = Eigen::VectorXd::Constant(n, 1.0 / n);
    const double threshold = euler_threshold(g, alpha, gamma);

    Eigen::MatrixXd M = alpha * laplacian_matrix(g);
    M.diagonal() += gamma;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = es.eigenvalues();

    Rng rng(resolved["seed"].get<std::uint64_t>());
    const Eigen::VectorXd h0 = rng.normal_vector(n, 2.0);

    CsvTable table({"eta", "eta_over_threshold", "converged", "measured_factor",
                    "predicted_factor"});
    for (double frac : resolved["eta_fractions"]) {
        const double eta = frac * threshold;
        const SchemeReport rep = run_euler(g, alpha, gamma, h_star, s_inf, eta,
                                           h0, long(resolved["iterations"]));
        double predicted = 0.0;
        for (int i = 0; i < lam.size(); ++i)
            predicted = std::max(predicted, std::abs(1.0 - eta * lam[i]));
        table.add_row({CsvTable::cell(eta), CsvTable::cell(frac),
                       CsvTable::cell(rep.converged),
                       CsvTable::cell(rep.measured_factor),
                       CsvTable::cell(predicted)});
    }
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Fixed-alpha rate failure along growing paths vs expander contrast rows.
inline ExperimentOutcome run_nonsyn(const Json& cfg) {
    Json resolved = cfg;
    resolved["alpha"] = resolved.value("alpha", 1.0);
    resolved["rho_star"] = resolved.value("rho_star", 0.5);
    resolved["n_max"] = resolved.value("n_max", 12);
    if (!resolved.contains("expander_sizes"))
        resolved["expander_sizes"] = {50, 100, 200};
    resolved["seed"] = resolved.value("seed", 7);
    const std::string out = resolved.value("out", "nonsyn.csv");
    resolved["out"] = out;

    std::vector<int> sizes;
    for (int n : resolved["expander_sizes"]) sizes.push_back(n);
    const NonsynReport rep = nonsynonymy_report(
        resolved["alpha"], resolved["rho_star"], resolved["n_max"], sizes,
        resolved["seed"].get<std::uint64_t>());

    CsvTable table({"family", "n", "lambda2", "rate", "violated"});
    for (const auto& row : rep.rows)
        table.add_row({row.family, CsvTable::cell(row.n),
                       CsvTable::cell(row.lambda2), CsvTable::cell(row.rate),
                       CsvTable::cell(row.violated)});
    resolved["first_violation_n"] = rep.first_violation_n;
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Transient-phase bound check: measured time to leave the super-linear
// regime vs t_bound with the empirical C_p.
inline ExperimentOutcome run_two_regime(const Json& cfg) {
    Json resolved = cfg;
    if (!resolved.contains("graphs"))
        resolved["graphs"] = Json::array({{{"family", "cycle"}, {"n", 4}},
                                          {{"family", "complete"}, {"n", 5}}});
    resolved["alpha"] = resolved.value("alpha", 0.1);
    resolved["alpha_p"] = resolved.value("alpha_p", 2.0);
    resolved["p"] = resolved.value("p", 3.0);
    resolved["gamma"] = resolved.value("gamma", 0.01);
    resolved["perp0"] = resolved.value("perp0", 5.0);
    resolved["t_max"] = resolved.value("t_max", 50.0);
    resolved["seed"] = resolved.value("seed", 0);
    const std::string out = resolved.value("out", "two_regime.csv");
    resolved["out"] = out;

    CsvTable table({"graph", "p", "kappa2", "kappa_p", "u_th", "u0", "t_bound",
                    "t_measured", "within_bound"});
    for (const auto& spec : resolved["graphs"]) {
        const Graph g = graph_from_spec(spec);
        const int n = g.node_count();
        const double p = resolved["p"];
        ModelParams mp{resolved["alpha"], resolved["alpha_p"], p,
                       quadratic_potential(double(resolved["gamma"]), 0.0, n)};
        PGapOptions popts;
        popts.seed = resolved["seed"].get<std::uint64_t>();
        const double cp_emp = estimate_cp(g, p, popts).value;
        const TwoRegimeConstants trc = two_regime_constants(mp, g, cp_emp);

        const Eigen::VectorXd h0 =
            spectral_summary(g).fiedler * double(resolved["perp0"]);
        const double u0 = double(resolved["perp0"]) * double(resolved["perp0"]);
        const double t_bound = trc.t_bound(u0);
        const SourceSignal src = SourceSignal::constant(Eigen::VectorXd::Zero(n));
        const ThresholdCrossing tc = transient_time_to_threshold(
            mp, g, src, h0, std::sqrt(trc.u_threshold), resolved["t_max"]);
        if (!tc.reached)
            throw NumericalError("two-regime run missed the threshold",
                                 tc.final_value);
        table.add_row({graph_spec_name(spec), CsvTable::cell(p),
                       CsvTable::cell(trc.kappa2), CsvTable::cell(trc.kappa_p),
                       CsvTable::cell(trc.u_threshold), CsvTable::cell(u0),
                       CsvTable::cell(t_bound), CsvTable::cell(tc.time),
                       CsvTable::cell(tc.time <= 1.05 * t_bound)});
    }
    ExperimentOutcome outcome;
    outcome.resolved = resolved;
    detail::emit(table, resolved, out, outcome);
    return outcome;
}

// Dispatch by the "experiment" field. Unknown names are a usage error.
inline ExperimentOutcome run_experiment(const Json& cfg) {
    const std::string name = cfg.value("experiment", "");
    if (name == "cp-table") return run_cp_table(cfg);
    if (name == "speedup-table") return run_speedup_table(cfg);
    if (name == "noise-floor-table") return run_noise_floor_table(cfg);
    if (name == "sgps-demo") return run_sgps_demo(cfg);
    if (name == "sensitivity-table") return run_sensitivity_table(cfg);
    if (name == "euler-stress") return run_euler_stress(cfg);
    if (name == "nonsyn") return run_nonsyn(cfg);
    if (name == "two-regime") return run_two_regime(cfg);
    throw std::invalid_argument("unknown experiment: \"" + name + "\"");
}

inline std::vector<std::string> reproduce_all(const std::string& outdir,
                                              std::uint64_t seed, int jobs) {
    const std::vector<std::pair<std::string, std::string>> plan = {
        {"cp-table", "cp_table.csv"},
        {"speedup-table", "speedup_table.csv"},
        {"noise-floor-table", "noise_floor_table.csv"},
        {"sgps-demo", "sgps_demo.json"},
        {"sensitivity-table", "sensitivity_table.csv"},
        {"euler-stress", "euler_stress.csv"},
        {"nonsyn", "nonsyn.csv"},
        {"two-regime", "two_regime.csv"}};
    std::vector<std::string> files;
    for (const auto& [name, fname] : plan) {
        Json cfg;
        cfg["experiment"] = name;
        cfg["out"] = outdir.empty() ? fname : outdir + "/" + fname;
        cfg["seed"] = seed;
        cfg["jobs"] = jobs;
        const ExperimentOutcome oc = run_experiment(cfg);
        files.insert(files.end(), oc.files.begin(), oc.files.end());
    }
    return files;
}

}  // namespace graphflow
