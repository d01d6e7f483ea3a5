#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphflow/graphflow.hpp"

using namespace graphflow;

namespace {

Json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    Json cfg = Json::parse(in);
    if (!cfg.is_object())
        throw std::invalid_argument("config root must be a JSON object");
    return cfg;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) out.push_back(part);
    return out;
}

// Compact graph specs: path:N, cycle:N, star:N, complete:N[:W], grid:RxC,
// er:N:PROB[:SEED], regular:N[:DEGREE[:SEED]], karate, file:PATH.
Json parse_graph_token(const std::string& token) {
    const auto parts = split_on(token, ':');
    if (parts.empty()) throw std::invalid_argument("empty graph spec");
    const std::string& family = parts[0];
    auto fail = [&]() -> double {
        throw std::invalid_argument("bad graph spec: " + token);
    };
    auto num = [&](std::size_t i) {
        double v = 0.0;
        std::size_t used = 0;
        try {
            v = std::stod(parts.at(i), &used);
        } catch (...) {
            return fail();
        }
        if (used != parts.at(i).size()) fail();
        return v;
    };
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() < lo + 1 || parts.size() > hi + 1) fail();
    };

    if (family == "karate") {
        arity(0, 0);
        return Json{{"family", "karate"}};
    }
    if (family == "path" || family == "cycle" || family == "star") {
        arity(1, 1);
        return Json{{"family", family}, {"n", int(num(1))}};
    }
    if (family == "complete") {
        arity(1, 2);
        Json j{{"family", "complete"}, {"n", int(num(1))}};
        if (parts.size() > 2) j["w"] = num(2);
        return j;
    }
    if (family == "grid") {
        arity(1, 1);
        const auto rc = split_on(parts[1], 'x');
        if (rc.size() != 2) fail();
        try {
            return Json{{"family", "grid"},
                        {"rows", std::stoi(rc[0])},
                        {"cols", std::stoi(rc[1])}};
        } catch (...) {
            fail();
        }
    }
    if (family == "er") {
        arity(2, 3);
        Json j{{"family", "er"}, {"n", int(num(1))}, {"prob", num(2)}};
        if (parts.size() > 3) j["seed"] = int(num(3));
        return j;
    }
    if (family == "regular") {
        arity(1, 3);
        Json j{{"family", "regular"}, {"n", int(num(1))}};
        if (parts.size() > 2) j["degree"] = int(num(2));
        if (parts.size() > 3) j["seed"] = int(num(3));
        return j;
    }
    if (family == "file") {
        if (parts.size() < 2) fail();
        std::string path = parts[1];
        for (std::size_t i = 2; i < parts.size(); ++i) path += ":" + parts[i];
        return Json{{"file", path}};
    }
    fail();
    return {};
}

// Scalar entries broadcast to every node; full arrays pass through.
Eigen::VectorXd expand_vector(const std::vector<double>& v, int n,
                              const char* what) {
    if (v.size() == 1) return Eigen::VectorXd::Constant(n, v[0]);
    if (int(v.size()) == n) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = v[i];
        return x;
    }
    throw std::invalid_argument(std::string(what) +
                                " needs 1 value or one per node");
}

Json json_vector(const Eigen::VectorXd& v) {
    return Json(std::vector<double>(v.begin(), v.end()));
}

std::vector<double> config_vector(const Json& v) {
    if (v.is_number()) return {double(v)};
    return v.get<std::vector<double>>();
}

void report_files(const std::vector<std::string>& files) {
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph diffusion toolkit: flows, p-gap estimates, calibration, "
                 "discrete and stochastic schemes"};
    app.require_subcommand(1);

    std::string config_path, out_path, graph_file;
    std::uint64_t seed = 0;
    int jobs = 0;
    auto* opt_config =
        app.add_option("--config", config_path,
                       "JSON config file; explicit flags override its keys")
            ->check(CLI::ExistingFile);
    auto* opt_out = app.add_option(
        "--out", out_path, "output path (directory for reproduce-all)");
    auto* opt_graph_file = app.add_option(
        "--graph-file", graph_file,
        "graph in text format: first line \"N m\", then m lines \"i j w\"");
    auto* opt_seed = app.add_option("--seed", seed, "master RNG seed");
    auto* opt_jobs = app.add_option(
        "--jobs", jobs, "worker threads (default: available parallelism)");

    const char* graph_help =
        "compact graph spec: path:N, cycle:N, star:N, complete:N[:W], "
        "grid:RxC, er:N:PROB[:SEED], regular:N[:D[:SEED]], karate, file:PATH";

    auto* sc_cp = app.add_subcommand(
        "estimate-cp", "variational C_p estimates against the closed-form "
                       "comparison value, as CSV");
    std::vector<std::string> cp_graphs;
    std::vector<double> cp_ps;
    int cp_restarts = 20, cp_maxiter = 5000;
    auto* o_cp_graphs = sc_cp->add_option("--graph", cp_graphs, graph_help);
    auto* o_cp_ps =
        sc_cp->add_option("--p", cp_ps, "exponents, each >= 2")->delimiter(',');
    auto* o_cp_restarts =
        sc_cp->add_option("--restarts", cp_restarts, "random restarts");
    auto* o_cp_maxiter =
        sc_cp->add_option("--max-iter", cp_maxiter, "iterations per restart");

    auto* sc_cal = app.add_subcommand(
        "calibrate", "rate and mass calibration on one graph, as JSON");
    std::string cal_graph;
    double cal_tau = 1.0, cal_h = 10.0;
    std::vector<double> cal_source, cal_hstar;
    auto* o_cal_graph = sc_cal->add_option("--graph", cal_graph, graph_help);
    auto* o_cal_tau =
        sc_cal->add_option("--tau-star", cal_tau, "target relaxation time");
    auto* o_cal_h =
        sc_cal->add_option("--h-target", cal_h, "target equilibrium mass");
    auto* o_cal_source =
        sc_cal->add_option("--source", cal_source,
                           "per-node source (scalar broadcasts)")
            ->delimiter(',');
    auto* o_cal_hstar =
        sc_cal->add_option("--h-star", cal_hstar,
                           "dissipation anchor (scalar broadcasts)")
            ->delimiter(',');

    auto* sc_sim = app.add_subcommand(
        "simulate", "integrate the flow and write a trajectory CSV");
    std::string sim_graph, sim_potential;
    double sim_alpha = 1.0, sim_alpha_p = 0.0, sim_p = 2.0, sim_mu = 1.0;
    double sim_sigma2 = 0.0, sim_tmax = 10.0, sim_sample_dt = 0.0;
    double sim_rel = 1e-8, sim_abs = 1e-10, sim_h0_perp = 0.0;
    std::vector<double> sim_source, sim_hstar, sim_h0;
    auto* o_sim_graph = sc_sim->add_option("--graph", sim_graph, graph_help);
    auto* o_sim_alpha = sc_sim->add_option("--alpha", sim_alpha, "Laplacian weight");
    auto* o_sim_alpha_p =
        sc_sim->add_option("--alpha-p", sim_alpha_p, "p-Laplacian weight");
    auto* o_sim_p = sc_sim->add_option("--p", sim_p, "p-Laplacian exponent");
    auto* o_sim_potential = sc_sim->add_option(
        "--potential", sim_potential, "dissipation kind: quadratic or logcosh");
    auto* o_sim_mu = sc_sim->add_option(
        "--mu", sim_mu, "dissipation strength (quadratic gamma or logcosh mu)");
    auto* o_sim_hstar =
        sc_sim->add_option("--h-star", sim_hstar,
                           "dissipation anchor (scalar broadcasts)")
            ->delimiter(',');
    auto* o_sim_source =
        sc_sim->add_option("--source", sim_source,
                           "per-node source (scalar broadcasts)")
            ->delimiter(',');
    auto* o_sim_sigma2 = sc_sim->add_option(
        "--sigma2", sim_sigma2, "source noise variance; 0 keeps it constant");
    auto* o_sim_tmax = sc_sim->add_option("--t-max", sim_tmax, "end time");
    auto* o_sim_sample =
        sc_sim->add_option("--sample-dt", sim_sample_dt,
                           "output spacing (default t_max/200)");
    auto* o_sim_rel = sc_sim->add_option("--rel-tol", sim_rel, "");
    auto* o_sim_abs = sc_sim->add_option("--abs-tol", sim_abs, "");
    auto* o_sim_h0 =
        sc_sim->add_option("--h0", sim_h0, "initial state (scalar broadcasts)")
            ->delimiter(',');
    auto* o_sim_h0_perp = sc_sim->add_option(
        "--h0-perp", sim_h0_perp,
        "overrides --h0 with a seeded mean-free start of this norm");

    auto* sc_euler = app.add_subcommand(
        "euler", "explicit Euler step-size sweep through the stability "
                 "threshold, as CSV");
    std::string eu_graph;
    double eu_alpha = 1.0, eu_gamma = 0.1;
    long eu_iters = 10000;
    std::vector<double> eu_fracs;
    auto* o_eu_graph = sc_euler->add_option("--graph", eu_graph, graph_help);
    auto* o_eu_alpha = sc_euler->add_option("--alpha", eu_alpha, "");
    auto* o_eu_gamma =
        sc_euler->add_option("--gamma", eu_gamma, "uniform dissipation");
    auto* o_eu_fracs =
        sc_euler->add_option("--eta-fraction", eu_fracs,
                             "step sizes as fractions of the threshold")
            ->delimiter(',');
    auto* o_eu_iters = sc_euler->add_option("--iterations", eu_iters, "");

    auto* sc_fb = app.add_subcommand(
        "fb", "forward-backward splitting on a log cosh model, as JSON");
    std::string fb_graph;
    double fb_alpha = 1.0, fb_mu = 0.1, fb_eta = 1.0;
    long fb_iters = 200;
    auto* o_fb_graph = sc_fb->add_option("--graph", fb_graph, graph_help);
    auto* o_fb_alpha = sc_fb->add_option("--alpha", fb_alpha, "");
    auto* o_fb_mu = sc_fb->add_option("--mu", fb_mu, "log cosh modulus");
    auto* o_fb_eta =
        sc_fb->add_option("--eta", fb_eta, "step size, must stay below 2/L");
    auto* o_fb_iters = sc_fb->add_option("--iterations", fb_iters, "");

    auto* sc_nf = app.add_subcommand(
        "noise-floor", "stochastic resolvent floors against the bound, as CSV");
    std::string nf_graph;
    std::vector<double> nf_etas;
    double nf_sigma2 = 0.01, nf_mu = 0.5, nf_alpha = 1.0, nf_tail = 0.5;
    long nf_iters = 200000;
    int nf_chains = 1;
    auto* o_nf_graph = sc_nf->add_option("--graph", nf_graph, graph_help);
    auto* o_nf_etas =
        sc_nf->add_option("--eta", nf_etas, "step sizes")->delimiter(',');
    auto* o_nf_iters = sc_nf->add_option("--iterations", nf_iters, "");
    auto* o_nf_chains = sc_nf->add_option(
        "--chains", nf_chains, "ensemble size; 1 uses a single long chain");
    auto* o_nf_sigma2 = sc_nf->add_option("--sigma2", nf_sigma2, "noise variance");
    auto* o_nf_mu = sc_nf->add_option("--mu", nf_mu, "dissipation modulus");
    auto* o_nf_alpha = sc_nf->add_option("--alpha", nf_alpha, "");
    auto* o_nf_tail =
        sc_nf->add_option("--tail-fraction", nf_tail, "averaging window");

    auto* sc_rm = app.add_subcommand(
        "rm", "Robbins-Monro vanishing-step run, error history as CSV");
    std::string rm_graph;
    double rm_alpha = 1.0, rm_mu = 0.5, rm_sigma2 = 0.01, rm_eta0 = 2.0;
    long rm_iters = 100000, rm_record = 0;
    auto* o_rm_graph = sc_rm->add_option("--graph", rm_graph, graph_help);
    auto* o_rm_alpha = sc_rm->add_option("--alpha", rm_alpha, "");
    auto* o_rm_mu = sc_rm->add_option("--mu", rm_mu, "dissipation modulus");
    auto* o_rm_sigma2 = sc_rm->add_option("--sigma2", rm_sigma2, "noise variance");
    auto* o_rm_eta0 =
        sc_rm->add_option("--eta0", rm_eta0, "step scale, eta_k = eta0/(k+1)");
    auto* o_rm_iters = sc_rm->add_option("--iterations", rm_iters, "");
    auto* o_rm_record = sc_rm->add_option(
        "--record-every", rm_record, "history stride (default iterations/1000)");

    auto* sc_nonsyn = app.add_subcommand(
        "nonsyn", "fixed-alpha rate failure along growing paths, as CSV");
    double ns_alpha = 1.0, ns_rho = 0.5;
    int ns_nmax = 12;
    std::vector<int> ns_expanders;
    auto* o_ns_alpha = sc_nonsyn->add_option("--alpha", ns_alpha, "");
    auto* o_ns_rho = sc_nonsyn->add_option("--rho-star", ns_rho, "rate target");
    auto* o_ns_nmax = sc_nonsyn->add_option("--n-max", ns_nmax, "largest path");
    auto* o_ns_exp =
        sc_nonsyn->add_option("--expander-sizes", ns_expanders,
                              "random 4-regular contrast rows")
            ->delimiter(',');

    auto* sc_two = app.add_subcommand(
        "two-regime", "transient-phase bound check for p > 2, as CSV");
    std::vector<std::string> tr_graphs;
    double tr_alpha = 0.1, tr_alpha_p = 2.0, tr_p = 3.0, tr_gamma = 0.01;
    double tr_perp0 = 5.0, tr_tmax = 50.0;
    auto* o_tr_graphs = sc_two->add_option("--graph", tr_graphs, graph_help);
    auto* o_tr_alpha = sc_two->add_option("--alpha", tr_alpha, "");
    auto* o_tr_alpha_p = sc_two->add_option("--alpha-p", tr_alpha_p, "");
    auto* o_tr_p = sc_two->add_option("--p", tr_p, "");
    auto* o_tr_gamma = sc_two->add_option("--gamma", tr_gamma, "");
    auto* o_tr_perp0 = sc_two->add_option("--perp0", tr_perp0, "initial norm");
    auto* o_tr_tmax = sc_two->add_option("--t-max", tr_tmax, "");

    auto* sc_all = app.add_subcommand(
        "reproduce-all", "run every experiment with default settings into a "
                         "directory (--out, default results/)");

    for (auto* sc : app.get_subcommands({})) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        Json base = Json::object();
        if (opt_config->count() > 0) base = load_config(config_path);

        auto put = [](Json& cfg, const char* key, const CLI::Option* opt,
                      const Json& value) {
            if (opt->count() > 0) cfg[key] = value;
        };
        auto make_cfg = [&](const char* experiment) {
            Json cfg = base;
            cfg["experiment"] = experiment;
            // config files may give graphs as compact tokens like the flags do
            if (cfg.contains("graph") && cfg["graph"].is_string())
                cfg["graph"] = parse_graph_token(cfg["graph"].get<std::string>());
            if (cfg.contains("graphs") && cfg["graphs"].is_array())
                for (auto& item : cfg["graphs"])
                    if (item.is_string())
                        item = parse_graph_token(item.get<std::string>());
            put(cfg, "out", opt_out, out_path);
            put(cfg, "seed", opt_seed, seed);
            if (opt_jobs->count() > 0)
                cfg["jobs"] = jobs;
            else if (!cfg.contains("jobs"))
                cfg["jobs"] = default_jobs();
            return cfg;
        };
        auto single_graph = [&](Json& cfg, const CLI::Option* opt,
                                const std::string& token) {
            if (opt->count() > 0)
                cfg["graph"] = parse_graph_token(token);
            else if (opt_graph_file->count() > 0)
                cfg["graph"] = Json{{"file", graph_file}};
        };
        auto graph_list = [&](Json& cfg, const CLI::Option* opt,
                              const std::vector<std::string>& tokens) {
            if (opt->count() > 0) {
                Json arr = Json::array();
                for (const auto& tok : tokens) arr.push_back(parse_graph_token(tok));
                cfg["graphs"] = arr;
            }
            if (opt_graph_file->count() > 0) {
                if (!cfg.contains("graphs")) cfg["graphs"] = Json::array();
                cfg["graphs"].push_back(Json{{"file", graph_file}});
            }
        };
        const std::uint64_t eff_seed =
            opt_seed->count() > 0 ? seed : base.value("seed", std::uint64_t{0});

        if (sc_cp->parsed()) {
            Json cfg = make_cfg("cp-table");
            graph_list(cfg, o_cp_graphs, cp_graphs);
            put(cfg, "p_values", o_cp_ps, cp_ps);
            put(cfg, "restarts", o_cp_restarts, cp_restarts);
            put(cfg, "max_iter", o_cp_maxiter, cp_maxiter);
            report_files(run_experiment(cfg).files);
        } else if (sc_cal->parsed()) {
            Json cfg = make_cfg("sgps-demo");
            single_graph(cfg, o_cal_graph, cal_graph);
            put(cfg, "tau_star", o_cal_tau, cal_tau);
            put(cfg, "h_target", o_cal_h, cal_h);
            const Json gspec =
                cfg.value("graph", Json{{"family", "path"}, {"n", 3}});
            const int n = graph_from_spec(gspec).node_count();
            if (o_cal_source->count() > 0)
                cfg["s_inf"] = json_vector(expand_vector(cal_source, n, "--source"));
            if (o_cal_hstar->count() > 0)
                cfg["h_star"] = json_vector(expand_vector(cal_hstar, n, "--h-star"));
            const ExperimentOutcome oc = run_experiment(cfg);
            std::cout << slurp(oc.files.at(0));
            report_files(oc.files);
        } else if (sc_sim->parsed()) {
            Json cfg = make_cfg("simulate");
            single_graph(cfg, o_sim_graph, sim_graph);
            put(cfg, "alpha", o_sim_alpha, sim_alpha);
            put(cfg, "alpha_p", o_sim_alpha_p, sim_alpha_p);
            put(cfg, "p", o_sim_p, sim_p);
            put(cfg, "sigma2", o_sim_sigma2, sim_sigma2);
            put(cfg, "t_max", o_sim_tmax, sim_tmax);
            put(cfg, "sample_dt", o_sim_sample, sim_sample_dt);
            put(cfg, "rel_tol", o_sim_rel, sim_rel);
            put(cfg, "abs_tol", o_sim_abs, sim_abs);
            put(cfg, "h0_perp", o_sim_h0_perp, sim_h0_perp);

            const Json gspec =
                cfg.value("graph", Json{{"family", "path"}, {"n", 10}});
            const Graph g = graph_from_spec(gspec);
            const int n = g.node_count();

            Json pot_spec = cfg.value("potential", Json::object());
            put(pot_spec, "kind", o_sim_potential, sim_potential);
            const std::string kind = pot_spec.value("kind", "quadratic");
            put(pot_spec, kind == "logcosh" ? "mu" : "gamma", o_sim_mu, sim_mu);
            if (o_sim_hstar->count() > 0)
                pot_spec["h_star"] =
                    json_vector(expand_vector(sim_hstar, n, "--h-star"));
            cfg["potential"] = pot_spec;

            ModelParams mp{cfg.value("alpha", 1.0), cfg.value("alpha_p", 0.0),
                           cfg.value("p", 2.0), potential_from_spec(pot_spec, n)};

            Eigen::VectorXd s_vec = Eigen::VectorXd::Constant(n, 1.0 / n);
            if (o_sim_source->count() > 0)
                s_vec = expand_vector(sim_source, n, "--source");
            else if (cfg.contains("source"))
                s_vec = expand_vector(config_vector(cfg["source"]), n, "source");
            cfg["source"] = json_vector(s_vec);

            const double sigma2 = cfg.value("sigma2", 0.0);
            const SourceSignal src =
                sigma2 > 0.0 ? SourceSignal::stochastic(s_vec, sigma2, eff_seed)
                             : SourceSignal::constant(s_vec);

            Eigen::VectorXd h0 = Eigen::VectorXd::Zero(n);
            if (o_sim_h0->count() > 0) h0 = expand_vector(sim_h0, n, "--h0");
            else if (cfg.contains("h0"))
                h0 = expand_vector(config_vector(cfg["h0"]), n, "h0");
            const double perp0 = cfg.value("h0_perp", 0.0);
            if (perp0 > 0.0) {
                Rng rng(derive_seed(eff_seed, 1));
                h0 = rng.normal_vector(n);
                h0.array() -= h0.mean();
                h0 *= perp0 / h0.norm();
            }
            cfg["h0"] = json_vector(h0);

            const double t_max = cfg.value("t_max", 10.0);
            IntegrateOptions opts;
            opts.rel_tol = cfg.value("rel_tol", 1e-8);
            opts.abs_tol = cfg.value("abs_tol", 1e-10);
            opts.sample_dt = cfg.value("sample_dt", 0.0);
            if (opts.sample_dt <= 0.0) opts.sample_dt = t_max / 200.0;
            cfg["sample_dt"] = opts.sample_dt;

            const Trajectory traj = integrate(mp, g, src, h0, t_max, opts);

            const std::string out = cfg.value("out", std::string("trajectory.csv"));
            cfg["out"] = out;
            CsvTable table({"t", "mass", "energy", "err", "perp_err"});
            for (std::size_t i = 0; i < traj.t.size(); ++i)
                table.add_row({CsvTable::cell(traj.t[i]),
                               CsvTable::cell(traj.mass[i]),
                               CsvTable::cell(traj.energy[i]),
                               traj.has_reference ? CsvTable::cell(traj.err[i])
                                                  : std::string("nan"),
                               CsvTable::cell(traj.perp_err[i])});
            cfg["steps_accepted"] = traj.steps_accepted;
            cfg["steps_rejected"] = traj.steps_rejected;
            cfg["has_reference"] = traj.has_reference;
            ExperimentOutcome oc;
            detail::emit(table, cfg, out, oc);
            std::cout << "final t=" << CsvTable::cell(traj.t.back())
                      << " mass=" << CsvTable::cell(traj.mass.back())
                      << " energy=" << CsvTable::cell(traj.energy.back())
                      << " accepted=" << traj.steps_accepted
                      << " rejected=" << traj.steps_rejected << "\n";
            report_files(oc.files);
        } else if (sc_euler->parsed()) {
            Json cfg = make_cfg("euler-stress");
            single_graph(cfg, o_eu_graph, eu_graph);
            put(cfg, "alpha", o_eu_alpha, eu_alpha);
            put(cfg, "gamma", o_eu_gamma, eu_gamma);
            put(cfg, "eta_fractions", o_eu_fracs, eu_fracs);
            put(cfg, "iterations", o_eu_iters, eu_iters);
            report_files(run_experiment(cfg).files);
        } else if (sc_fb->parsed()) {
            Json cfg = make_cfg("fb");
            single_graph(cfg, o_fb_graph, fb_graph);
            put(cfg, "alpha", o_fb_alpha, fb_alpha);
            put(cfg, "mu", o_fb_mu, fb_mu);
            put(cfg, "eta", o_fb_eta, fb_eta);
            put(cfg, "iterations", o_fb_iters, fb_iters);

            const Json gspec =
                cfg.value("graph", Json{{"family", "path"}, {"n", 3}});
            const Graph g = graph_from_spec(gspec);
            const int n = g.node_count();
            const double mu = cfg.value("mu", 0.1);
            const double eta = cfg.value("eta", 1.0);
            ModelParams mp{cfg.value("alpha", 1.0), 0.0, 2.0,
                           logcosh_potential(mu, Eigen::VectorXd::Zero(n))};
            const Eigen::VectorXd s_inf = Eigen::VectorXd::Constant(n, 1.0 / n);
            const SchemeReport rep =
                run_forward_backward(mp, g, s_inf, eta, Eigen::VectorXd::Zero(n),
                                     cfg.value("iterations", long(200)));

            Json j;
            j["eta"] = eta;
            j["mu"] = mu;
            j["lipschitz"] = mu + 1.0;
            j["q_bound"] = fb_contraction_factor(eta, mu, mu + 1.0);
            j["measured_factor"] = rep.measured_factor;
            j["final_err"] = rep.final_err;
            j["converged"] = rep.converged;
            j["iterations"] = rep.iterations;
            const std::string out = cfg.value("out", std::string("fb.json"));
            cfg["out"] = out;
            write_json_file(j, out);
            Json side = cfg;
            side["generated"] = detail::utc_timestamp();
            write_json_file(side, sidecar_path(out));
            std::cout << j.dump(2) << "\n";
            report_files({out, sidecar_path(out)});
        } else if (sc_nf->parsed()) {
            Json cfg = make_cfg("noise-floor-table");
            single_graph(cfg, o_nf_graph, nf_graph);
            put(cfg, "eta_values", o_nf_etas, nf_etas);
            put(cfg, "iterations", o_nf_iters, nf_iters);
            put(cfg, "chains", o_nf_chains, nf_chains);
            put(cfg, "sigma2", o_nf_sigma2, nf_sigma2);
            put(cfg, "mu", o_nf_mu, nf_mu);
            put(cfg, "alpha", o_nf_alpha, nf_alpha);
            put(cfg, "tail_fraction", o_nf_tail, nf_tail);
            report_files(run_experiment(cfg).files);
        } else if (sc_rm->parsed()) {
            Json cfg = make_cfg("rm");
            single_graph(cfg, o_rm_graph, rm_graph);
            put(cfg, "alpha", o_rm_alpha, rm_alpha);
            put(cfg, "mu", o_rm_mu, rm_mu);
            put(cfg, "sigma2", o_rm_sigma2, rm_sigma2);
            put(cfg, "eta0", o_rm_eta0, rm_eta0);
            put(cfg, "iterations", o_rm_iters, rm_iters);
            put(cfg, "record_every", o_rm_record, rm_record);

            const Json gspec =
                cfg.value("graph", Json{{"family", "star"}, {"n", 50}});
            const Graph g = graph_from_spec(gspec);
            const int n = g.node_count();
            const double mu = cfg.value("mu", 0.5);
            const double sigma2 = cfg.value("sigma2", 0.01);
            const long iters = cfg.value("iterations", long(100000));
            long record = cfg.value("record_every", long(0));
            if (record <= 0) record = std::max<long>(1, iters / 1000);
            cfg["record_every"] = record;

            ModelParams mp{cfg.value("alpha", 1.0), 0.0, 2.0,
                           quadratic_potential(mu, 0.0, n)};
            const Eigen::VectorXd s_inf = Eigen::VectorXd::Constant(n, 1.0 / n);
            const Eigen::VectorXd h0 = solve_equilibrium(mp, g, s_inf);
            const StochasticReport rep =
                run_robbins_monro(mp, g, s_inf, sigma2, cfg.value("eta0", 2.0),
                                  h0, iters, eff_seed, record);

            const std::string out = cfg.value("out", std::string("rm.csv"));
            cfg["out"] = out;
            CsvTable table({"k", "err_sq"});
            for (std::size_t i = 0; i < rep.err_sq_history.size(); ++i)
                table.add_row({CsvTable::cell(long(i) * rep.record_every),
                               CsvTable::cell(rep.err_sq_history[i])});
            cfg["final_err_sq"] = rep.final_err_sq;
            cfg["converged"] = rep.converged;
            cfg["fixed_step_floor_scale"] = sigma2 / (2.0 * mu);
            ExperimentOutcome oc;
            detail::emit(table, cfg, out, oc);
            std::cout << "final err_sq=" << CsvTable::cell(rep.final_err_sq)
                      << " converged=" << (rep.converged ? "true" : "false")
                      << "\n";
            report_files(oc.files);
        } else if (sc_nonsyn->parsed()) {
            Json cfg = make_cfg("nonsyn");
            put(cfg, "alpha", o_ns_alpha, ns_alpha);
            put(cfg, "rho_star", o_ns_rho, ns_rho);
            put(cfg, "n_max", o_ns_nmax, ns_nmax);
            put(cfg, "expander_sizes", o_ns_exp, ns_expanders);
            const ExperimentOutcome oc = run_experiment(cfg);
            const int first = oc.resolved.value("first_violation_n", -1);
            if (first > 0)
                std::cout << "first path violation at n=" << first << "\n";
            else
                std::cout << "no path violation up to n_max\n";
            report_files(oc.files);
        } else if (sc_two->parsed()) {
            Json cfg = make_cfg("two-regime");
            graph_list(cfg, o_tr_graphs, tr_graphs);
            put(cfg, "alpha", o_tr_alpha, tr_alpha);
            put(cfg, "alpha_p", o_tr_alpha_p, tr_alpha_p);
            put(cfg, "p", o_tr_p, tr_p);
            put(cfg, "gamma", o_tr_gamma, tr_gamma);
            put(cfg, "perp0", o_tr_perp0, tr_perp0);
            put(cfg, "t_max", o_tr_tmax, tr_tmax);
            report_files(run_experiment(cfg).files);
        } else if (sc_all->parsed()) {
            const std::string dir =
                opt_out->count() > 0 ? out_path
                                     : base.value("out", std::string("results"));
            std::filesystem::create_directories(dir);
            const int eff_jobs =
                opt_jobs->count() > 0 ? jobs : base.value("jobs", default_jobs());
            report_files(reproduce_all(dir, eff_seed, eff_jobs));
        }
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
