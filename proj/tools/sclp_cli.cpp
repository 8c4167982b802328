#include "sclp/bench.hpp"
#include "sclp/io.hpp"
#include "sclp/model.hpp"
#include "sclp/oracle.hpp"
#include "sclp/rc.hpp"
#include "sclp/robust.hpp"
#include "sclp/sclp.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

using namespace sclp;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kSolver = 1, kInput = 2, kDegenerate = 3, kRobustInfeasible = 4 };

const char* kSchema = R"(File formats (JSON; ids are 1-based integers or strings):
  problem:   servers  [{id, budget}]                budget: Gamma_i, 0..#flows on the server
             buffers  [{id, alpha, input_rate, holding_cost}]
             flows    [{id, server, buffer, mu_bar, mu_tilde, routing: [{to, p}]}]
                      buffer is the buffer the flow drains; routing sends share p to buffer `to`
             horizon  T > 0
  solution:  horizon, robust, objective, dual_objective, breakpoints, tau, trace (theta values),
             boundary {x0, qN, K0, JN1}, x and q per breakpoint,
             intervals [{basic, K_in, J_in, u, x_dot, p, q_dot, c_eff}]
             robust solutions add cuts (per interval and buffer: realizations Xi) and
             rc_certificates {beta, gamma, beta0, gamma0, p_prime, delta, delta0}
  bench config: iota, m, theta, kappa (lists), reps, seed, threads
  generate config: {"kind": "grid", iota, m, theta, kappa}
                or {"kind": "small", I, K, extra_flows, routing_prob, uncertain_prob,
                    fractional_budgets, horizon}
  manifest:  <output>.manifest.json with command, inputs, overrides, seed, outputs,
             version, tolerances, exit_code, message
Exit codes: 0 ok, 1 solver failure, 2 input error, 3 degeneracy, 4 robust-infeasible.)";

struct Run {
    io::RunManifest manifest;
    std::string out;
};

// Runs `body`, maps exceptions to exit codes and always writes the manifest.
int guarded(Run& run, const std::function<void()>& body) {
    int code = kOk;
    try {
        body();
    } catch (const DegeneracyError& e) {
        code = kDegenerate;
        std::string tied;
        for (const auto& t : e.tied_set()) tied += (tied.empty() ? "" : ", ") + t;
        run.manifest.message = std::string(e.what()) + " (theta " + std::to_string(e.theta()) + "; tied: " + tied + ")";
        run.manifest.overrides["tied_set"] = e.tied_set();
        std::cerr << "degeneracy: " << run.manifest.message << "\n";
    } catch (const RobustInfeasibleError& e) {
        code = kRobustInfeasible;
        run.manifest.message = e.what();
        std::cerr << "robust-infeasible: " << e.what() << "\n";
    } catch (const InputError& e) {
        code = kInput;
        run.manifest.message = e.what();
        std::cerr << "input error: " << e.what() << "\n";
    } catch (const SolverError& e) {
        code = kSolver;
        run.manifest.message = e.what();
        std::cerr << "solver failure: " << e.what() << "\n";
    } catch (const std::exception& e) {
        code = kSolver;
        run.manifest.message = e.what();
        std::cerr << "error: " << e.what() << "\n";
    }
    run.manifest.exit_code = code;
    if (!run.out.empty()) {
        try {
            io::write_manifest(run.manifest, run.out);
        } catch (const std::exception& e) {
            std::cerr << "cannot write manifest: " << e.what() << "\n";
            if (code == kOk) code = kInput;
        }
    }
    return code;
}

FluidNetwork load_checked(const std::string& path) {
    FluidNetwork net = load_network(path);
    auto diag = validate(net);
    if (!diag.empty()) {
        std::string msg = path + ": invalid network";
        for (const auto& d : diag) msg += "\n  " + d;
        throw InputError(msg);
    }
    return net;
}

void print_report(const OptimalityReport& r) {
    for (const auto& c : r.checks)
        std::printf("%-60s %s  (%.3e)\n", c.name.c_str(), c.passed ? "pass" : "FAIL", c.margin);
}

json report_to_json(const OptimalityReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}});
    return {{"passed", r.passed()}, {"checks", checks}};
}

json index_list_1based(const IndexList& v) {
    json a = json::array();
    for (int x : v) a.push_back(x + 1);
    return a;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Separated continuous LP solver for fluid processing networks"};
    app.footer(kSchema);
    app.require_subcommand(1);

    Run run;
    int code = kOk;
    std::string problem, solution, config;
    std::optional<double> horizon;
    bool no_reduction = false, no_obj_unc = false, full_rc = false, robust_flag = false;
    int steps = 10000, samples = 10000;
    std::uint64_t seed = 0;
    std::optional<int> reps, threads;

    auto add_out = [&](CLI::App* c) { c->add_option("--out,-o", run.out, "Output file")->required(); };
    auto add_robust_flags = [&](CLI::App* c) {
        c->add_flag("--no-reduction", no_reduction, "Keep every uncertain entry (skip the reduction)");
        c->add_flag("--no-objective-uncertainty", no_obj_unc, "Ignore rate deviations in the objective");
    };
    auto robust_options = [&] {
        robust::RobustOptions o;
        o.use_reduction = !no_reduction;
        o.objective_uncertainty = !no_obj_unc;
        run.manifest.overrides["use_reduction"] = o.use_reduction;
        run.manifest.overrides["objective_uncertainty"] = o.objective_uncertainty;
        return o;
    };
    auto begin = [&](const std::string& cmd, std::vector<std::string> inputs) {
        run.manifest.command = cmd;
        run.manifest.inputs = std::move(inputs);
        run.manifest.seed = seed;
        run.manifest.outputs = {run.out};
    };
    auto T_of = [&](const FluidNetwork& net) {
        double T = horizon.value_or(net.horizon);
        if (horizon) run.manifest.overrides["horizon"] = T;
        if (!(T > 0)) throw InputError("horizon must be positive");
        return T;
    };

    auto* solve = app.add_subcommand("solve", "Nominal SCLP simplex");
    solve->add_option("problem", problem, "Problem file")->required();
    solve->add_option("--horizon", horizon, "Override the horizon T");
    add_out(solve);
    solve->callback([&] {
        begin("solve", {problem});
        code = guarded(run, [&] {
            auto net = load_checked(problem);
            auto s = sclp_simplex(build_matrices(net), T_of(net));
            io::write_json(io::solution_file(s), run.out);
            std::printf("objective %.17g\nintervals %zu\n", s.objective, s.bases.size());
        });
    });

    auto* srob = app.add_subcommand("solve-robust", "Robust SCLP simplex with cutting planes");
    srob->add_option("problem", problem, "Problem file")->required();
    srob->add_option("--horizon", horizon, "Override the horizon T");
    add_robust_flags(srob);
    add_out(srob);
    srob->callback([&] {
        begin("solve-robust", {problem});
        code = guarded(run, [&] {
            auto net = load_checked(problem);
            auto d = build_matrices(net);
            auto s = robust::robust_sclp_simplex(d, T_of(net), robust_options());
            io::write_json(io::solution_file(s), run.out);
            std::printf("objective %.17g\nintervals %zu\n", s.objective, s.bases.size());
        });
    });

    auto* red = app.add_subcommand("reduce", "Uncertainty-set reduction report");
    red->add_option("problem", problem, "Problem file")->required();
    red->add_flag("--no-objective-uncertainty", no_obj_unc, "Ignore rate deviations in the objective");
    add_out(red);
    red->callback([&] {
        begin("reduce", {problem});
        code = guarded(run, [&] {
            auto net = load_checked(problem);
            auto d = build_matrices(net);
            const bool obj = !no_obj_unc;
            auto r = robust::reduce(net, d, obj);
            json residual = json::array();
            for (const auto& Rk : r.R) residual.push_back(index_list_1based(Rk));
            json j{{"residual_flows", residual},
                   {"residual_objective_flows", index_list_1based(r.R0)},
                   {"G_star", mat_to_json(r.G_star)},
                   {"c_star", vec_to_json(r.c_star)},
                   {"counts", mat_to_json(r.counts)},
                   {"dimensions", rc::dimension_report(d, obj).to_json()}};
            io::write_json(j, run.out);
            std::printf("relative reduction %.17g%%\n", rc::dimension_report(d, obj).relative_reduction());
        });
    });

    auto* ver = app.add_subcommand("verify", "Optimality checks of a solution file");
    ver->add_option("problem", problem, "Problem file")->required();
    ver->add_option("solution", solution, "Solution file")->required();
    add_robust_flags(ver);
    add_out(ver);
    ver->callback([&] {
        begin("verify", {problem, solution});
        code = guarded(run, [&] {
            auto net = load_checked(problem);
            auto d = build_matrices(net);
            auto s = solution_from_json(io::read_json(solution));
            OptimalityReport rep;
            if (s.robust) {
                rep = robust::verify_robust(d, s, robust_options(), false);
            } else {
                auto p = d.nominal();
                p.T = s.T;
                rep = verify_optimality(p, s);
            }
            print_report(rep);
            io::write_json(report_to_json(rep), run.out);
            if (!rep.passed()) throw SolverError("verification failed");
        });
    });

    auto* orc = app.add_subcommand("oracle", "Time-discretized LP optimum");
    orc->add_option("problem", problem, "Problem file")->required();
    orc->add_option("--horizon", horizon, "Override the horizon T");
    orc->add_option("--steps", steps, "Number of time steps")->check(CLI::PositiveNumber);
    orc->add_flag("--robust", robust_flag, "Discretize the robust counterpart");
    orc->add_flag("--full", full_rc, "Robust counterpart without the reduction");
    orc->add_flag("--no-objective-uncertainty", no_obj_unc, "Ignore rate deviations in the objective");
    add_out(orc);
    orc->callback([&] {
        begin("oracle", {problem});
        run.manifest.overrides["steps"] = steps;
        code = guarded(run, [&] {
            auto net = load_checked(problem);
            auto d = build_matrices(net);
            SclpProblem p;
            if (robust_flag) {
                run.manifest.overrides["robust"] = true;
                run.manifest.overrides["full"] = full_rc;
                auto r = robust::reduce(d, !no_obj_unc);
                p = rc::build_sclp_rc(d, full_rc ? nullptr : &r, !no_obj_unc).problem;
            } else {
                p = d.nominal();
            }
            p.T = T_of(net);
            auto res = oracle::ipm_solve(oracle::discretize(p, steps));
            json j{{"objective", res.objective},       {"steps", steps},
                   {"converged", res.converged},       {"iterations", res.iterations},
                   {"primal_residual", res.primal_residual}, {"dual_residual", res.dual_residual},
                   {"complementarity", res.complementarity}};
            io::write_json(j, run.out);
            std::printf("objective %.17g\n", res.objective);
            double worst = std::max({res.primal_residual, res.dual_residual, res.complementarity});
            if (!res.converged && worst > 1e-7) throw SolverError("interior point did not converge");
        });
    });

    auto* aud = app.add_subcommand("audit", "Monte-Carlo robust feasibility audit");
    aud->add_option("problem", problem, "Problem file")->required();
    aud->add_option("solution", solution, "Solution file")->required();
    aud->add_option("--samples", samples, "Number of sampled realizations")->check(CLI::PositiveNumber);
    aud->add_option("--seed", seed, "Random seed");
    add_out(aud);
    aud->callback([&] {
        begin("audit", {problem, solution});
        run.manifest.overrides["samples"] = samples;
        code = guarded(run, [&] {
            auto net = load_checked(problem);
            auto s = solution_from_json(io::read_json(solution));
            auto rep = oracle::audit_feasibility(build_matrices(net), s, samples, seed);
            io::write_json(rep.to_json(), run.out);
            std::printf("max violation %.17g\n", rep.max_violation());
        });
    });

    auto* bench = app.add_subcommand("bench-reduction", "Relative reduction over the experiment grid (CSV)");
    bench->add_option("config", config, "Experiment config file (defaults when omitted)");
    bench->add_option("--reps", reps, "Override reps");
    bench->add_option("--seed", seed, "Override seed");
    bench->add_option("--threads", threads, "Worker threads (0: all cores)");
    add_out(bench);
    bench->callback([&] {
        begin("bench-reduction", config.empty() ? std::vector<std::string>{} : std::vector<std::string>{config});
        code = guarded(run, [&] {
            bench::ExperimentConfig c = config.empty() ? bench::ExperimentConfig{} : bench::config_from_json(io::read_json(config));
            if (reps) c.reps = *reps;
            if (bench->count("--seed")) c.seed = seed;
            if (threads) c.threads = *threads;
            run.manifest.seed = c.seed;
            run.manifest.overrides["config"] = bench::config_to_json(c);
            auto rows = bench::reduction_experiment(c);
            bench::write_csv(rows, run.out);
            std::printf("%zu grid points\n", rows.size());
        });
    });

    auto* gen = app.add_subcommand("generate", "Random problem file");
    gen->add_option("config", config, "Generator config file")->required();
    gen->add_option("--seed", seed, "Random seed");
    add_out(gen);
    gen->callback([&] {
        begin("generate", {config});
        code = guarded(run, [&] {
            json j = io::read_json(config);
            FluidNetwork net;
            try {
                std::string kind = j.value("kind", std::string("small"));
                if (kind == "grid") {
                    bench::GridPoint pt;
                    pt.iota = j.value("iota", pt.iota);
                    pt.m = j.value("m", pt.m);
                    pt.theta = j.value("theta", pt.theta);
                    pt.kappa = j.value("kappa", pt.kappa);
                    if (pt.iota < 1 || pt.m < 1 || !(pt.theta > 0 && pt.theta <= 1) || !(pt.kappa >= 0 && pt.kappa <= 1))
                        throw InputError("generate: grid point out of range");
                    net = bench::generate_random(pt, seed);
                } else if (kind == "small") {
                    bench::SmallNetworkOptions o;
                    o.I = j.value("I", o.I);
                    o.K = j.value("K", o.K);
                    o.extra_flows = j.value("extra_flows", o.extra_flows);
                    o.routing_prob = j.value("routing_prob", o.routing_prob);
                    o.uncertain_prob = j.value("uncertain_prob", o.uncertain_prob);
                    o.fractional_budgets = j.value("fractional_budgets", o.fractional_budgets);
                    o.horizon = j.value("horizon", o.horizon);
                    net = bench::random_network(o, seed);
                } else {
                    throw InputError("generate: unknown kind '" + kind + "'");
                }
            } catch (const json::exception& e) {
                throw InputError(std::string("generate config: ") + e.what());
            }
            save_network(net, run.out);
            std::printf("servers %d buffers %d flows %d\n", net.I(), net.K(), net.J());
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }
    return code;
}
