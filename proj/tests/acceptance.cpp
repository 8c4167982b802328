// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [--only N[,N...]] [--known-unattainable N[,N...]]
// Exit code is 0 when every criterion passes, except those listed as known
// unattainable (their line still reads FAIL).

#include "instances.hpp"
#include "sclp/bench.hpp"
#include "sclp/oracle.hpp"
#include "sclp/rc.hpp"
#include "sclp/robust.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace sclp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

FluidNetwork drain() {
    FluidNetwork net;
    net.num_servers = 1;
    net.budgets = {0};
    net.buffers = {{1.0, 0.0, 1.0}};
    Flow f;
    f.mu_bar = 2.0;
    net.flows = {f};
    net.horizon = 1.0;
    return net;
}

// 1. nominal sweep vs the 10,000-step discretization
Outcome nominal_oracle() {
    int found = 0, skipped = 0, verified = 0;
    double worst = 0;
    for (std::uint64_t seed = 0; found < 20 && seed < 500; ++seed) {
        auto d = build_matrices(testing::small_network(seed, 0.0));
        SclpSolution s;
        try {
            s = sclp_simplex(d, d.T);
        } catch (const DegeneracyError&) {
            ++skipped;
            continue;
        }
        if (s.bases.size() < 3) {  // at least two interior breakpoints
            ++skipped;
            continue;
        }
        ++found;
        if (verify_optimality(d.nominal(), s).passed()) ++verified;
        const double v = oracle::discretized_optimum(d.nominal(), 10000);
        worst = std::max(worst, std::abs(s.objective - v) / std::max(1e-12, std::abs(v)));
    }
    return {found == 20 && verified == 20 && worst <= 1e-3,
            fmt("%d instances (%d seeds skipped as degenerate or short), max rel err %.2e (tol 1e-3), "
                "verified %d/20",
                found, skipped, worst, verified)};
}

// 2. closed-form drain
Outcome drain_closed_form() {
    auto d = build_matrices(drain());
    auto s = sclp_simplex(d, 1.0);
    const double eo = std::abs(s.objective - 0.75);
    const double eb = s.breakpoints.size() == 3 ? std::abs(s.breakpoints[1] - 0.5) : 1.0;
    return {eo <= 1e-10 && eb <= 1e-10, fmt("objective %.17g, breakpoint err %.1e (tol 1e-10)", s.objective, eb)};
}

double inner_lp(const Vec& w, const std::vector<double>& budgets, const IndexList& server) {
    const int J = static_cast<int>(w.size()), I = static_cast<int>(budgets.size());
    lp::Instance lp;
    lp.A = Mat::Zero(I + J, 2 * J + I);
    lp.rhs = Vec(I + J);
    lp.objective = Vec::Zero(2 * J + I);
    for (int j = 0; j < J; ++j) {
        lp.A(server[j], j) = 1.0;
        lp.A(I + j, j) = 1.0;
        lp.A(I + j, J + I + j) = 1.0;
        lp.rhs(I + j) = 1.0;
        lp.objective(j) = w(j);
    }
    for (int i = 0; i < I; ++i) {
        lp.A(i, J + i) = 1.0;
        lp.rhs(i) = budgets[i];
    }
    lp.signs.assign(2 * J + I, lp::Sign::Nonneg);
    auto r = lp::solve(lp);
    if (r.status != lp::Status::Optimal) throw SolverError("inner LP not optimal");
    return r.objective;
}

// 3. worst-case formula vs LP and enumeration
Outcome worst_case_formula() {
    std::mt19937_64 rng(20240603);
    std::uniform_real_distribution<double> U(0, 1);
    double e_lp = 0, e_en = 0;
    for (int t = 0; t < 500; ++t) {
        const int I = 1 + static_cast<int>(rng() % 3);
        IndexList server;
        std::vector<double> budgets;
        for (int i = 0; i < I; ++i) {
            const int n = 1 + static_cast<int>(rng() % 12);
            for (int s = 0; s < n; ++s) server.push_back(i);
            budgets.push_back(U(rng) < 0.5 ? std::floor(U(rng) * (n + 1)) : U(rng) * n);
        }
        const int J = static_cast<int>(server.size());
        Vec row(J), eta(J);
        for (int j = 0; j < J; ++j) {
            const double r = U(rng);
            row(j) = r < 0.2 ? -U(rng) : (r < 0.3 ? 0.0 : U(rng));
            eta(j) = U(rng) < 0.15 ? 0.0 : U(rng);
        }
        Vec xi = robust::worst_case_xi(row, eta, budgets, server);
        const double v = row.cwiseProduct(eta).dot(xi);
        e_lp = std::max(e_lp, std::abs(v - inner_lp(row.cwiseProduct(eta).cwiseMax(0.0), budgets, server)));
        e_en = std::max(e_en, std::abs(v - oracle::enumerate_inner_max(row, eta, budgets, server)));
    }
    return {e_lp <= 1e-10 && e_en <= 1e-10,
            fmt("500 tuples, max |formula - LP| %.1e, max |formula - enumeration| %.1e (tol 1e-10)", e_lp, e_en)};
}

// 4. cutting planes vs the explicit counterpart and the mapped dual
Outcome rates_equivalence() {
    std::mt19937_64 rng(77);
    int n = 0;
    double e_obj = 0, e_res = 0, e_dobj = 0;
    for (std::uint64_t seed = 0; n < 100; ++seed) {
        bench::SmallNetworkOptions o;
        o.I = 1 + static_cast<int>(seed % 3);
        o.K = std::max(o.I, 2 + static_cast<int>(seed % 5));
        o.extra_flows = static_cast<int>(seed % 4);
        o.uncertain_prob = 0.8;
        o.fractional_budgets = seed % 2 == 0;
        auto d = build_matrices(bench::random_network(o, 1000 + seed));
        if (d.K() > 6 || d.J() > 10) continue;
        IndexList Ks, Js;
        for (int k = 0; k < d.K(); ++k)
            if (rng() % 2) Ks.push_back(k);
        for (int j = 0; j < d.J(); ++j)
            if (rng() % 5 == 0) Js.push_back(j);
        const int K = d.K(), J = d.J(), I = d.I();
        robust::CutPool pool(K, J);
        auto cp = robust::cutting_planes_rates(robust::RobustModel::raw(d), Ks, Js, pool);
        auto rc = rc::build_rates_rc(d, Ks, Js);
        auto P = lp::solve(rc.primal);
        if (P.status != lp::Status::Optimal) throw SolverError("counterpart LP not optimal");
        const double scale = std::max(1.0, std::abs(P.objective));
        e_obj = std::max(e_obj, std::abs(cp.objective - P.objective) / scale);

        // mapped dual in the column order of the dual LP
        const lp::Instance& D = rc.dual;
        Vec v(D.cols());
        int c = 0;
        v.segment(c, K) = cp.p_prime;
        c += K;
        v.segment(c, I) = cp.q_cap;
        c += I;
        v.segment(c, J) = cp.qdot.head(J);
        c += J;
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < J; ++j) v(c++) = cp.delta(k, j);
        v.segment(c, J) = cp.delta0;
        c += J;
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < J; ++j) v(c++) = cp.y(k, j);
        v.segment(c, J) = cp.y0;
        c += J;
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < I; ++i) v(c++) = cp.omega(k, i);
        v.segment(c, I) = cp.omega0;
        c += I;
        if (c != D.cols()) throw SolverError("dual layout mismatch");
        double res = (D.A * v - D.rhs).cwiseAbs().maxCoeff();
        for (int t = 0; t < D.cols(); ++t) {
            if (D.signs[t] == lp::Sign::Nonneg) res = std::max(res, -v(t));
            if (D.signs[t] == lp::Sign::Zero) res = std::max(res, std::abs(v(t)));
        }
        e_res = std::max(e_res, res);
        e_dobj = std::max(e_dobj, std::abs(D.objective.dot(v) - P.objective) / scale);
        ++n;
    }
    return {e_obj <= 1e-8 && e_res <= 1e-7 && e_dobj <= 1e-8,
            fmt("100 instances, max rel objective gap %.1e (tol 1e-8), mapped dual residual %.1e (tol 1e-7), "
                "dual objective gap %.1e (tol 1e-8)",
                e_obj, e_res, e_dobj)};
}

// 5. robust sweep vs the discretized counterpart, nominal comparison, audit
Outcome robust_end_to_end() {
    int found = 0, skipped = 0, above_nominal = 0, verified = 0;
    double worst = 0, viol = 0;
    for (std::uint64_t seed = 0; found < 10 && seed < 500; ++seed) {
        auto d = build_matrices(testing::small_network(seed, 0.7));
        SclpSolution s;
        try {
            s = robust::robust_sclp_simplex(d, d.T);
        } catch (const DegeneracyError&) {
            ++skipped;
            continue;
        }
        if (s.bases.size() < 3) {
            ++skipped;
            continue;
        }
        ++found;
        if (robust::verify_robust(d, s).passed()) ++verified;
        auto red = robust::reduce(d, true);
        auto rc = rc::build_sclp_rc(d, &red).problem;
        const double v = oracle::discretized_optimum(rc, 10000);
        worst = std::max(worst, std::abs(s.objective - v) / std::max(1e-12, std::abs(v)));
        if (s.objective > sclp_simplex(d, d.T).objective + 1e-9) ++above_nominal;
        viol = std::max(viol, oracle::audit_feasibility(d, s, 10000, seed).max_violation());
    }
    return {found == 10 && worst <= 5e-3 && above_nominal == 0 && viol <= 1e-7 && verified == 10,
            fmt("%d instances (%d seeds skipped as degenerate or short), max rel err %.2e (tol 5e-3), "
                "robust above nominal %d, max audit violation %.1e (tol 1e-7), verified %d/10",
                found, skipped, worst, above_nominal, viol, verified)};
}

// 6. relative reduction over the default grid
Outcome reduction_grid() {
    bench::ExperimentConfig c;
    c.reps = 10;
    auto rows = bench::reduction_experiment(c);
    double lo = 100, hi = 0, worst_kappa = 0, worst_theta = 0, full_small = 100;
    std::string where;
    auto at = [&](const bench::ResultRow& r, double th, double ka) {
        for (const auto& q : rows)
            if (q.pt.iota == r.pt.iota && q.pt.m == r.pt.m && q.pt.theta == th && q.pt.kappa == ka) return q.mean_R;
        return std::nan("");
    };
    for (const auto& r : rows) {
        if (r.mean_R < lo) {
            lo = r.mean_R;
            where = fmt("iota %d m %d theta %g kappa %g", r.pt.iota, r.pt.m, r.pt.theta, r.pt.kappa);
        }
        hi = std::max(hi, r.mean_R);
        for (size_t t = 0; t + 1 < c.kappa.size(); ++t)
            if (r.pt.kappa == c.kappa[t]) worst_kappa = std::max(worst_kappa, r.mean_R - at(r, r.pt.theta, c.kappa[t + 1]));
        for (size_t t = 0; t + 1 < c.theta.size(); ++t)
            if (r.pt.theta == c.theta[t]) worst_theta = std::max(worst_theta, at(r, c.theta[t + 1], r.pt.kappa) - r.mean_R);
        if (r.pt.kappa == 1.0 && r.pt.theta == c.theta.front()) full_small = std::min(full_small, r.mean_R);
    }
    const bool range = lo >= 50.0 && hi <= 100.0;
    return {range && worst_kappa <= 1.0 && worst_theta <= 1.0 && full_small >= 95.0,
            fmt("%zu points, R in [%.2f, %.2f] (need [50, 100]; min at %s), worst drop in kappa %.2f pp, "
                "worst rise in theta %.2f pp (tol 1 pp), kappa 1 at smallest theta %.2f (need >= 95)",
                rows.size(), lo, hi, where.c_str(), worst_kappa, worst_theta, full_small)};
}

// 7. dimension accounting
Outcome dimension_counts() {
    int checked = 0, bad = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        bench::GridPoint pt;
        pt.iota = 1 + static_cast<int>(seed % 3);
        pt.m = 1 + static_cast<int>(seed % 2);
        pt.theta = 0.1 + 0.04 * static_cast<double>(seed);
        auto net = bench::generate_random(pt, seed);
        auto d = build_matrices(net);
        const long long K = d.K(), J = d.J(), I = d.I();
        auto r = rc::dimension_report(d, false);
        if (r.before != K * (K + I) || r.no_routing != K * (K + I) || r.eq2_form != (K + 1) * (J + I) + 1) ++bad;
        if (bench::count_dimensions(net).before != K * (K + I)) ++bad;
        ++checked;
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto d = build_matrices(testing::small_network(seed, 0.7));
        const long long K = d.K(), J = d.J(), I = d.I();
        auto r = rc::dimension_report(d, true);
        if (r.eq2_form != (K + 1) * (J + I) + 1) ++bad;
        // the unreduced counterpart carries one beta per (k, i) and one gamma per (k, j)
        if (rc::build_sclp_rc(d, nullptr, false).layout.additional() != K * (J + I)) ++bad;
        ++checked;
    }
    return {bad == 0, fmt("%d instances, %d count mismatches", checked, bad)};
}

// 8. degenerate parallel buffers
Outcome degeneracy() {
    FluidNetwork net = drain();
    net.buffers.push_back(net.buffers[0]);
    Flow f = net.flows[0];
    f.buffer = 1;
    net.flows.push_back(f);
    net.horizon = 2.0;
    try {
        auto s = sclp_simplex(build_matrices(net), 2.0);
        return {false, fmt("no degeneracy reported, objective %.17g", s.objective)};
    } catch (const DegeneracyError& e) {
        std::string tied;
        for (const auto& t : e.tied_set()) tied += (tied.empty() ? "" : ", ") + t;
        return {e.tied_set().size() >= 2, fmt("DegeneracyError at theta %.3g, tied set {%s}", e.theta(), tied.c_str())};
    }
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ',');) out.insert(std::stoi(t));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only, known;
    for (int a = 1; a + 1 < argc; a += 2) {
        std::string flag = argv[a];
        if (flag == "--only") only = parse_list(argv[a + 1]);
        else if (flag == "--known-unattainable") known = parse_list(argv[a + 1]);
        else {
            std::fprintf(stderr, "unknown option %s\n", flag.c_str());
            return 2;
        }
    }
    const std::function<Outcome()> criteria[] = {nominal_oracle,    drain_closed_form, worst_case_formula,
                                                  rates_equivalence, robust_end_to_end, reduction_grid,
                                                  dimension_counts,  degeneracy};
    int failed = 0;
    for (int n = 1; n <= 8; ++n) {
        if (!only.empty() && !only.count(n)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[n - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s  %s [%.1fs]%s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                    !o.pass && known.count(n) ? " (known unattainable)" : "");
        std::fflush(stdout);
        if (!o.pass && !known.count(n)) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
