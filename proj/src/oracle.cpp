#include "sclp/oracle.hpp"
#include "sclp/robust.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace sclp::oracle {

SparseLP discretize(const SclpProblem& p, int n_steps) {
    if (n_steps < 1) throw InputError("discretize: n_steps must be at least 1");
    const int J = p.J(), I = p.I(), K = p.K(), L = p.L();
    if (static_cast<double>(n_steps) * (J + K) > 5e6) throw InputError("discretize: grid too large");
    DiscretizationGrid g{n_steps, p.T / n_steps, J, I, K, L};
    const int nv = g.vars_per_step(), nr = g.rows_per_step();
    const double dt = g.dt;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n_steps) * (p.G.size() + p.H.size() + 2 * K * (1 + L) + I));
    Vec rhs(n_steps * nr);
    Vec obj = Vec::Zero(n_steps * nv);
    for (int n = 0; n < n_steps; ++n) {
        int r0 = n * nr;
        double mid = (n + 0.5) * dt;
        // G u^n dt + [I F](x^n - x^{n-1}) = a dt   (first step: = alpha + a dt)
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < J; ++j)
                if (p.G(k, j) != 0) trip.emplace_back(r0 + k, g.u_col(n, j), p.G(k, j) * dt);
            trip.emplace_back(r0 + k, g.x_col(n, k), 1.0);
            if (n > 0) trip.emplace_back(r0 + k, g.x_col(n - 1, k), -1.0);
            for (int l = 0; l < L; ++l) {
                if (p.F(k, l) == 0) continue;
                trip.emplace_back(r0 + k, g.x_col(n, K + l), p.F(k, l));
                if (n > 0) trip.emplace_back(r0 + k, g.x_col(n - 1, K + l), -p.F(k, l));
            }
            rhs(r0 + k) = p.a(k) * dt + (n == 0 ? p.alpha(k) : 0.0);
        }
        for (int i = 0; i < I; ++i) {
            for (int j = 0; j < J; ++j)
                if (p.H(i, j) != 0) trip.emplace_back(r0 + K + i, g.u_col(n, j), p.H(i, j));
            trip.emplace_back(r0 + K + i, g.s_col(n, i), 1.0);
            rhs(r0 + K + i) = p.b(i);
        }
        for (int j = 0; j < J; ++j) obj(g.u_col(n, j)) = (p.gamma(j) + (p.T - mid) * p.c(j)) * dt;
        for (int l = 0; l < L; ++l) obj(g.x_col(n, K + l)) = p.d(l) * dt;
    }
    SparseLP out;
    out.A.resize(n_steps * nr, n_steps * nv);
    out.A.setFromTriplets(trip.begin(), trip.end());
    out.rhs = rhs;
    out.objective = obj;
    out.grid = g;
    return out;
}

SparseLP discretize(const SclpData& d, int n_steps) { return discretize(d.nominal(), n_steps); }

lp::Instance to_dense(const SparseLP& s) {
    lp::Instance lp;
    lp.A = Mat(s.A);
    lp.rhs = s.rhs;
    lp.objective = s.objective;
    lp.sense = lp::Sense::Max;
    lp.signs.assign(s.A.cols(), lp::Sign::Nonneg);
    return lp;
}

double discretized_optimum(const SclpProblem& p, int n_steps) {
    auto lp = discretize(p, n_steps);
    auto r = ipm_solve(lp);
    double worst = std::max({r.primal_residual, r.dual_residual, r.complementarity});
    if (!r.converged && worst > 1e-7) {
        std::ostringstream os;
        os << "discretized oracle did not converge (scaled residual " << worst << ")";
        throw SolverError(os.str());
    }
    return r.objective;
}

double enumerate_inner_max(const Vec& row, const Vec& eta, const std::vector<double>& budgets,
                           const IndexList& server) {
    const int J = static_cast<int>(row.size());
    double total = 0;
    for (int i = 0; i < static_cast<int>(budgets.size()); ++i) {
        std::vector<double> w;
        for (int j = 0; j < J; ++j)
            if (server[j] == i) w.push_back(row(j) * eta(j));
        const int n = static_cast<int>(w.size());
        if (n > 20) throw SolverError("enumerate_inner_max: more than 20 flows on one server");
        const double G = budgets[i];
        const int whole = static_cast<int>(std::floor(G + 1e-12));
        const double frac = G - whole;
        double best = 0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            int cnt = __builtin_popcount(mask);
            if (cnt > whole) continue;
            double v = 0;
            for (int t = 0; t < n; ++t)
                if (mask >> t & 1) v += w[t];
            best = std::max(best, v);
            if (cnt == whole && frac > 1e-12)
                for (int t = 0; t < n; ++t)
                    if (!(mask >> t & 1)) best = std::max(best, v + frac * w[t]);
        }
        total += best;
    }
    return total;
}

// ---- audit ----

nlohmann::json AuditReport::to_json() const {
    return {{"samples", samples},
            {"max_violation", max_violation()},
            {"max_state_violation", max_state_violation},
            {"max_capacity_violation", max_capacity_violation},
            {"worst_buffer", worst_buffer},
            {"worst_time", worst_time},
            {"worst_sample_seed", worst_sample_seed},
            {"per_buffer_violation", per_buffer_violation},
            {"integration_residual", integration_residual}};
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// A vertex of the per-server budget polytope: floor(Gamma) random flows at 1,
// one more at the fractional remainder.
Vec sample_vertex(const SclpData& d, std::mt19937_64& rng) {
    const int J = d.J();
    Vec xi = Vec::Zero(J);
    for (int i = 0; i < d.I(); ++i) {
        IndexList flows;
        for (int j = 0; j < J; ++j)
            if (d.server[j] == i) flows.push_back(j);
        std::shuffle(flows.begin(), flows.end(), rng);
        double G = d.budgets[i];
        int whole = static_cast<int>(std::floor(G + 1e-12));
        for (int t = 0; t < static_cast<int>(flows.size()); ++t) {
            if (t < whole) xi(flows[t]) = 1.0;
            else if (t == whole) xi(flows[t]) = G - whole;
        }
    }
    return xi;
}

}  // namespace

AuditReport audit_feasibility(const SclpData& d, const SclpSolution& s, int n_samples, std::uint64_t seed) {
    const int K = d.K(), J = d.J(), N = static_cast<int>(s.bases.size());
    AuditReport rep;
    rep.per_buffer_violation.assign(K, 0.0);

    std::vector<Vec> eta(N);
    for (int n = 0; n < N; ++n) {
        eta[n] = s.bases[n].u.head(J);
        Vec cap = d.H * eta[n] - d.b;
        rep.max_capacity_violation = std::max({rep.max_capacity_violation, cap.maxCoeff(), -eta[n].minCoeff()});
    }

    // own dynamics
    Vec x = s.boundary.x0.head(K);
    for (int n = 0; n < N; ++n) {
        Vec xdot = s.robust ? Vec(s.bases[n].xdot.head(K)) : Vec(d.a - d.G_bar * eta[n]);
        x += xdot * s.tau(n);
        rep.integration_residual = std::max(rep.integration_residual, (x - s.x.col(n + 1).head(K)).cwiseAbs().maxCoeff());
    }

    auto run = [&](const std::vector<Vec>& xi, std::uint64_t sample_seed) {
        Vec xs = d.alpha;
        for (int n = 0; n < N; ++n) {
            Mat Greal = d.G_bar + d.G_tilde * xi[n].asDiagonal();
            xs += (d.a - Greal * eta[n]) * s.tau(n);
            for (int k = 0; k < K; ++k) {
                double v = -xs(k);
                if (v > rep.per_buffer_violation[k]) rep.per_buffer_violation[k] = v;
                if (v > rep.max_state_violation) {
                    rep.max_state_violation = v;
                    rep.worst_buffer = k;
                    rep.worst_time = s.breakpoints[n + 1];
                    rep.worst_sample_seed = sample_seed;
                }
            }
        }
        ++rep.samples;
    };

    // injected worst cases, one per buffer
    for (int k = 0; k < K && rep.samples < n_samples; ++k) {
        std::vector<Vec> xi(N);
        for (int n = 0; n < N; ++n) xi[n] = robust::worst_case_xi(d.G_tilde.row(k).transpose(), eta[n], d.budgets, d.server);
        run(xi, seed);
    }
    std::uniform_real_distribution<double> U(0, 1);
    std::uniform_int_distribution<int> pickk(0, std::max(K - 1, 0));
    for (std::uint64_t t = 0; rep.samples < n_samples; ++t) {
        std::uint64_t ss = splitmix(seed ^ splitmix(t));
        std::mt19937_64 rng(ss);
        double cat = U(rng);
        std::vector<Vec> xi(N);
        if (cat < 0.1) {
            int k = pickk(rng);
            for (int n = 0; n < N; ++n)
                xi[n] = robust::worst_case_xi(d.G_tilde.row(k).transpose(), eta[n], d.budgets, d.server);
        } else {
            for (int n = 0; n < N; ++n) {
                xi[n] = sample_vertex(d, rng);
                if (cat >= 0.6) xi[n] *= U(rng);
            }
        }
        run(xi, ss);
    }
    return rep;
}

}  // namespace sclp::oracle
