#include "instances.hpp"
#include "sclp/oracle.hpp"
#include "sclp/rc.hpp"
#include "sclp/robust.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sclp;
using namespace sclp::robust;

namespace {

FluidNetwork drain_uncertain(double T) {
    FluidNetwork net;
    net.num_servers = 1;
    net.budgets = {1};
    net.buffers = {{1.0, 0.0, 1.0}};
    Flow f;
    f.mu_bar = 2.0;
    f.mu_tilde = 1.0;
    net.flows = {f};
    net.horizon = T;
    return net;
}

// max sum_j w_j Xi_j over 0 <= Xi <= 1, sum_{s(j)=i} Xi_j <= Gamma_i, by the simplex kernel.
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
    REQUIRE(r.status == lp::Status::Optimal);
    return r.objective;
}

struct RandomInner {
    Vec row, eta;
    std::vector<double> budgets;
    IndexList server;
};

RandomInner random_inner(std::mt19937_64& rng, int max_per_server) {
    std::uniform_real_distribution<double> U(0, 1);
    RandomInner c;
    const int I = 1 + static_cast<int>(rng() % 3);
    IndexList per(I);
    int J = 0;
    for (int i = 0; i < I; ++i) {
        per[i] = 1 + static_cast<int>(rng() % max_per_server);
        J += per[i];
    }
    c.row = Vec(J);
    c.eta = Vec(J);
    for (int i = 0, j = 0; i < I; ++i)
        for (int t = 0; t < per[i]; ++t, ++j) c.server.push_back(i);
    for (int j = 0; j < J; ++j) {
        double r = U(rng);
        c.row(j) = r < 0.2 ? -U(rng) : (r < 0.3 ? 0.0 : U(rng));
        c.eta(j) = U(rng) < 0.15 ? 0.0 : U(rng);
        if (U(rng) < 0.1 && j > 0) c.row(j) = c.row(j - 1);  // ties
    }
    for (int i = 0; i < I; ++i)
        c.budgets.push_back(U(rng) < 0.5 ? std::floor(U(rng) * (per[i] + 1)) : U(rng) * per[i]);
    return c;
}

double value(const Vec& row, const Vec& eta, const Vec& xi) { return row.cwiseProduct(eta).dot(xi); }

}  // namespace

TEST_CASE("worst case: hand examples") {
    Vec row(2), eta = Vec::Ones(2);
    row << 1.0, 2.0;
    auto xi = worst_case_xi(row, eta, {2.0}, {0, 0});
    CHECK(xi(0) == 1.0);
    CHECK(xi(1) == 1.0);

    Vec row3(3);
    row3 << 3.0, 2.0, 1.0;
    auto x3 = worst_case_xi(row3, Vec::Ones(3), {1.5}, {0, 0, 0});
    CHECK(x3(0) == 1.0);
    CHECK(x3(1) == 0.5);
    CHECK(x3(2) == 0.0);

    auto none = worst_case_xi(row3, Vec::Ones(3), {0.0}, {0, 0, 0});
    CHECK(none.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("worst case equals the inner LP and vertex enumeration") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 200; ++t) {
        auto c = random_inner(rng, 6);
        auto xi = worst_case_xi(c.row, c.eta, c.budgets, c.server);
        double v = value(c.row, c.eta, xi);
        Vec w = c.row.cwiseProduct(c.eta).cwiseMax(0.0);
        CHECK(std::abs(v - inner_lp(w, c.budgets, c.server)) <= 1e-10);
        CHECK(std::abs(v - oracle::enumerate_inner_max(c.row, c.eta, c.budgets, c.server)) <= 1e-10);
        for (int i = 0; i < static_cast<int>(c.budgets.size()); ++i) {
            double used = 0;
            for (int j = 0; j < xi.size(); ++j)
                if (c.server[j] == i) used += xi(j);
            CHECK(used <= c.budgets[i] + 1e-12);
        }
        CHECK(xi.minCoeff() >= 0.0);
        CHECK(xi.maxCoeff() <= 1.0);
    }
}

TEST_CASE("worst case value does not depend on tie breaking") {
    Vec row(4), eta = Vec::Ones(4);
    row << 2.0, 2.0, 2.0, 1.0;
    auto a = worst_case_xi(row, eta, {1.5}, {0, 0, 0, 0});
    Vec rev(4);
    rev << 1.0, 2.0, 2.0, 2.0;
    auto b = worst_case_xi(rev, eta, {1.5}, {0, 0, 0, 0});
    CHECK(value(row, eta, a) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(value(rev, eta, b) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(a(0) == 1.0);  // lowest index wins
}

TEST_CASE("budget dual certificate") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        auto c = random_inner(rng, 6);
        for (int i = 0; i < static_cast<int>(c.budgets.size()); ++i) {
            IndexList flows;
            for (int j = 0; j < c.row.size(); ++j)
                if (c.server[j] == i) flows.push_back(j);
            Vec w(flows.size());
            for (size_t t2 = 0; t2 < flows.size(); ++t2) w(t2) = c.row(flows[t2]) * c.eta(flows[t2]);
            auto bd = budget_dual(w, c.budgets[i]);
            CHECK(bd.beta >= 0.0);
            CHECK(bd.gamma.minCoeff() >= 0.0);
            for (int t2 = 0; t2 < w.size(); ++t2) CHECK(bd.beta + bd.gamma(t2) >= w(t2) - 1e-12);
            double dual = c.budgets[i] * bd.beta + bd.gamma.sum();
            CHECK(std::abs(dual - inner_lp(w.cwiseMax(0.0), {c.budgets[i]}, IndexList(w.size(), 0))) <= 1e-10);
        }
    }
}

TEST_CASE("reduction: full and empty absorption") {
    auto net = testing::small_network(6, 1.0);
    std::vector<int> per(net.I(), 0);
    for (const auto& f : net.flows) ++per[f.server];

    for (int i = 0; i < net.I(); ++i) net.budgets[i] = per[i];
    auto d = build_matrices(net);
    auto r = reduce(d, true);
    for (const auto& Rk : r.R) CHECK(Rk.empty());
    CHECK(r.R0.empty());
    CHECK((r.G_star - (d.G_bar + d.G_tilde.cwiseMax(0.0))).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(rc::dimension_report(d).relative_reduction() == 100.0);

    for (int i = 0; i < net.I(); ++i) net.budgets[i] = 0;
    auto z = build_matrices(net);
    auto rz = reduce(z, true);
    for (int k = 0; k < z.K(); ++k) {
        IndexList expect;
        for (int j = 0; j < z.J(); ++j)
            if (z.G_tilde(k, j) > 0) expect.push_back(j);
        CHECK(rz.R[k] == expect);
    }
    CHECK(rz.G_star == z.G_bar);
    // without absorption only the harmful entries keep protection blocks
    long long after = 0;
    for (int k = 0; k < z.K(); ++k)
        for (int i = 0; i < z.I(); ++i) {
            long long n = 0;
            for (int j : rz.R[k])
                if (z.server[j] == i) ++n;
            if (n) after += 1 + n;
        }
    for (int i = 0; i < z.I(); ++i) {
        long long n = 0;
        for (int j : rz.R0)
            if (z.server[j] == i) ++n;
        if (n) after += 1 + n;
    }
    CHECK(rc::dimension_report(z, true).after == after);
}

TEST_CASE("reduction soundness: reduced inner value plus box term equals the original") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto d = build_matrices(testing::small_network(seed, 0.8));
        auto r = reduce(d, true);
        for (int rep = 0; rep < 5; ++rep) {
            Vec eta = Vec::NullaryExpr(d.J(), [&](Eigen::Index) { return U(rng); });
            for (int k = 0; k < d.K(); ++k) {
                Vec row = d.G_tilde.row(k).transpose();
                double original = value(row, eta, worst_case_xi(row, eta, d.budgets, d.server));
                double box = (r.G_star.row(k) - d.G_bar.row(k)).dot(eta);
                Vec res = Vec::Zero(d.J());
                for (int j : r.R[k]) res(j) = row(j);
                double reduced = box + value(res, eta, worst_case_xi(res, eta, d.budgets, d.server));
                CHECK(std::abs(original - reduced) <= 1e-10);
            }
        }
    }
}

TEST_CASE("cutting planes: no deviations reproduce the nominal Rates-LP") {
    auto d = build_matrices(testing::small_network(3, 0.0));
    auto m = RobustModel::raw(d);
    CutPool pool(d.K(), d.J());
    IndexList K = {0};
    auto r = cutting_planes_rates(m, K, {}, pool);
    auto nom = solve_rates(d, K, {});
    CHECK(r.cuts_added == 0);
    CHECK(std::abs(r.objective - d.c_bar.dot(nom.u.head(d.J()))) <= 1e-10);
    CHECK((r.p_prime - Vec(r.p_prime)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.delta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cutting planes: single uncertain flow") {
    // The drained buffer's deviation is favourable to x >= 0, so the worst case
    // of the state row is the nominal rate; the objective loses c_tilde.
    auto d = build_matrices(drain_uncertain(1.0));
    auto m = RobustModel::raw(d);
    CutPool pool(1, 1);
    auto r = cutting_planes_rates(m, {0}, {}, pool);
    CHECK(r.eta(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.xdot(0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.xi_obj_worst(0) == 1.0);
}

TEST_CASE("cutting planes match the explicit counterpart and its dual") {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 25 && seed < 200; ++seed) {
        auto net = testing::small_network(seed, 0.8);
        if (net.K() > 6 || net.J() > 10) continue;
        auto d = build_matrices(net);
        IndexList Ks, Js;
        for (int k = 0; k < d.K(); ++k)
            if (rng() % 2) Ks.push_back(k);
        for (int j = 0; j < d.J(); ++j)
            if (rng() % 5 == 0) Js.push_back(j);
        auto m = RobustModel::raw(d);
        CutPool pool(d.K(), d.J());
        auto r = cutting_planes_rates(m, Ks, Js, pool);
        auto rc = rc::build_rates_rc(d, Ks, Js);
        auto primal = lp::solve(rc.primal);
        auto dual = lp::solve(rc.dual);
        REQUIRE(primal.status == lp::Status::Optimal);
        REQUIRE(dual.status == lp::Status::Optimal);
        const double scale = std::max(1.0, std::abs(primal.objective));
        CHECK(std::abs(r.objective - primal.objective) <= 1e-8 * scale);
        CHECK(std::abs(dual.objective - primal.objective) <= 1e-8 * scale);
        // mapped duals: objective a'p' + b'q equals the cutting-plane objective
        CHECK(std::abs(d.a.dot(r.p_prime) + d.b.dot(r.q_cap) - r.objective) <= 1e-8 * scale);
        // robust feasibility of eta over every pool realization
        Vec eta = r.eta.head(d.J());
        for (int k = 0; k < d.K(); ++k) {
            if (contains(Ks, k)) continue;
            for (const auto& xi : pool.xi[k])
                CHECK((d.G_bar.row(k).transpose() + d.G_tilde.row(k).transpose().cwiseProduct(xi)).dot(eta) <=
                      d.a(k) + 1e-9);
        }
        ++checked;
    }
    CHECK(checked == 25);
}

TEST_CASE("larger budgets never increase the robust Rates-LP objective") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto net = testing::small_network(seed, 0.9);
        std::vector<int> per(net.I(), 0);
        for (const auto& f : net.flows) ++per[f.server];
        double prev = 1e300;
        for (double frac : {0.0, 0.3, 0.6, 1.0}) {
            for (int i = 0; i < net.I(); ++i) net.budgets[i] = frac * per[i];
            auto d = build_matrices(net);
            CutPool pool(d.K(), d.J());
            auto r = cutting_planes_rates(RobustModel::raw(d), {}, {}, pool);
            CHECK(r.objective <= prev + 1e-10);
            prev = r.objective;
        }
    }
}

TEST_CASE("pool never stores a realization twice") {
    CutPool pool(1, 3);
    Vec xi(3);
    xi << 1, 0.5, 0;
    CHECK(pool.add(0, xi));
    CHECK_FALSE(pool.add(0, xi));
    CHECK_FALSE(pool.add(0, Vec::Zero(3)));
}

TEST_CASE("robust sweep without deviations equals the nominal sweep") {
    for (std::uint64_t seed : {0, 3, 7}) {
        auto d = build_matrices(testing::small_network(seed, 0.0));
        auto n = sclp_simplex(d, d.T);
        auto r = robust_sclp_simplex(d, d.T);
        CHECK(std::abs(n.objective - r.objective) <= 1e-9 * std::max(1.0, std::abs(n.objective)));
        CHECK(n.bases.size() == r.bases.size());
    }
}

TEST_CASE("robust drain example") {
    // eta = 1 until the buffer empties at the nominal rate, objective rate c_bar - c_tilde = 1
    auto d = build_matrices(drain_uncertain(1.0));
    auto s = robust_sclp_simplex(d, 1.0);
    CHECK(std::abs(s.objective - 0.375) <= 1e-12);
    CHECK(std::abs(s.breakpoints[1] - 0.5) <= 1e-12);
    CHECK(verify_robust(d, s).passed());
}

TEST_CASE("robust sweep: frozen counterpart oracle values and certificates") {
    // 10,000-step discretized optima of the reduced counterpart
    struct Row {
        std::uint64_t seed;
        double oracle;
    };
    const Row rows[] = {{0, 2.1026327847041868}, {3, 3.692188879603358}, {16, 15.242975593148056}};
    for (const auto& row : rows) {
        auto d = build_matrices(testing::small_network(row.seed, 0.7));
        auto s = robust_sclp_simplex(d, d.T);
        CHECK(std::abs(s.objective - row.oracle) <= 1e-3 * row.oracle);
        auto rep = verify_robust(d, s);
        CHECK_MESSAGE(rep.passed(), rep.summary());
        CHECK(s.objective <= sclp_simplex(d, d.T).objective + 1e-9);
        auto audit = oracle::audit_feasibility(d, s, 500, row.seed);
        CHECK(audit.max_violation() <= 1e-7);
        CHECK(audit.integration_residual <= 1e-9);
    }
}

TEST_CASE("raw and reduced counterparts give the same robust sweep") {
    auto d = build_matrices(testing::small_network(0, 0.7));
    RobustOptions raw;
    raw.use_reduction = false;
    auto a = robust_sclp_simplex(d, d.T);
    auto b = robust_sclp_simplex(d, d.T, raw);
    CHECK(std::abs(a.objective - b.objective) <= 1e-9 * std::abs(a.objective));
}
