#include "instances.hpp"
#include "sclp/bench.hpp"
#include "sclp/oracle.hpp"
#include "sclp/rc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sclp;

namespace {

FluidNetwork drain_uncertain() {
    FluidNetwork net;
    net.num_servers = 1;
    net.budgets = {1};
    net.buffers = {{1.0, 0.0, 1.0}};
    Flow f;
    f.mu_bar = 2.0;
    f.mu_tilde = 1.0;
    net.flows = {f};
    net.horizon = 2.0;
    return net;
}

}  // namespace

TEST_CASE("rates counterpart and its dual: strong duality") {
    std::mt19937_64 rng(3);
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto d = build_matrices(testing::small_network(seed, 0.8));
        IndexList Ks, Js;
        for (int k = 0; k < d.K(); ++k)
            if (rng() % 2) Ks.push_back(k);
        for (int j = 0; j < d.J() + d.I(); ++j)
            if (rng() % 6 == 0) Js.push_back(j);
        for (bool obj : {true, false}) {
            auto rc = rc::build_rates_rc(d, Ks, Js, obj);
            auto P = lp::solve(rc.primal);
            auto D = lp::solve(rc.dual);
            if (P.status == lp::Status::Optimal) {
                REQUIRE(D.status == lp::Status::Optimal);
                CHECK(std::abs(P.objective - D.objective) <= 1e-8 * std::max(1.0, std::abs(P.objective)));
                ++solved;
            } else {
                CHECK(P.status == lp::Status::Infeasible);
                CHECK(D.status != lp::Status::Optimal);
            }
        }
    }
    CHECK(solved >= 60);
}

TEST_CASE("rates counterpart: no deviations give the nominal Rates-LP") {
    for (std::uint64_t seed : {1, 4, 9}) {
        auto d = build_matrices(testing::small_network(seed, 0.0));
        IndexList Ks = {0};
        auto rc = rc::build_rates_rc(d, Ks, {});
        auto P = lp::solve(rc.primal);
        auto nom = solve_rates(d, Ks, {});
        CHECK(std::abs(P.objective - d.c_bar.dot(nom.u.head(d.J()))) <= 1e-10);
    }
}

TEST_CASE("rates counterpart: single uncertain flow") {
    auto d = build_matrices(drain_uncertain());
    auto rc = rc::build_rates_rc(d, {0}, {});
    auto P = lp::solve(rc.primal);
    REQUIRE(P.status == lp::Status::Optimal);
    CHECK(P.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("name metadata covers every row and column") {
    auto d = build_matrices(testing::small_network(5, 0.8));
    for (bool obj : {true, false}) {
        auto r = rc::build_rates_rc(d, {}, {}, obj);
        CHECK(static_cast<int>(r.primal_cols.size()) == r.primal.cols());
        CHECK(static_cast<int>(r.primal_rows.size()) == r.primal.rows());
        CHECK(static_cast<int>(r.dual_cols.size()) == r.dual.cols());
        CHECK(static_cast<int>(r.dual_rows.size()) == r.dual.rows());
    }
    auto red = robust::reduce(d, true);
    for (const robust::ReducedProblem* rp : {static_cast<const robust::ReducedProblem*>(nullptr), static_cast<const robust::ReducedProblem*>(&red)}) {
        auto s = rc::build_sclp_rc(d, rp);
        const auto& L = s.layout;
        CHECK(static_cast<int>(s.control_names.size()) == L.controls() + L.h_rows());
        CHECK(s.problem.G.cols() == L.controls());
        CHECK(s.problem.H.rows() == L.h_rows());
        CHECK(static_cast<int>(s.row_names.size()) == d.K() + L.h_rows());
        CHECK(static_cast<int>(s.state_names.size()) == d.K());
        CHECK(s.control_names.front() == "eta_1");
    }
}

TEST_CASE("counterpart without deviations has the nominal discretized optimum") {
    auto d = build_matrices(testing::small_network(3, 0.0));
    auto rc = rc::build_sclp_rc(d);
    const double nominal = oracle::discretized_optimum(d.nominal(), 40);
    const double robust = oracle::discretized_optimum(rc.problem, 40);
    CHECK(std::abs(nominal - robust) <= 1e-7 * std::max(1.0, std::abs(nominal)));
}

TEST_CASE("dimension counts") {
    bench::GridPoint pt;
    for (int iota : {1, 2}) {
        for (double theta : {0.1, 0.5, 0.9}) {
            pt.iota = iota;
            pt.theta = theta;
            auto net = bench::generate_random(pt, 17);
            auto d = build_matrices(net);
            const long long K = d.K(), J = d.J(), I = d.I();
            auto r = rc::dimension_report(d);
            CHECK(r.eq2_form == (K + 1) * (J + I) + 1);
            CHECK(r.no_routing == K * (K + I));
            CHECK(r.before == r.no_routing);  // one flow per buffer
            for (bool obj : {false, true}) {
                auto a = rc::dimension_report(d, obj);
                auto b = bench::count_dimensions(net, obj);
                CHECK(a.eq2_form == b.eq2_form);
                CHECK(a.before == b.before);
                CHECK(a.after == b.after);
                CHECK(a.relative_reduction() == doctest::Approx(b.relative_reduction()).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("substituting the solved protection variables satisfies the counterpart rows") {
    for (std::uint64_t seed : {0, 3}) {
        auto d = build_matrices(testing::small_network(seed, 0.7));
        auto red = robust::reduce(d, true);
        auto rc = rc::build_sclp_rc(d, &red);
        auto s = robust::robust_sclp_simplex(d, d.T);
        const auto& L = rc.layout;
        const int nc = L.controls();
        for (const auto& b : s.bases) {
            REQUIRE(b.u.size() == nc + L.h_rows());
            Vec u = b.u.head(nc);
            Vec eta = u.head(d.J());
            // H rows with their slacks
            CHECK((rc.problem.H * u + b.u.tail(L.h_rows()) - rc.problem.b).cwiseAbs().maxCoeff() <= 1e-9);
            CHECK(b.u.minCoeff() >= -1e-9);
            for (int t = 0; t < L.ng(); ++t) {
                auto [k, j] = L.gamma[t];
                const double beta = u(L.beta_col(L.gamma_beta[t])), gamma = u(L.gamma_col(t));
                CHECK(d.G_tilde(k, j) * eta(j) - beta - gamma <= 1e-9);
            }
            // protection dominates the residual worst case
            for (int k = 0; k < d.K(); ++k) {
                double prot = 0;
                for (int t = 0; t < L.nb(); ++t)
                    if (L.beta[t].first == k) prot += d.budgets[L.beta[t].second] * u(L.beta_col(t));
                for (int t = 0; t < L.ng(); ++t)
                    if (L.gamma[t].first == k) prot += u(L.gamma_col(t));
                Vec row = Vec::Zero(d.J());
                for (int j : red.R[k]) row(j) = d.G_tilde(k, j);
                const double worst = oracle::enumerate_inner_max(row, eta, d.budgets, d.server);
                CHECK(prot >= worst - 1e-9);
            }
        }
    }
}
