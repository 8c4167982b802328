#include "instances.hpp"
#include "sclp/oracle.hpp"
#include "sclp/robust.hpp"

#include <doctest.h>

#include <cmath>

using namespace sclp;

namespace {

FluidNetwork drain(double T) {
    FluidNetwork net;
    net.num_servers = 1;
    net.budgets = {0};
    net.buffers = {{1.0, 0.0, 1.0}};
    Flow f;
    f.mu_bar = 2.0;
    net.flows = {f};
    net.horizon = T;
    return net;
}

FluidNetwork tandem() { return load_network(std::string(SCLP_FIXTURES_DIR) + "/tandem.json"); }

}  // namespace

TEST_CASE("discretization layout") {
    auto d = build_matrices(testing::small_network(2, 0.0));
    auto lp = oracle::discretize(d, 7);
    const auto& g = lp.grid;
    CHECK(g.n_steps == 7);
    CHECK(g.dt == doctest::Approx(d.T / 7).epsilon(1e-15));
    CHECK(lp.A.rows() == 7 * g.rows_per_step());
    CHECK(lp.A.cols() == 7 * g.vars_per_step());
    CHECK(g.x_col(1, 0) == g.vars_per_step() + d.J() + d.I());
}

TEST_CASE("single step is exact when the buffer empties at the horizon") {
    auto d = build_matrices(drain(0.5));
    CHECK(std::abs(oracle::discretized_optimum(d.nominal(), 1) - 0.25) <= 1e-9);
}

TEST_CASE("fine grid approaches the drain optimum") {
    auto d = build_matrices(drain(1.0));
    const double v = oracle::discretized_optimum(d.nominal(), 10000);
    CHECK(std::abs(v - 0.75) <= 1e-3 * 0.75);
    CHECK(v <= 0.75 + 1e-9);
}

TEST_CASE("interior point agrees with the simplex kernel on a small grid") {
    auto d = build_matrices(testing::small_network(4, 0.0));
    auto lp = oracle::discretize(d, 6);
    auto ipm = oracle::ipm_solve(lp);
    REQUIRE(ipm.converged);
    auto splx = lp::solve(oracle::to_dense(lp));
    REQUIRE(splx.status == lp::Status::Optimal);
    CHECK(std::abs(ipm.objective - splx.objective) <= 1e-8 * std::max(1.0, std::abs(splx.objective)));
    CHECK(ipm.primal_residual <= 1e-8);
    CHECK(ipm.gap <= 1e-8);
}

TEST_CASE("nested refinement never decreases the discretized optimum") {
    for (std::uint64_t seed : {0, 5}) {
        auto d = build_matrices(testing::small_network(seed, 0.0));
        const double exact = sclp_simplex(d, d.T).objective;
        double prev = -1e300;
        for (int n : {10, 20, 40, 80}) {
            const double v = oracle::discretized_optimum(d.nominal(), n);
            CHECK(v >= prev - 1e-8 * std::abs(exact));
            CHECK(v <= exact + 1e-8 * std::abs(exact));
            prev = v;
        }
    }
}

TEST_CASE("vertex enumeration") {
    Vec row(3), eta = Vec::Ones(3);
    row << 3.0, 2.0, 1.0;
    CHECK(oracle::enumerate_inner_max(row, eta, {1.5}, {0, 0, 0}) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(oracle::enumerate_inner_max(row, eta, {0.0}, {0, 0, 0}) == 0.0);
    CHECK(oracle::enumerate_inner_max(row, eta, {3.0}, {0, 0, 0}) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(oracle::enumerate_inner_max(row, eta, {1.0, 1.0}, {0, 1, 1}) == doctest::Approx(5.0).epsilon(1e-15));
    row << -1.0, 2.0, 0.0;
    CHECK(oracle::enumerate_inner_max(row, eta, {2.0}, {0, 0, 0}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("audit: nominal schedules can be infeasible under deviations") {
    auto d = build_matrices(tandem());
    auto nominal = sclp_simplex(d, d.T);
    auto rep = oracle::audit_feasibility(d, nominal, 200, 1);
    CHECK(rep.max_violation() > 1e-3);
    CHECK(rep.worst_buffer == 1);
    CHECK(rep.integration_residual <= 1e-9);
}

TEST_CASE("audit: robust schedules stay feasible") {
    auto d = build_matrices(tandem());
    auto s = robust::robust_sclp_simplex(d, d.T);
    auto rep = oracle::audit_feasibility(d, s, 2000, 7);
    CHECK(rep.max_violation() <= 1e-7);
    CHECK(rep.integration_residual <= 1e-9);
    CHECK(rep.samples == 2000);
}

TEST_CASE("audit: no deviations means no violation, and seeds reproduce") {
    auto d = build_matrices(testing::small_network(3, 0.0));
    auto s = sclp_simplex(d, d.T);
    auto rep = oracle::audit_feasibility(d, s, 100, 3);
    CHECK(rep.max_violation() <= 1e-9);

    auto t = build_matrices(tandem());
    auto n = sclp_simplex(t, t.T);
    auto a = oracle::audit_feasibility(t, n, 300, 42);
    auto b = oracle::audit_feasibility(t, n, 300, 42);
    CHECK(a.max_violation() == b.max_violation());
    CHECK(a.worst_sample_seed == b.worst_sample_seed);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("grid size guard") {
    auto d = build_matrices(testing::small_network(6, 0.0));
    CHECK_THROWS_AS(oracle::discretize(d, 0), InputError);
    CHECK_THROWS_AS(oracle::discretize(d, 100000000), InputError);
}
