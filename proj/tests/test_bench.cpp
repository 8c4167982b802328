#include "sclp/bench.hpp"
#include "sclp/rc.hpp"

#include <doctest.h>

#include <sstream>

using namespace sclp;
using namespace sclp::bench;

namespace {

double mean_at(const std::vector<ResultRow>& rows, double theta, double kappa) {
    for (const auto& r : rows)
        if (r.pt.theta == theta && r.pt.kappa == kappa) return r.mean_R;
    FAIL("missing grid point");
    return 0;
}

}  // namespace

TEST_CASE("generated network shape") {
    GridPoint pt;
    auto net = generate_random(pt, 1);
    CHECK(net.I() == 10);
    CHECK(net.K() == 20);
    CHECK(net.J() == 20);
    auto d = build_matrices(net);
    for (int j = 0; j < net.J(); ++j) {
        CHECK(net.flows[j].buffer == j);
        int positive = 0;
        for (int k = 0; k < net.K(); ++k)
            if (d.G_tilde(k, j) > 0) ++positive;
        CHECK(positive >= 1);
        CHECK(positive <= 10);  // ceil(0.5 * 20)
        CHECK(positive == static_cast<int>(net.flows[j].routing.size()));
    }
    pt.iota = 2;
    pt.m = 3;
    auto big = generate_random(pt, 1);
    CHECK(big.I() == 20);
    CHECK(big.K() == 120);
}

TEST_CASE("generation is seed deterministic and budgets stay within flow counts") {
    GridPoint pt;
    pt.kappa = 1.0;
    auto a = generate_random(pt, 9), b = generate_random(pt, 9), c = generate_random(pt, 10);
    CHECK(network_to_json(a) == network_to_json(b));
    CHECK(network_to_json(a) != network_to_json(c));
    std::vector<int> per(a.I(), 0);
    for (const auto& f : a.flows) ++per[f.server];
    for (int i = 0; i < a.I(); ++i) CHECK(a.budgets[i] <= per[i]);
    CHECK(count_dimensions(a).relative_reduction() == 100.0);
}

TEST_CASE("structural counts match the counterpart builder") {
    GridPoint pt;
    for (double theta : {0.1, 0.6}) {
        for (double kappa : {0.1, 0.5}) {
            pt.theta = theta;
            pt.kappa = kappa;
            auto net = generate_random(pt, 3);
            auto d = build_matrices(net);
            auto red = robust::reduce(d, false);
            auto rc = rc::build_sclp_rc(d, &red);
            CHECK(count_dimensions(net).after == rc.layout.additional());
            CHECK(count_dimensions(net).before == 20 * (20 + 10));
        }
    }
}

TEST_CASE("reduction trends on a small grid") {
    ExperimentConfig c;
    c.iota = {1};
    c.m = {1};
    c.theta = {0.1, 0.5, 0.9};
    c.kappa = {0.1, 0.5, 1.0};
    c.reps = 10;
    c.seed = 3;
    auto rows = reduction_experiment(c);
    CHECK(rows.size() == 9);
    for (const auto& r : rows) {
        CHECK(r.mean_R >= 0.0);
        CHECK(r.mean_R <= 100.0);
        CHECK(r.reps == 10);
    }
    for (double th : c.theta) {
        CHECK(mean_at(rows, th, 1.0) == 100.0);
        CHECK(mean_at(rows, th, 0.5) >= mean_at(rows, th, 0.1) - 1.0);
    }
    for (double ka : {0.1, 0.5}) CHECK(mean_at(rows, 0.1, ka) >= mean_at(rows, 0.9, ka) - 1.0);

    auto again = reduction_experiment(c);
    for (size_t t = 0; t < rows.size(); ++t) CHECK(rows[t].mean_R == again[t].mean_R);
    c.threads = 1;
    auto serial = reduction_experiment(c);
    for (size_t t = 0; t < rows.size(); ++t) CHECK(rows[t].mean_R == serial[t].mean_R);
}

TEST_CASE("csv layout") {
    ExperimentConfig c;
    c.iota = {1};
    c.m = {1};
    c.theta = {0.5};
    c.kappa = {0.25, 0.75};
    c.reps = 2;
    auto csv = to_csv(reduction_experiment(c));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "iota,m,theta,kappa,rep_count,mean_R,std_R");
    int n = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
        ++n;
    }
    CHECK(n == 2);
}

TEST_CASE("config parsing") {
    auto c = config_from_json({{"iota", {1}}, {"m", {2}}, {"reps", 4}});
    CHECK(c.m == std::vector<int>{2});
    CHECK(c.reps == 4);
    CHECK(c.theta.size() == 9);
    CHECK(config_from_json(config_to_json(c)).kappa == c.kappa);
    CHECK_THROWS_AS(config_from_json({{"theta", {1.5}}}), InputError);
    CHECK_THROWS_AS(config_from_json({{"reps", 0}}), InputError);
}

TEST_CASE("small solver networks") {
    SmallNetworkOptions o;
    o.I = 3;
    o.K = 5;
    o.extra_flows = 2;
    auto net = random_network(o, 4);
    CHECK(net.J() == 7);
    CHECK(validate(net).empty());
    CHECK(net.horizon > 0);
    o.K = 1;
    o.extra_flows = 0;
    CHECK_THROWS_AS(random_network(o, 1), InputError);
}
