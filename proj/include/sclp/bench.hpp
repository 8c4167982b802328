#pragma once

#include "sclp/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sclp::bench {

// One point of the reduction experiment grid.
struct GridPoint {
    int iota = 1;        // I = 10 iota servers
    int m = 1;           // K = 2 m I buffers
    double theta = 0.5;  // input-buffer density
    double kappa = 0.5;  // Gamma_i = kappa * #flows on server i
};

struct ExperimentConfig {
    std::vector<int> iota{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> m{1, 2, 3, 4, 5};
    std::vector<double> theta{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> kappa{0.1, 0.25, 0.5, 0.75, 1.0};
    int reps = 10;
    std::uint64_t seed = 0;
    int threads = 0;     // 0: hardware concurrency

    void check() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

// No-routing network: flow j drains buffer j; uncertain inflows from flow j
// are placed on n ~ Unif{1..ceil(theta K)} other buffers through routing
// entries, which makes G_tilde positive exactly there.
FluidNetwork generate_random(const GridPoint& pt, std::uint64_t seed);

struct DimensionCounts {
    long long eq2_form = 0;       // (K+1)(J+I)+1
    long long no_routing = 0;     // K(K+I)
    long long before = 0;         // K(J+I) (+ J+I with objective uncertainty)
    long long after = 0;          // sum over residual (k,i) blocks of 1 + block size
    double relative_reduction() const;  // percent
};

// Counts straight from the network structure, without dense matrices.
DimensionCounts count_dimensions(const FluidNetwork& net, bool objective_uncertainty = false);

struct ResultRow {
    GridPoint pt;
    int reps = 0;
    double mean_R = 0, std_R = 0;
};

std::vector<ResultRow> reduction_experiment(const ExperimentConfig& c);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::string to_csv(const std::vector<ResultRow>& rows);

// Small random networks for solver tests: feed-forward routing, generic rates.
struct SmallNetworkOptions {
    int I = 2;
    int K = 4;
    int extra_flows = 0;         // flows beyond one per buffer
    double routing_prob = 0.5;
    double uncertain_prob = 0.7; // share of flows with mu_tilde > 0
    bool fractional_budgets = true;
    double horizon = 0;          // 0: chosen from the data
};

FluidNetwork random_network(const SmallNetworkOptions& opt, std::uint64_t seed);

}  // namespace sclp::bench
