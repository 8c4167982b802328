#pragma once

#include "sclp/common.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace sclp {

struct Flow {
    int server = 0;
    int buffer = 0;                  // f(j), the buffer this flow drains
    double mu_bar = 1.0;
    double mu_tilde = 0.0;
    double cost = 0.0;               // h_j; kept for completeness, the solver assumes h = 0
    std::vector<std::pair<int, double>> routing;  // (to buffer, proportion)
};

struct Buffer {
    double alpha = 0.0;
    double input_rate = 0.0;
    double holding_cost = 0.0;
};

struct FluidNetwork {
    int num_servers = 0;
    std::vector<double> budgets;     // Gamma_i
    std::vector<Buffer> buffers;
    std::vector<Flow> flows;
    double horizon = 1.0;

    int I() const { return num_servers; }
    int K() const { return static_cast<int>(buffers.size()); }
    int J() const { return static_cast<int>(flows.size()); }
};

// A separated continuous LP in the form
//   max  int_0^T (gamma + (T-t) c)' u + d' x_F dt
//   s.t. int_0^t G u ds + [I F] x(t) = alpha + a t,  H u(t) <= b,  x, u >= 0.
struct SclpProblem {
    Mat G, F, H;
    Vec alpha, a, b, c, gamma, d;
    double T = 1.0;

    int K() const { return static_cast<int>(G.rows()); }
    int J() const { return static_cast<int>(G.cols()); }
    int I() const { return static_cast<int>(H.rows()); }
    int L() const { return static_cast<int>(F.cols()); }
};

// Matrix data of a fluid network. The nominal problem in eta = u / mu_bar
// uses G_bar and c_bar; G_tilde and c_tilde carry the rate deviations.
struct SclpData {
    Mat G, G_bar, G_tilde, H, F;
    Vec b, c, c_bar, c_tilde, gamma, d, alpha, a, g;
    double T = 1.0;
    IndexList server;                // s(j)
    std::vector<double> budgets;     // Gamma_i

    int K() const { return static_cast<int>(G.rows()); }
    int J() const { return static_cast<int>(G.cols()); }
    int I() const { return static_cast<int>(H.rows()); }

    SclpProblem nominal() const;
    bool has_uncertainty() const;
};

std::vector<std::string> validate(const FluidNetwork& net);
SclpData build_matrices(const FluidNetwork& net);

FluidNetwork network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const FluidNetwork& net);
FluidNetwork load_network(const std::string& path);
void save_network(const FluidNetwork& net, const std::string& path);

// The general form (3) container is also serializable for kernel-level tests.
nlohmann::json problem_to_json(const SclpProblem& p);
SclpProblem problem_from_json(const nlohmann::json& j);

nlohmann::json vec_to_json(const Vec& v);
nlohmann::json mat_to_json(const Mat& m);
Vec vec_from_json(const nlohmann::json& j);
Mat mat_from_json(const nlohmann::json& j, int cols_if_empty = 0);

}  // namespace sclp
