#pragma once

#include "sclp/common.hpp"
#include "sclp/lp.hpp"
#include "sclp/model.hpp"
#include "sclp/sclp.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <vector>

namespace sclp::oracle {

using SpMat = Eigen::SparseMatrix<double>;

// Per step n = 1..n_steps the variables are [u^n (J), s^n (I), x^n (K+L)],
// all nonnegative; rows are K state balances then I capacity rows.
struct DiscretizationGrid {
    int n_steps = 1;
    double dt = 1.0;
    int J = 0, I = 0, K = 0, L = 0;

    int vars_per_step() const { return J + I + K + L; }
    int rows_per_step() const { return K + I; }
    int u_col(int n, int j) const { return n * vars_per_step() + j; }
    int s_col(int n, int i) const { return n * vars_per_step() + J + i; }
    int x_col(int n, int k) const { return n * vars_per_step() + J + I + k; }
};

// max objective' x  s.t.  A x = rhs,  x >= 0
struct SparseLP {
    SpMat A;
    Vec rhs;
    Vec objective;
    DiscretizationGrid grid;
};

SparseLP discretize(const SclpProblem& p, int n_steps);
SparseLP discretize(const SclpData& d, int n_steps);

// Dense copy for cross-checking small grids with the simplex kernel.
lp::Instance to_dense(const SparseLP& lp);

struct IpmOptions {
    double tol = 1e-10;          // on scaled residuals and complementarity
    int max_iter = 200;
    int stall_iterations = 6;    // stop after this many iterations without progress
};

struct IpmResult {
    bool converged = false;
    Vec x, y;
    double objective = 0;
    int iterations = 0;
    double primal_residual = 0, dual_residual = 0;
    double complementarity = 0;  // x'z / (1 + |objective|)
    double gap = 0;              // |primal - dual objective| / (1 + |objective|)
};

// Primal-dual interior point (Mehrotra predictor-corrector) on a Ruiz-scaled
// copy of the LP. Directions come from the regularized augmented system with
// a sparse LDL' factorization and iterative refinement.
IpmResult ipm_solve(const SparseLP& lp, const IpmOptions& opt = {});

// Optimal value of the discretized problem; throws SolverError if the best
// interior point iterate has scaled residuals above 1e-7.
double discretized_optimum(const SclpProblem& p, int n_steps);

// Exact optimum of max sum_j Xi_j row_j eta_j over the per-server budget
// polytope by enumerating its vertices.
double enumerate_inner_max(const Vec& row, const Vec& eta, const std::vector<double>& budgets,
                           const IndexList& server);

struct AuditReport {
    int samples = 0;
    double max_state_violation = 0;   // max of -x_k(t)
    double max_capacity_violation = 0;
    int worst_buffer = -1;
    double worst_time = 0;
    std::uint64_t worst_sample_seed = 0;
    std::vector<double> per_buffer_violation;
    double integration_residual = 0;  // nominal re-integration vs stored states

    double max_violation() const { return std::max(max_state_violation, max_capacity_violation); }
    nlohmann::json to_json() const;
};

// Samples piecewise-constant realizations on the solution's breakpoints and
// integrates x(t) = alpha + a t - int (G_bar + G_tilde o Xi) eta.
AuditReport audit_feasibility(const SclpData& d, const SclpSolution& s, int n_samples, std::uint64_t seed);

}  // namespace sclp::oracle
