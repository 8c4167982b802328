#pragma once

#include "sclp/common.hpp"
#include "sclp/lp.hpp"
#include "sclp/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sclp {

struct BoundarySolution {
    Vec x0;          // K+L
    Vec qN;          // J+I, flows first then capacity duals
    IndexList K0;    // {k : x0_k > 0}
    IndexList JN1;   // {j : qN_j > 0}
};

struct RobustIntervalInfo;

// One interval of the solution. Rates variables are numbered controls first
// (u_0..u_{J+I-1}, capacity slacks last) then states (xdot_0..xdot_{K+L-1}).
struct IntervalBasis {
    IndexList K_in, J_in;   // sign pattern the Rates-LP was solved with
    IndexList basic;        // sorted basic rates variables
    Vec u, xdot, p, qdot;   // p: K+L (state duals), qdot: J+I (control dual slopes)
    Vec c_eff;              // objective rates for u on this interval (J+I)
    lp::Basis lp_basis;
    std::shared_ptr<const RobustIntervalInfo> robust;

    IndexList K() const;    // states with xdot basic
    IndexList J() const;    // controls with u nonbasic
};

// Abstract Rates-LP provider, so the parametric sweep can run on the nominal
// LP or on the robust cutting-plane solver.
class RatesSolver {
public:
    virtual ~RatesSolver() = default;
    virtual IntervalBasis solve(const IndexList& K, const IndexList& J, const IntervalBasis* warm) = 0;
    virtual int num_controls() const = 0;  // J+I
    virtual int num_states() const = 0;    // K+L
    // The basic solution of a given basis, if it is optimal for the Rates-LP
    // with K = basic states and J = the nonbasic controls among `J`.
    // Providers that cannot evaluate arbitrary bases return nothing.
    virtual std::optional<IntervalBasis> from_basis(const IndexList& basic, const IndexList& J) {
        (void)basic;
        (void)J;
        return std::nullopt;
    }
};

class NominalRates : public RatesSolver {
public:
    explicit NominalRates(const SclpProblem& p, const Tolerances& tol = default_tolerances());
    IntervalBasis solve(const IndexList& K, const IndexList& J, const IntervalBasis* warm) override;
    int num_controls() const override { return p_.J() + p_.I(); }
    int num_states() const override { return p_.K() + p_.L(); }
    std::optional<IntervalBasis> from_basis(const IndexList& basic, const IndexList& J) override;
    lp::Instance instance(const IndexList& K, const IndexList& J) const;

private:
    SclpProblem p_;
    Tolerances tol_;
};

struct Intervals {
    Vec tau, dtau;
    Mat x, dx;   // (K+L) x (N+1); column n is the state at t_n
    Mat q, dq;   // (J+I) x (N+1); column n is the dual state at t_n (primal time)
};

struct SclpSolution {
    double T = 0;
    BoundarySolution boundary;
    std::vector<IntervalBasis> bases;
    Vec tau;
    std::vector<double> breakpoints;  // t_0 .. t_N
    Mat x, q;
    double objective = 0;
    double dual_objective = 0;
    std::vector<double> trace;        // theta at each collision
    int subproblems = 0;              // sequence repairs that needed more than one new basis
    bool robust = false;
};

struct Check {
    std::string name;
    bool passed = false;
    double margin = 0;   // worst value of the checked quantity
};

struct OptimalityReport {
    std::vector<Check> checks;
    bool passed() const;
    std::string summary() const;
};

BoundarySolution solve_boundary(const SclpProblem& p, const Tolerances& tol = default_tolerances());
BoundarySolution solve_boundary(const SclpData& d, const Tolerances& tol = default_tolerances());

IntervalBasis solve_rates(const SclpProblem& p, const IndexList& K, const IndexList& J,
                          const IntervalBasis* warm = nullptr);
IntervalBasis solve_rates(const SclpData& d, const IndexList& K, const IndexList& J,
                          const IntervalBasis* warm = nullptr);

// Leaving variable of the transition a -> b, or -1 if they are not adjacent.
int leaving_variable(const IntervalBasis& a, const IntervalBasis& b);

Intervals compute_intervals(const std::vector<IntervalBasis>& seq, const BoundarySolution& boundary, double T);

SclpSolution sclp_simplex(const SclpProblem& p, const Tolerances& tol = default_tolerances());
SclpSolution sclp_simplex(const SclpData& d, double T, const Tolerances& tol = default_tolerances());

// The parametric sweep over an arbitrary Rates-LP provider.
SclpSolution parametric_simplex(const SclpProblem& p, RatesSolver& rates, const BoundarySolution& boundary,
                                const Tolerances& tol = default_tolerances());

double primal_objective(const SclpProblem& p, const SclpSolution& s);
double dual_objective(const SclpProblem& p, const SclpSolution& s);
// Network case only: objective through holding costs, g'alpha T + g'a T^2/2 - int g'x dt.
double holding_cost_objective(const SclpData& d, const SclpSolution& s);

OptimalityReport verify_optimality(const SclpProblem& p, const SclpSolution& s);

nlohmann::json solution_to_json(const SclpSolution& s);
SclpSolution solution_from_json(const nlohmann::json& j);

}  // namespace sclp
