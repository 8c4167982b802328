#pragma once

#include "sclp/lp.hpp"
#include "sclp/model.hpp"
#include "sclp/robust.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sclp::rc {

// Column layout of the control-variable robust counterpart. Controls are
// [eta (J), beta (k,i), gamma (k,j), beta_0 (i), gamma_0 (j)], followed by
// the slacks of the H rows: capacity (I), one per gamma, one per gamma_0.
struct Layout {
    int K = 0, J = 0, I = 0;
    std::vector<std::pair<int, int>> beta;   // (k, i)
    std::vector<std::pair<int, int>> gamma;  // (k, j)
    std::vector<int> gamma_beta;             // beta block of each gamma
    IndexList beta0;                         // servers
    IndexList gamma0;                        // flows
    std::vector<int> gamma0_beta0;

    int nb() const { return static_cast<int>(beta.size()); }
    int ng() const { return static_cast<int>(gamma.size()); }
    int nb0() const { return static_cast<int>(beta0.size()); }
    int ng0() const { return static_cast<int>(gamma0.size()); }
    int beta_col(int t) const { return J + t; }
    int gamma_col(int t) const { return J + nb() + t; }
    int beta0_col(int t) const { return J + nb() + ng() + t; }
    int gamma0_col(int t) const { return J + nb() + ng() + nb0() + t; }
    int controls() const { return J + nb() + ng() + nb0() + ng0(); }
    int h_rows() const { return I + ng() + ng0(); }
    // beta/gamma variables added to the nominal problem
    long long additional() const { return nb() + ng() + nb0() + ng0(); }

    // Every (k, i) and (k, j) pair (the unreduced form) or only the residual
    // blocks of `m` (entries with positive uncertain coefficient).
    static Layout of(const robust::RobustModel& m, bool full);
};

struct RcProblem {
    SclpProblem problem;   // controls and H rows as in Layout
    Layout layout;
    std::vector<std::string> control_names;  // controls then H-row slacks
    std::vector<std::string> state_names;
    std::vector<std::string> row_names;      // dynamics rows then H rows
};

// Without `reduced` every block is kept; with it only residual blocks get
// beta/gamma columns and absorbed entries move into the nominal matrix.
RcProblem build_sclp_rc(const SclpData& d, const robust::ReducedProblem* reduced = nullptr,
                        bool objective_uncertainty = true);
RcProblem build_sclp_rc(const FluidNetwork& net, const robust::ReducedProblem* reduced = nullptr,
                        bool objective_uncertainty = true);
RcProblem build_sclp_rc(const SclpData& d, const robust::RobustModel& m, bool full);

// Robust counterpart of Rates-LP(K*, J*) in equality form with slacks v, r,
// and its dual with multipliers p, q_dot, delta, delta_0, y, y_0, omega, omega_0.
struct RatesRc {
    lp::Instance primal, dual;
    std::vector<std::string> primal_cols, primal_rows, dual_cols, dual_rows;
};

RatesRc build_rates_rc(const SclpData& d, const IndexList& Kstar, const IndexList& Jstar,
                       bool objective_uncertainty = true);

struct DimensionReport {
    long long eq2_form = 0;     // (K+1)(J+I)+1
    long long no_routing = 0;   // K(K+I)
    long long before = 0;       // beta/gamma variables without reduction
    long long after = 0;        // with reduction
    double relative_reduction() const;  // percent
    nlohmann::json to_json() const;
};

DimensionReport dimension_report(const SclpData& d, bool objective_uncertainty = false);

}  // namespace sclp::rc
