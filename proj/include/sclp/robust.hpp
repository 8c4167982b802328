#pragma once

#include "sclp/common.hpp"
#include "sclp/lp.hpp"
#include "sclp/model.hpp"
#include "sclp/sclp.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sclp::robust {

struct ReducedProblem {
    Mat G_star;                     // K x J, box-absorbed nominal matrix
    Vec c_star;                     // objective with absorbed entries
    std::vector<IndexList> R;       // residual flows per buffer
    IndexList R0;                   // residual objective flows
    Mat counts;                     // K x I, N_{i,k} = #{j on i : G_tilde_kj > 0}
    Vec counts0;                    // I, same for the objective row
    Mat G_tilde;                    // originals
    Vec c_tilde;

    // residual (k, i) blocks; the objective row uses k = -1
    bool residual_block(int k, int i) const;
    std::vector<std::vector<char>> residual;  // K x I
    std::vector<char> residual0;              // I
};

ReducedProblem reduce(const SclpData& d, bool objective_uncertainty = true);
ReducedProblem reduce(const FluidNetwork& net, const SclpData& d, bool objective_uncertainty = true);

// Worst-case realization of row o eta over the per-server budgets.
// Ties go to the lowest flow index.
Vec worst_case_xi(const Vec& row, const Vec& eta, const std::vector<double>& budgets, const IndexList& server);

// Budget-dual certificate of the inner maximum for one server block:
// beta = the ceil(Gamma)-th largest positive value, gamma_j = max(0, w_j - beta).
struct BudgetDual {
    double beta = 0;
    Vec gamma;  // indexed like the input block
};
BudgetDual budget_dual(const Vec& w, double Gamma);

// Data the cutting-plane master works on: either the raw uncertain problem
// or the reduced one (absorbed entries folded into G_nom / c_nom).
struct RobustModel {
    Mat G_nom, G_unc;   // K x J
    Vec c_nom, c_unc;   // J
    Mat H;
    Vec a, b;
    IndexList server;
    std::vector<double> budgets;
    // raw data for the dual mapping
    Mat G_bar, G_tilde;
    Vec c_bar, c_tilde;
    std::vector<std::vector<char>> absorbed;  // K x J: entry folded into G_nom
    std::vector<char> absorbed0;              // J

    int K() const { return static_cast<int>(G_nom.rows()); }
    int J() const { return static_cast<int>(G_nom.cols()); }
    int I() const { return static_cast<int>(H.rows()); }
    bool objective_uncertain() const;

    static RobustModel raw(const SclpData& d, bool objective_uncertainty = true);
    static RobustModel reduced(const SclpData& d, const ReducedProblem& r);

    // Xi on the raw problem: residual part from `xi`, absorbed eligible entries at 1.
    Vec full_xi(int k, const Vec& xi) const;
    Vec full_xi0(const Vec& xi) const;
};

struct CutPool {
    std::vector<std::vector<Vec>> xi;  // per buffer; entry 0 is the nominal (zero) realization
    std::vector<Vec> xi_obj;           // objective realizations; entry 0 nominal

    CutPool() = default;
    CutPool(int K, int J);
    bool add(int k, const Vec& x);          // false if already present
    bool add_objective(const Vec& x);
    int size() const;
};

struct RobustRatesSolution {
    Vec eta;        // J + I (flows then capacity slacks)
    Vec xdot;       // K, robust slopes
    double objective = 0;
    Vec qdot;       // J + I reduced costs of the master
    // master duals
    std::vector<std::vector<double>> p;  // p[k][l] over pool entries included for k
    std::vector<double> pi;              // objective-row multipliers
    Vec q_cap;                           // I capacity-row duals
    // worst cases at eta*
    std::vector<Vec> xi_worst;           // per buffer
    Vec xi_obj_worst;
    Vec c_eff;                           // J + I
    // mapped dual of the Rates-LP robust counterpart
    Vec p_prime;
    Mat delta, y, omega;                 // K x J, K x J, K x I
    Vec delta0, y0, omega0;              // J, J, I
    // primal certificate
    Mat beta, gamma;                     // K x I, K x J
    Vec beta0, gamma0;                   // I, J
    // bookkeeping
    IndexList K_in, J_in;
    IndexList basic_controls;            // eta_j / s_i basic in the master
    std::vector<std::uint64_t> semantic_basis;  // master columns, pool-independent keys
    std::vector<std::uint64_t> semantic_rows;   // cut / objective rows present in the master
    lp::Basis basis;
    int rounds = 0;
    int cuts_added = 0;
};

// Cutting planes for the robust Rates-LP with sign pattern (K*, J*).
// New worst-case rows go into `pool`; `warm` seeds the master basis.
RobustRatesSolution cutting_planes_rates(const RobustModel& m, const IndexList& Kstar, const IndexList& Jstar,
                                         CutPool& pool, const RobustRatesSolution* warm = nullptr,
                                         const Tolerances& tol = default_tolerances());

// Maps master duals to the dual of the robust Rates-LP and builds the primal
// (beta, gamma) certificate; fills the mapped fields of `s`.
void map_dual(const RobustModel& m, const CutPool& pool, RobustRatesSolution& s);

// Rates-LP provider for the sweep on the robust counterpart. Each Rates-LP of
// the counterpart is solved by the simplex method; cutting planes then run on
// the same sign pattern and, when their objective agrees, the cut pool, the
// mapped duals and the budget certificates are attached to the interval.
class RobustRates : public RatesSolver {
public:
    RobustRates(const RobustModel& m, const SclpProblem& rc, const Tolerances& tol = default_tolerances());
    IntervalBasis solve(const IndexList& K, const IndexList& J, const IntervalBasis* warm) override;
    std::optional<IntervalBasis> from_basis(const IndexList& basic, const IndexList& J) override;
    int num_controls() const override { return nominal_.num_controls(); }
    int num_states() const override { return nominal_.num_states(); }
    const CutPool& pool() const { return pool_; }
    int cut_solves() const { return cut_solves_; }
    int skipped() const { return skipped_; }

private:
    bool attach(IntervalBasis& b, const IntervalBasis* warm);

    RobustModel m_;
    NominalRates nominal_;
    CutPool pool_;
    Tolerances tol_;
    int slack_offset_ = 0;
    int cut_solves_ = 0;
    int skipped_ = 0;
};

struct RobustOptions {
    bool use_reduction = true;
    bool objective_uncertainty = true;
};

RobustModel robust_model(const SclpData& d, const RobustOptions& opt = {});

// Robust counterpart SCLP the robust sweep runs on (reduced when requested).
SclpProblem robust_counterpart(const SclpData& d, const RobustOptions& opt = {});

// Controls of the returned solution are those of robust_counterpart(d, opt);
// the first J are eta.
SclpSolution robust_sclp_simplex(const SclpData& d, double T, const RobustOptions& opt = {},
                                 const Tolerances& tol = default_tolerances());
SclpSolution robust_sclp_simplex(const FluidNetwork& net, double T, const RobustOptions& opt = {});

// Optimality checks against the robust counterpart, worst-case feasibility of
// eta, and per-interval consistency of the cutting-plane results. Without
// `require_cuts`, a solution with no cutting-plane results skips the last part.
OptimalityReport verify_robust(const SclpData& d, const SclpSolution& s, const RobustOptions& opt = {},
                               bool require_cuts = true);

nlohmann::json robust_extras_to_json(const SclpSolution& s);

}  // namespace sclp::robust

namespace sclp {

struct RobustIntervalInfo {
    robust::RobustRatesSolution rates;
    std::vector<std::vector<Vec>> cuts;  // per buffer: realizations present in the master
    std::vector<Vec> objective_cuts;
};

}  // namespace sclp
