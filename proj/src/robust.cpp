#include "sclp/robust.hpp"
#include "sclp/rc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sclp::robust {

namespace {

std::string set_str(const IndexList& s) {
    std::ostringstream os;
    os << '{';
    for (size_t t = 0; t < s.size(); ++t) os << (t ? "," : "") << s[t];
    os << '}';
    return os.str();
}

bool same_vec(const Vec& a, const Vec& b) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= 1e-12;
}

// Semantic master-LP column keys, stable across re-solves with different pools.
enum ColKind : std::uint64_t { kControl = 0, kState = 1, kEpigraph = 2, kCutSlack = 3, kObjSlack = 4 };

std::uint64_t key(ColKind t, std::uint64_t a = 0, std::uint64_t b = 0) { return (std::uint64_t(t) << 56) | (a << 28) | b; }

}  // namespace

// ---- reduction ----

bool ReducedProblem::residual_block(int k, int i) const {
    if (k < 0) return residual0[i] != 0;
    return residual[k][i] != 0;
}

ReducedProblem reduce(const SclpData& d, bool objective_uncertainty) {
    const int K = d.K(), J = d.J(), I = d.I();
    ReducedProblem r;
    r.G_star = d.G_bar;
    r.c_star = d.c_bar;
    r.G_tilde = d.G_tilde;
    r.c_tilde = objective_uncertainty ? d.c_tilde : Vec(Vec::Zero(J));
    r.counts = Mat::Zero(K, I);
    r.counts0 = Vec::Zero(I);
    r.R.assign(K, {});
    r.residual.assign(K, std::vector<char>(I, 0));
    r.residual0.assign(I, 0);
    for (int j = 0; j < J; ++j) {
        for (int k = 0; k < K; ++k)
            if (r.G_tilde(k, j) > 0) r.counts(k, d.server[j]) += 1;
        if (r.c_tilde(j) > 0) r.counts0(d.server[j]) += 1;
    }
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < I; ++i) r.residual[k][i] = r.counts(k, i) > d.budgets[i];
    for (int i = 0; i < I; ++i) r.residual0[i] = r.counts0(i) > d.budgets[i];
    for (int j = 0; j < J; ++j) {
        const int i = d.server[j];
        for (int k = 0; k < K; ++k) {
            if (r.G_tilde(k, j) <= 0) continue;
            if (r.residual[k][i]) r.R[k].push_back(j);
            else r.G_star(k, j) += r.G_tilde(k, j);
        }
        if (r.c_tilde(j) > 0) {
            if (r.residual0[i]) r.R0.push_back(j);
            else r.c_star(j) -= r.c_tilde(j);
        }
    }
    return r;
}

ReducedProblem reduce(const FluidNetwork&, const SclpData& d, bool objective_uncertainty) {
    return reduce(d, objective_uncertainty);
}

// ---- inner maximization ----

Vec worst_case_xi(const Vec& row, const Vec& eta, const std::vector<double>& budgets, const IndexList& server) {
    const int J = static_cast<int>(row.size());
    Vec xi = Vec::Zero(J);
    for (int i = 0; i < static_cast<int>(budgets.size()); ++i) {
        IndexList el;
        for (int j = 0; j < J; ++j)
            if (server[j] == i && row(j) > 0 && row(j) * eta(j) > 0) el.push_back(j);
        std::stable_sort(el.begin(), el.end(),
                         [&](int p, int q) { return row(p) * eta(p) > row(q) * eta(q); });
        const double G = budgets[i];
        const int whole = static_cast<int>(std::floor(G + 1e-12));
        const double frac = G - whole;
        for (int t = 0; t < static_cast<int>(el.size()); ++t) {
            if (t < whole) xi(el[t]) = 1.0;
            else if (t == whole && frac > 1e-12) xi(el[t]) = frac;
        }
    }
    return xi;
}

BudgetDual budget_dual(const Vec& w, double Gamma) {
    BudgetDual out;
    out.gamma = Vec::Zero(w.size());
    std::vector<double> pos;
    for (Eigen::Index t = 0; t < w.size(); ++t)
        if (w(t) > 0) pos.push_back(w(t));
    std::sort(pos.begin(), pos.end(), std::greater<>());
    const int need = static_cast<int>(std::ceil(Gamma - 1e-12));
    if (pos.empty()) out.beta = 0;
    else if (need == 0) out.beta = pos.front();
    else if (static_cast<int>(pos.size()) < need) out.beta = 0;
    else out.beta = pos[need - 1];
    for (Eigen::Index t = 0; t < w.size(); ++t) out.gamma(t) = std::max(0.0, w(t) - out.beta);
    return out;
}

// ---- model ----

bool RobustModel::objective_uncertain() const { return c_unc.size() && c_unc.maxCoeff() > 0; }

RobustModel RobustModel::raw(const SclpData& d, bool objective_uncertainty) {
    RobustModel m;
    const int K = d.K(), J = d.J();
    m.G_nom = d.G_bar;
    m.G_unc = d.G_tilde;
    m.c_nom = d.c_bar;
    m.c_unc = objective_uncertainty ? d.c_tilde : Vec(Vec::Zero(J));
    m.H = d.H;
    m.a = d.a;
    m.b = d.b;
    m.server = d.server;
    m.budgets = d.budgets;
    m.G_bar = d.G_bar;
    m.G_tilde = d.G_tilde;
    m.c_bar = d.c_bar;
    m.c_tilde = m.c_unc;
    m.absorbed.assign(K, std::vector<char>(J, 0));
    m.absorbed0.assign(J, 0);
    return m;
}

RobustModel RobustModel::reduced(const SclpData& d, const ReducedProblem& r) {
    RobustModel m = raw(d, r.c_tilde.size() && r.c_tilde.maxCoeff() > 0);
    const int K = d.K(), J = d.J();
    m.c_tilde = r.c_tilde;
    m.G_nom = r.G_star;
    m.c_nom = r.c_star;
    m.G_unc = Mat::Zero(K, J);
    m.c_unc = Vec::Zero(J);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) {
            if (d.G_tilde(k, j) <= 0) continue;
            if (contains(r.R[k], j)) m.G_unc(k, j) = d.G_tilde(k, j);
            else m.absorbed[k][j] = 1;
        }
    for (int j = 0; j < J; ++j) {
        if (r.c_tilde(j) <= 0) continue;
        if (contains(r.R0, j)) m.c_unc(j) = r.c_tilde(j);
        else m.absorbed0[j] = 1;
    }
    return m;
}

Vec RobustModel::full_xi(int k, const Vec& xi) const {
    Vec out = xi;
    for (int j = 0; j < J(); ++j)
        if (absorbed[k][j]) out(j) = 1.0;
    return out;
}

Vec RobustModel::full_xi0(const Vec& xi) const {
    Vec out = xi;
    for (int j = 0; j < J(); ++j)
        if (absorbed0[j]) out(j) = 1.0;
    return out;
}

// ---- cut pool ----

CutPool::CutPool(int K, int J) : xi(K, std::vector<Vec>{Vec::Zero(J)}), xi_obj{Vec::Zero(J)} {}

bool CutPool::add(int k, const Vec& x) {
    for (const auto& v : xi[k])
        if (same_vec(v, x)) return false;
    xi[k].push_back(x);
    return true;
}

bool CutPool::add_objective(const Vec& x) {
    for (const auto& v : xi_obj)
        if (same_vec(v, x)) return false;
    xi_obj.push_back(x);
    return true;
}

int CutPool::size() const {
    int n = static_cast<int>(xi_obj.size()) - 1;
    for (const auto& v : xi) n += static_cast<int>(v.size()) - 1;
    return n;
}

// ---- cutting planes ----

namespace {

struct Master {
    lp::Instance lp;
    std::vector<std::uint64_t> keys;   // per column
    std::vector<std::pair<int, int>> cut_rows;  // (k, l) per cut row, after the K+I base rows
    int obj_row0 = -1;                 // first objective row, -1 when absent
    int z_col = -1;
};

Master build_master(const RobustModel& m, const IndexList& Kstar, const IndexList& Jstar, const CutPool& pool) {
    const int K = m.K(), J = m.J(), I = m.I();
    const bool obj = m.objective_uncertain();
    Master M;
    for (int k = 0; k < K; ++k)
        if (!contains(Kstar, k))
            for (int l = 1; l < static_cast<int>(pool.xi[k].size()); ++l) M.cut_rows.push_back({k, l});
    const int C = static_cast<int>(M.cut_rows.size());
    const int Mo = obj ? static_cast<int>(pool.xi_obj.size()) : 0;
    const int rows = K + I + C + Mo;
    const int cols = J + I + K + (obj ? 1 : 0) + C + Mo;
    auto& lp = M.lp;
    lp.A = Mat::Zero(rows, cols);
    lp.rhs = Vec::Zero(rows);
    lp.objective = Vec::Zero(cols);
    lp.sense = lp::Sense::Max;
    lp.signs.assign(cols, lp::Sign::Nonneg);
    M.keys.resize(cols);

    for (int c = 0; c < J + I; ++c) {
        M.keys[c] = key(kControl, c);
        if (contains(Jstar, c)) lp.signs[c] = lp::Sign::Zero;
    }
    for (int k = 0; k < K; ++k) {
        const int col = J + I + k;
        M.keys[col] = key(kState, k);
        if (contains(Kstar, k)) lp.signs[col] = lp::Sign::Free;
        lp.A.row(k).head(J) = m.G_nom.row(k);
        lp.A(k, col) = 1.0;
        lp.rhs(k) = m.a(k);
    }
    for (int i = 0; i < I; ++i) {
        lp.A.row(K + i).head(J) = m.H.row(i);
        lp.A(K + i, J + i) = 1.0;
        lp.rhs(K + i) = m.b(i);
    }
    int col = J + I + K;
    if (obj) {
        M.z_col = col;
        M.keys[col] = key(kEpigraph);
        lp.signs[col] = lp::Sign::Free;
        lp.objective(col) = 1.0;
        ++col;
    } else {
        lp.objective.head(J) = m.c_nom;
    }
    for (int t = 0; t < C; ++t, ++col) {
        auto [k, l] = M.cut_rows[t];
        const int r = K + I + t;
        lp.A.row(r).head(J) = m.G_nom.row(k) + m.G_unc.row(k).cwiseProduct(pool.xi[k][l].transpose());
        lp.A(r, col) = 1.0;
        lp.rhs(r) = m.a(k);
        M.keys[col] = key(kCutSlack, k, l);
    }
    if (obj) {
        M.obj_row0 = K + I + C;
        for (int t = 0; t < Mo; ++t, ++col) {
            const int r = M.obj_row0 + t;
            lp.A.row(r).head(J) = -(m.c_nom - m.c_unc.cwiseProduct(pool.xi_obj[t])).transpose();
            lp.A(r, M.z_col) = 1.0;
            lp.A(r, col) = 1.0;
            M.keys[col] = key(kObjSlack, t);
        }
    }
    return M;
}

// Semantic basis to column indices of `M`; empty when the sizes do not match.
lp::Basis translate(const Master& M, const std::vector<std::uint64_t>& sem) {
    lp::Basis b;
    const int rows = M.lp.rows();
    std::vector<char> in(M.keys.size(), 0);
    for (auto s : sem)
        for (size_t c = 0; c < M.keys.size(); ++c)
            if (M.keys[c] == s) {
                in[c] = 1;
                break;
            }
    for (size_t c = 0; c < in.size(); ++c)
        if (in[c]) b.basic.push_back(static_cast<int>(c));
    if (static_cast<int>(b.basic.size()) != rows) b.basic.clear();
    return b;
}

}  // namespace

RobustRatesSolution cutting_planes_rates(const RobustModel& m, const IndexList& Kstar, const IndexList& Jstar,
                                         CutPool& pool, const RobustRatesSolution* warm, const Tolerances& tol) {
    const int K = m.K(), J = m.J(), I = m.I();
    if (static_cast<int>(pool.xi.size()) != K) pool = CutPool(K, J);
    const bool obj = m.objective_uncertain();
    const int cap = (J + 1) * (K + 1) * 4;

    std::vector<std::uint64_t> sem, sem_rows;
    if (warm) {
        sem = warm->semantic_basis;
        sem_rows = warm->semantic_rows;
    }

    RobustRatesSolution s;
    s.K_in = Kstar;
    s.J_in = Jstar;
    Master M;
    lp::Result r;
    for (int round = 0;; ++round) {
        if (round > cap)
            throw SolverError("cutting planes: iteration cap exceeded for K*=" + set_str(Kstar) +
                              ", J*=" + set_str(Jstar));
        M = build_master(m, Kstar, Jstar, pool);
        lp::Basis wb;
        if (!sem.empty()) {
            // rows new relative to the warm master enter with their slack basic
            std::vector<std::uint64_t> ext = sem;
            for (auto kk : M.keys) {
                auto kind = kk >> 56;
                if ((kind == kCutSlack || kind == kObjSlack) &&
                    std::find(sem_rows.begin(), sem_rows.end(), kk) == sem_rows.end())
                    ext.push_back(kk);
            }
            wb = translate(M, ext);
        }
        r = lp::solve(M.lp, wb.basic.empty() ? nullptr : &wb, tol);
        if (r.status == lp::Status::Infeasible)
            throw RobustInfeasibleError("robust Rates-LP infeasible for K*=" + set_str(Kstar) + ", J*=" + set_str(Jstar));
        if (r.status != lp::Status::Optimal)
            throw SolverError(std::string("robust Rates-LP master is ") + lp::to_string(r.status));
        s.rounds = round + 1;
        sem.clear();
        for (int c : r.basis.basic) sem.push_back(M.keys[c]);
        sem_rows.clear();
        for (auto kk : M.keys)
            if ((kk >> 56) == kCutSlack || (kk >> 56) == kObjSlack) sem_rows.push_back(kk);

        Vec eta = r.x.head(J).cwiseMax(0.0);
        bool added = false;
        for (int k = 0; k < K; ++k) {
            if (contains(Kstar, k)) continue;
            Vec xi = worst_case_xi(m.G_unc.row(k).transpose(), eta, m.budgets, m.server);
            double lhs = (m.G_nom.row(k).transpose() + m.G_unc.row(k).transpose().cwiseProduct(xi)).dot(eta);
            if (lhs > m.a(k) + 1e-9) {
                if (pool.add(k, xi)) {
                    added = true;
                    ++s.cuts_added;
                } else if (lhs > m.a(k) + 1e-7) {
                    throw SolverError("cutting planes: pooled cut violated for buffer " + std::to_string(k));
                }
            }
        }
        if (obj) {
            Vec xi = worst_case_xi(m.c_unc, eta, m.budgets, m.server);
            double val = (m.c_nom - m.c_unc.cwiseProduct(xi)).dot(eta);
            if (val < r.x(M.z_col) - 1e-9) {
                if (pool.add_objective(xi)) {
                    added = true;
                    ++s.cuts_added;
                } else if (val < r.x(M.z_col) - 1e-7) {
                    throw SolverError("cutting planes: pooled objective cut violated");
                }
            }
        }
        if (!added) break;
    }

    s.semantic_basis = sem;
    s.semantic_rows = sem_rows;
    s.basis = r.basis;
    s.eta = r.x.head(J + I);
    for (int c = 0; c < J + I; ++c)
        if (std::abs(s.eta(c)) < 1e-14) s.eta(c) = 0;
    Vec eta = s.eta.head(J).cwiseMax(0.0);
    s.qdot = r.reduced.head(J + I);
    s.q_cap = r.y.segment(K, I);

    s.xi_worst.resize(K);
    s.xdot = Vec(K);
    for (int k = 0; k < K; ++k) {
        // the final worst case is the minimizing realization over the pool plus itself
        s.xi_worst[k] = worst_case_xi(m.G_unc.row(k).transpose(), eta, m.budgets, m.server);
        s.xdot(k) = m.a(k) - (m.G_nom.row(k).transpose() + m.G_unc.row(k).transpose().cwiseProduct(s.xi_worst[k])).dot(eta);
    }
    s.xi_obj_worst = worst_case_xi(m.c_unc, eta, m.budgets, m.server);
    s.c_eff = Vec::Zero(J + I);
    s.c_eff.head(J) = m.c_nom - m.c_unc.cwiseProduct(s.xi_obj_worst);
    s.objective = s.c_eff.head(J).dot(eta);

    s.p.assign(K, {});
    for (int k = 0; k < K; ++k) s.p[k].push_back(r.y(k));
    for (size_t t = 0; t < M.cut_rows.size(); ++t) {
        auto [k, l] = M.cut_rows[t];
        if (static_cast<int>(s.p[k].size()) <= l) s.p[k].resize(l + 1, 0.0);
        s.p[k][l] = r.y(K + I + static_cast<int>(t));
    }
    s.pi.clear();
    if (obj)
        for (int t = 0; t < static_cast<int>(pool.xi_obj.size()); ++t) s.pi.push_back(r.y(M.obj_row0 + t));
    else
        s.pi.push_back(1.0);

    for (int c : r.basis.basic)
        if (c < J + I) s.basic_controls.push_back(c);
    std::sort(s.basic_controls.begin(), s.basic_controls.end());
    map_dual(m, pool, s);
    return s;
}

void map_dual(const RobustModel& m, const CutPool& pool, RobustRatesSolution& s) {
    const int K = m.K(), J = m.J(), I = m.I();
    Vec eta = s.eta.head(J).cwiseMax(0.0);
    s.p_prime = Vec::Zero(K);
    s.delta = Mat::Zero(K, J);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < static_cast<int>(s.p[k].size()); ++l) {
            double pk = s.p[k][l];
            s.p_prime(k) += pk;
            if (pk != 0) s.delta.row(k) += pk * m.full_xi(k, pool.xi[k][l]).transpose();
        }
    // only eligible (G_tilde > 0) entries carry multipliers
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j)
            if (m.G_tilde(k, j) <= 0) s.delta(k, j) = 0;
    s.delta0 = Vec::Zero(J);
    for (int t = 0; t < static_cast<int>(s.pi.size()); ++t)
        if (s.pi[t] != 0) s.delta0 += s.pi[t] * m.full_xi0(pool.xi_obj[t]);
    for (int j = 0; j < J; ++j)
        if (m.c_tilde(j) <= 0) s.delta0(j) = 0;

    s.y = Mat(K, J);
    s.omega = Mat::Zero(K, I);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) s.y(k, j) = s.p_prime(k) - s.delta(k, j);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < I; ++i) s.omega(k, i) = m.budgets[i] * s.p_prime(k);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) s.omega(k, m.server[j]) -= s.delta(k, j);
    s.y0 = Vec::Ones(J) - s.delta0;
    s.omega0 = Vec(I);
    for (int i = 0; i < I; ++i) s.omega0(i) = m.budgets[i];
    for (int j = 0; j < J; ++j) s.omega0(m.server[j]) -= s.delta0(j);

    // primal certificate from the budget dual of each server block
    s.beta = Mat::Zero(K, I);
    s.gamma = Mat::Zero(K, J);
    s.beta0 = Vec::Zero(I);
    s.gamma0 = Vec::Zero(J);
    for (int i = 0; i < I; ++i) {
        IndexList flows;
        for (int j = 0; j < J; ++j)
            if (m.server[j] == i) flows.push_back(j);
        Vec w(flows.size());
        for (int k = 0; k < K; ++k) {
            for (size_t t = 0; t < flows.size(); ++t) w(t) = m.G_tilde(k, flows[t]) * eta(flows[t]);
            auto bd = budget_dual(w, m.budgets[i]);
            s.beta(k, i) = bd.beta;
            for (size_t t = 0; t < flows.size(); ++t) s.gamma(k, flows[t]) = bd.gamma(t);
        }
        for (size_t t = 0; t < flows.size(); ++t) w(t) = m.c_tilde(flows[t]) * eta(flows[t]);
        auto bd = budget_dual(w, m.budgets[i]);
        s.beta0(i) = bd.beta;
        for (size_t t = 0; t < flows.size(); ++t) s.gamma0(flows[t]) = bd.gamma(t);
    }
}

// ---- robust Rates-LP provider ----

RobustRates::RobustRates(const RobustModel& m, const SclpProblem& rc, const Tolerances& tol)
    : m_(m), nominal_(rc, tol), pool_(m.K(), m.J()), tol_(tol), slack_offset_(rc.J()) {}

bool RobustRates::attach(IntervalBasis& b, const IntervalBasis* warm) {
    const int J = m_.J(), I = m_.I();
    // counterpart controls: eta, protection variables, then the H-row slacks
    // led by the capacity slacks; protection restrictions are not passed on
    IndexList Kstar, Jstar;
    for (int k : b.K_in)
        if (k < m_.K()) Kstar.push_back(k);
    for (int j : b.J_in) {
        if (j < J) Jstar.push_back(j);
        else if (j >= slack_offset_ && j < slack_offset_ + I) Jstar.push_back(J + j - slack_offset_);
    }
    const RobustRatesSolution* w = warm && warm->robust ? &warm->robust->rates : nullptr;
    auto info = std::make_shared<RobustIntervalInfo>();
    try {
        info->rates = cutting_planes_rates(m_, Kstar, Jstar, pool_, w, tol_);
    } catch (const SolverError&) {
        ++skipped_;
        return false;
    }
    ++cut_solves_;
    const double rc_obj = b.c_eff.dot(b.u);
    if (std::abs(rc_obj - info->rates.objective) > 1e-8 * std::max(1.0, std::abs(rc_obj))) {
        ++skipped_;
        return false;
    }
    const auto& r = info->rates;
    info->cuts.resize(m_.K());
    for (int k = 0; k < m_.K(); ++k)
        for (size_t l = 0; l < r.p[k].size() && l < pool_.xi[k].size(); ++l) info->cuts[k].push_back(pool_.xi[k][l]);
    for (size_t t = 0; t < r.pi.size() && t < pool_.xi_obj.size(); ++t) info->objective_cuts.push_back(pool_.xi_obj[t]);
    b.robust = info;
    return true;
}

IntervalBasis RobustRates::solve(const IndexList& K, const IndexList& J, const IntervalBasis* warm) {
    IntervalBasis b = nominal_.solve(K, J, warm);
    attach(b, warm);
    return b;
}

std::optional<IntervalBasis> RobustRates::from_basis(const IndexList& basic, const IndexList& J) {
    auto b = nominal_.from_basis(basic, J);
    if (b) attach(*b, nullptr);
    return b;
}

RobustModel robust_model(const SclpData& d, const RobustOptions& opt) {
    return opt.use_reduction ? RobustModel::reduced(d, reduce(d, opt.objective_uncertainty))
                             : RobustModel::raw(d, opt.objective_uncertainty);
}

SclpProblem robust_counterpart(const SclpData& d, const RobustOptions& opt) {
    return rc::build_sclp_rc(d, robust_model(d, opt), false).problem;
}

SclpSolution robust_sclp_simplex(const SclpData& d, double T, const RobustOptions& opt, const Tolerances& tol) {
    RobustModel m = robust_model(d, opt);
    SclpProblem p = rc::build_sclp_rc(d, m, false).problem;
    p.T = T;
    auto bnd = solve_boundary(p, tol);
    RobustRates rates(m, p, tol);
    auto s = parametric_simplex(p, rates, bnd, tol);
    s.robust = true;
    return s;
}

SclpSolution robust_sclp_simplex(const FluidNetwork& net, double T, const RobustOptions& opt) {
    return robust_sclp_simplex(build_matrices(net), T, opt);
}

// ---- verification ----

OptimalityReport verify_robust(const SclpData& d, const SclpSolution& s, const RobustOptions& opt, bool require_cuts) {
    SclpProblem p = robust_counterpart(d, opt);
    p.T = s.T;
    OptimalityReport rep = verify_optimality(p, s);
    const int K = d.K(), J = d.J(), I = d.I();
    RobustModel raw = RobustModel::raw(d, opt.objective_uncertainty);

    // worst-case states of eta over the full uncertainty set
    double worst_x = 0, cap = 0;
    Vec x = d.alpha;
    for (size_t n = 0; n < s.bases.size(); ++n) {
        Vec eta = s.bases[n].u.head(J).cwiseMax(0.0);
        cap = std::max(cap, (d.H * eta - d.b).maxCoeff());
        for (int k = 0; k < K; ++k) {
            Vec xi = worst_case_xi(d.G_tilde.row(k).transpose(), eta, d.budgets, d.server);
            double rate = d.a(k) - (d.G_bar.row(k).transpose() + d.G_tilde.row(k).transpose().cwiseProduct(xi)).dot(eta);
            x(k) += rate * s.tau(n);
        }
        worst_x = std::min(worst_x, x.minCoeff());
    }
    rep.checks.push_back({"worst-case states nonnegative", worst_x >= -1e-9, worst_x});
    rep.checks.push_back({"robust controls within capacity", cap <= 1e-9, cap});

    double agree = 0, dual_viol = 0, dual_gap = 0, cert = 0;
    int attached = 0;
    for (const auto& b : s.bases) {
        if (!b.robust) continue;
        ++attached;
        const auto& r = b.robust->rates;
        const double rc_obj = b.c_eff.dot(b.u);
        agree = std::max(agree, std::abs(rc_obj - r.objective) / std::max(1.0, std::abs(rc_obj)));
        // dual feasibility of the mapped multipliers
        for (int j = 0; j < J; ++j) {
            double lhs = d.G_bar.col(j).dot(r.p_prime) + d.G_tilde.col(j).dot(r.delta.col(j)) +
                         raw.c_tilde(j) * r.delta0(j) + d.H.col(j).dot(r.q_cap) - d.c_bar(j);
            if (!contains(r.J_in, j)) dual_viol = std::max(dual_viol, -lhs);
            dual_viol = std::max(dual_viol, std::abs(lhs - r.qdot(j)));
        }
        for (int k = 0; k < K; ++k) {
            if (contains(r.K_in, k)) dual_viol = std::max(dual_viol, std::abs(r.p_prime(k)));
            else dual_viol = std::max(dual_viol, -r.p_prime(k));
        }
        if (r.y.size()) dual_viol = std::max(dual_viol, -r.y.minCoeff());
        if (r.omega.size()) dual_viol = std::max(dual_viol, -r.omega.minCoeff());
        if (r.delta.size()) dual_viol = std::max(dual_viol, -r.delta.minCoeff());
        if (raw.objective_uncertain())
            dual_viol = std::max({dual_viol, -r.y0.minCoeff(), -r.omega0.minCoeff(), -r.delta0.minCoeff()});
        for (int i = 0; i < I; ++i)
            if (!contains(r.J_in, J + i)) dual_viol = std::max(dual_viol, -r.q_cap(i));
        double dobj = d.a.dot(r.p_prime) + d.b.dot(r.q_cap);
        dual_gap = std::max(dual_gap, std::abs(dobj - r.objective) / std::max(1.0, std::abs(r.objective)));
        // primal certificate reproduces the cutting-plane slopes
        Vec eta = r.eta.head(J).cwiseMax(0.0);
        for (int k = 0; k < K; ++k) {
            double prot = 0;
            for (int i = 0; i < I; ++i) prot += d.budgets[i] * r.beta(k, i);
            prot += r.gamma.row(k).sum();
            double xd = d.a(k) - d.G_bar.row(k).dot(eta) - prot;
            cert = std::max(cert, std::abs(xd - r.xdot(k)));
        }
    }
    // solutions read back from a file carry no cutting-plane results
    if (attached == 0 && !require_cuts) return rep;
    rep.checks.push_back({"cutting-plane objective equals counterpart Rates-LP objective", agree <= 1e-8, agree});
    rep.checks.push_back({"mapped duals feasible for the robust Rates-LP dual", dual_viol <= 1e-7, dual_viol});
    rep.checks.push_back({"mapped dual objective equals cutting-plane objective", dual_gap <= 1e-8, dual_gap});
    rep.checks.push_back({"budget certificates reproduce cutting-plane slopes", cert <= 1e-8, cert});
    rep.checks.push_back({"intervals with cutting-plane results", attached > 0 || s.bases.empty(),
                          static_cast<double>(attached)});
    return rep;
}

nlohmann::json robust_extras_to_json(const SclpSolution& s) {
    using nlohmann::json;
    json cuts = json::array(), certs = json::array();
    for (const auto& b : s.bases) {
        if (!b.robust) {
            cuts.push_back(json::array());
            certs.push_back(nullptr);
            continue;
        }
        const auto& r = b.robust->rates;
        json per = json::array(), rows = json::array(), obj = json::array();
        for (const auto& xi : r.xi_worst) per.push_back(vec_to_json(xi));
        for (const auto& list : b.robust->cuts) {
            json l = json::array();
            for (const auto& xi : list) l.push_back(vec_to_json(xi));
            rows.push_back(l);
        }
        for (const auto& xi : b.robust->objective_cuts) obj.push_back(vec_to_json(xi));
        json c = json::object();
        c["constraints"] = rows;
        c["objective"] = obj;
        c["worst_case"] = per;
        c["objective_worst_case"] = vec_to_json(r.xi_obj_worst);
        c["rounds"] = r.rounds;
        c["cuts_added"] = r.cuts_added;
        cuts.push_back(c);
        certs.push_back(json{{"beta", mat_to_json(r.beta)},
                         {"gamma", mat_to_json(r.gamma)},
                         {"beta0", vec_to_json(r.beta0)},
                         {"gamma0", vec_to_json(r.gamma0)},
                         {"p_prime", vec_to_json(r.p_prime)},
                         {"delta", mat_to_json(r.delta)},
                         {"delta0", vec_to_json(r.delta0)}});
    }
    return {{"cuts", cuts}, {"rc_certificates", certs}};
}

}  // namespace sclp::robust
