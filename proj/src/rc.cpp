#include "sclp/rc.hpp"

#include <string>

namespace sclp::rc {

namespace {

std::string sub(const std::string& s, int a) { return s + "_" + std::to_string(a + 1); }
std::string sub(const std::string& s, int a, int b) {
    return s + "_{" + std::to_string(a + 1) + "," + std::to_string(b + 1) + "}";
}
std::string sub(const std::string& s, int a, int b, int c) {
    return s + "_{" + std::to_string(a + 1) + "," + std::to_string(b + 1) + "," + std::to_string(c + 1) + "}";
}
std::string sub0(const std::string& s, int a) { return s + "_{0," + std::to_string(a + 1) + "}"; }
std::string sub0(const std::string& s, int a, int b) {
    return s + "_{0," + std::to_string(a + 1) + "," + std::to_string(b + 1) + "}";
}

Layout make_layout(const robust::RobustModel& m, bool full, bool objective) {
    Layout L;
    L.K = m.K();
    L.J = m.J();
    L.I = m.I();
    for (int k = 0; k < L.K; ++k)
        for (int i = 0; i < L.I; ++i) {
            IndexList js;
            for (int j = 0; j < L.J; ++j)
                if (m.server[j] == i && (full || m.G_unc(k, j) > 0)) js.push_back(j);
            if (js.empty()) continue;
            L.beta.push_back({k, i});
            for (int j : js) {
                L.gamma.push_back({k, j});
                L.gamma_beta.push_back(L.nb() - 1);
            }
        }
    if (objective)
        for (int i = 0; i < L.I; ++i) {
            IndexList js;
            for (int j = 0; j < L.J; ++j)
                if (m.server[j] == i && (full || m.c_unc(j) > 0)) js.push_back(j);
            if (js.empty()) continue;
            L.beta0.push_back(i);
            for (int j : js) {
                L.gamma0.push_back(j);
                L.gamma0_beta0.push_back(L.nb0() - 1);
            }
        }
    return L;
}

}  // namespace

Layout Layout::of(const robust::RobustModel& m, bool full) { return make_layout(m, full, m.objective_uncertain()); }

RcProblem build_sclp_rc(const SclpData& d, const robust::RobustModel& m, bool full) {
    RcProblem out;
    Layout L = make_layout(m, full, m.objective_uncertain());
    const int K = L.K, J = L.J, I = L.I, nc = L.controls(), nh = L.h_rows();
    SclpProblem& p = out.problem;
    p.G = Mat::Zero(K, nc);
    p.H = Mat::Zero(nh, nc);
    p.F = d.F;
    p.alpha = d.alpha;
    p.a = d.a;
    p.d = d.d;
    p.T = d.T;
    p.b = Vec::Zero(nh);
    p.b.head(I) = d.b;
    p.c = Vec::Zero(nc);
    p.gamma = Vec::Zero(nc);
    p.G.leftCols(J) = m.G_nom;
    p.H.block(0, 0, I, J) = m.H;
    p.c.head(J) = m.c_nom;
    if (d.gamma.size() == J) p.gamma.head(J) = d.gamma;
    for (int t = 0; t < L.nb(); ++t) {
        auto [k, i] = L.beta[t];
        p.G(k, L.beta_col(t)) = m.budgets[i];
    }
    for (int t = 0; t < L.ng(); ++t) {
        auto [k, j] = L.gamma[t];
        p.G(k, L.gamma_col(t)) = 1.0;
        const int row = I + t;
        p.H(row, j) = m.G_unc(k, j);
        p.H(row, L.beta_col(L.gamma_beta[t])) = -1.0;
        p.H(row, L.gamma_col(t)) = -1.0;
    }
    for (int t = 0; t < L.nb0(); ++t) p.c(L.beta0_col(t)) = -m.budgets[L.beta0[t]];
    for (int t = 0; t < L.ng0(); ++t) {
        const int j = L.gamma0[t], row = I + L.ng() + t;
        p.c(L.gamma0_col(t)) = -1.0;
        p.H(row, j) = m.c_unc(j);
        p.H(row, L.beta0_col(L.gamma0_beta0[t])) = -1.0;
        p.H(row, L.gamma0_col(t)) = -1.0;
    }

    auto& cn = out.control_names;
    for (int j = 0; j < J; ++j) cn.push_back(sub("eta", j));
    for (auto [k, i] : L.beta) cn.push_back(sub("beta", k, i));
    for (auto [k, j] : L.gamma) cn.push_back(sub("gamma", k, m.server[j], j));
    for (int i : L.beta0) cn.push_back(sub0("beta", i));
    for (int j : L.gamma0) cn.push_back(sub0("gamma", m.server[j], j));
    for (int i = 0; i < I; ++i) cn.push_back(sub("s", i));
    for (auto [k, j] : L.gamma) cn.push_back(sub("v", k, m.server[j], j));
    for (int j : L.gamma0) cn.push_back(sub("r", m.server[j], j));
    for (int k = 0; k < K; ++k) out.state_names.push_back(sub("x", k));
    for (int l = 0; l < d.F.cols(); ++l) out.state_names.push_back(sub("x_F", l));
    for (int k = 0; k < K; ++k) out.row_names.push_back(sub("buffer", k));
    for (int i = 0; i < I; ++i) out.row_names.push_back(sub("capacity", i));
    for (auto [k, j] : L.gamma) out.row_names.push_back(sub("protect", k, m.server[j], j));
    for (int j : L.gamma0) out.row_names.push_back(sub0("protect", m.server[j], j));
    out.layout = std::move(L);
    return out;
}

RcProblem build_sclp_rc(const SclpData& d, const robust::ReducedProblem* reduced, bool objective_uncertainty) {
    if (reduced) return build_sclp_rc(d, robust::RobustModel::reduced(d, *reduced), false);
    return build_sclp_rc(d, robust::RobustModel::raw(d, objective_uncertainty), true);
}

RcProblem build_sclp_rc(const FluidNetwork& net, const robust::ReducedProblem* reduced, bool objective_uncertainty) {
    SclpData d = build_matrices(net);
    return build_sclp_rc(d, reduced, objective_uncertainty);
}

RatesRc build_rates_rc(const SclpData& d, const IndexList& Kstar, const IndexList& Jstar, bool objective_uncertainty) {
    const int K = d.K(), J = d.J(), I = d.I();
    const bool obj = objective_uncertainty;
    const Vec ct = obj ? d.c_tilde : Vec(Vec::Zero(J));
    RatesRc out;

    // primal columns
    const int c_eta = 0, c_s = J, c_beta = J + I, c_gamma = c_beta + K * I;
    const int c_beta0 = c_gamma + K * J, c_gamma0 = c_beta0 + (obj ? I : 0);
    const int c_v = c_gamma0 + (obj ? J : 0), c_r = c_v + K * J, c_x = c_r + (obj ? J : 0);
    const int ncol = c_x + K;
    // primal rows
    const int r_dyn = 0, r_v = K, r_r = r_v + K * J, r_cap = r_r + (obj ? J : 0);
    const int nrow = r_cap + I;

    lp::Instance& P = out.primal;
    P.A = Mat::Zero(nrow, ncol);
    P.rhs = Vec::Zero(nrow);
    P.objective = Vec::Zero(ncol);
    P.sense = lp::Sense::Max;
    P.signs.assign(ncol, lp::Sign::Nonneg);
    for (int j = 0; j < J + I; ++j)
        if (contains(Jstar, j)) P.signs[j] = lp::Sign::Zero;
    for (int k : Kstar) P.signs[c_x + k] = lp::Sign::Free;
    P.objective.segment(c_eta, J) = d.c_bar;
    for (int k = 0; k < K; ++k) {
        P.A.row(r_dyn + k).segment(c_eta, J) = d.G_bar.row(k);
        for (int i = 0; i < I; ++i) P.A(r_dyn + k, c_beta + k * I + i) = d.budgets[i];
        for (int j = 0; j < J; ++j) {
            P.A(r_dyn + k, c_gamma + k * J + j) = 1.0;
            // beta + gamma - G_tilde eta - v = 0
            const int r = r_v + k * J + j;
            P.A(r, c_beta + k * I + d.server[j]) = 1.0;
            P.A(r, c_gamma + k * J + j) = 1.0;
            P.A(r, c_eta + j) = -d.G_tilde(k, j);
            P.A(r, c_v + k * J + j) = -1.0;
        }
        P.A(r_dyn + k, c_x + k) = 1.0;
        P.rhs(r_dyn + k) = d.a(k);
    }
    if (obj) {
        for (int i = 0; i < I; ++i) P.objective(c_beta0 + i) = -d.budgets[i];
        for (int j = 0; j < J; ++j) {
            P.objective(c_gamma0 + j) = -1.0;
            const int r = r_r + j;
            P.A(r, c_beta0 + d.server[j]) = 1.0;
            P.A(r, c_gamma0 + j) = 1.0;
            P.A(r, c_eta + j) = -ct(j);
            P.A(r, c_r + j) = -1.0;
        }
    }
    for (int i = 0; i < I; ++i) {
        P.A.row(r_cap + i).segment(c_eta, J) = d.H.row(i);
        P.A(r_cap + i, c_s + i) = 1.0;
        P.rhs(r_cap + i) = d.b(i);
    }
    auto& pc = out.primal_cols;
    for (int j = 0; j < J; ++j) pc.push_back(sub("eta", j));
    for (int i = 0; i < I; ++i) pc.push_back(sub("s", i));
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < I; ++i) pc.push_back(sub("beta", k, i));
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) pc.push_back(sub("gamma", k, d.server[j], j));
    if (obj) {
        for (int i = 0; i < I; ++i) pc.push_back(sub0("beta", i));
        for (int j = 0; j < J; ++j) pc.push_back(sub0("gamma", d.server[j], j));
    }
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) pc.push_back(sub("v", k, d.server[j], j));
    if (obj)
        for (int j = 0; j < J; ++j) pc.push_back(sub("r", d.server[j], j));
    for (int k = 0; k < K; ++k) pc.push_back(sub("xdot", k));
    auto& pr = out.primal_rows;
    for (int k = 0; k < K; ++k) pr.push_back(sub("buffer", k));
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) pr.push_back(sub("protect", k, d.server[j], j));
    if (obj)
        for (int j = 0; j < J; ++j) pr.push_back(sub0("protect", d.server[j], j));
    for (int i = 0; i < I; ++i) pr.push_back(sub("capacity", i));

    // dual columns: p, q_cap, q_dot(eta), delta, delta_0, y, y_0, omega, omega_0
    const int v_p = 0, v_q = K, v_qd = K + I, v_d = v_qd + J, v_d0 = v_d + K * J;
    const int v_y = v_d0 + (obj ? J : 0), v_y0 = v_y + K * J, v_w = v_y0 + (obj ? J : 0);
    const int v_w0 = v_w + K * I, nvar = v_w0 + (obj ? I : 0);
    // dual rows: eta (J), gamma (K J), gamma_0 (J), beta (K I), beta_0 (I)
    const int e_eta = 0, e_g = J, e_g0 = e_g + K * J, e_b = e_g0 + (obj ? J : 0), e_b0 = e_b + K * I;
    const int ndr = e_b0 + (obj ? I : 0);

    lp::Instance& D = out.dual;
    D.A = Mat::Zero(ndr, nvar);
    D.rhs = Vec::Zero(ndr);
    D.objective = Vec::Zero(nvar);
    D.sense = lp::Sense::Min;
    D.signs.assign(nvar, lp::Sign::Nonneg);
    D.objective.segment(v_p, K) = d.a;
    D.objective.segment(v_q, I) = d.b;
    for (int k = 0; k < K; ++k)
        if (contains(Kstar, k)) D.signs[v_p + k] = lp::Sign::Zero;
    for (int i = 0; i < I; ++i)
        if (contains(Jstar, J + i)) D.signs[v_q + i] = lp::Sign::Free;
    for (int j = 0; j < J; ++j)
        if (contains(Jstar, j)) D.signs[v_qd + j] = lp::Sign::Free;
    for (int j = 0; j < J; ++j) {
        const int r = e_eta + j;
        for (int k = 0; k < K; ++k) {
            D.A(r, v_p + k) = d.G_bar(k, j);
            D.A(r, v_d + k * J + j) = d.G_tilde(k, j);
        }
        if (obj) D.A(r, v_d0 + j) = ct(j);
        for (int i = 0; i < I; ++i) D.A(r, v_q + i) = d.H(i, j);
        D.A(r, v_qd + j) = -1.0;
        D.rhs(r) = d.c_bar(j);
    }
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) {
            const int r = e_g + k * J + j;
            D.A(r, v_p + k) = 1.0;
            D.A(r, v_d + k * J + j) = -1.0;
            D.A(r, v_y + k * J + j) = -1.0;
        }
    if (obj)
        for (int j = 0; j < J; ++j) {
            const int r = e_g0 + j;
            D.A(r, v_d0 + j) = 1.0;
            D.A(r, v_y0 + j) = 1.0;
            D.rhs(r) = 1.0;
        }
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < I; ++i) {
            const int r = e_b + k * I + i;
            D.A(r, v_p + k) = d.budgets[i];
            for (int j = 0; j < J; ++j)
                if (d.server[j] == i) D.A(r, v_d + k * J + j) = -1.0;
            D.A(r, v_w + k * I + i) = -1.0;
        }
    if (obj)
        for (int i = 0; i < I; ++i) {
            const int r = e_b0 + i;
            for (int j = 0; j < J; ++j)
                if (d.server[j] == i) D.A(r, v_d0 + j) = 1.0;
            D.A(r, v_w0 + i) = 1.0;
            D.rhs(r) = d.budgets[i];
        }
    auto& dc = out.dual_cols;
    for (int k = 0; k < K; ++k) dc.push_back(sub("p", k));
    for (int i = 0; i < I; ++i) dc.push_back(sub("qdot", J + i));
    for (int j = 0; j < J; ++j) dc.push_back(sub("qdot", j));
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) dc.push_back(sub("delta", k, j));
    if (obj)
        for (int j = 0; j < J; ++j) dc.push_back(sub0("delta", j));
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) dc.push_back(sub("y", k, j));
    if (obj)
        for (int j = 0; j < J; ++j) dc.push_back(sub0("y", j));
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < I; ++i) dc.push_back(sub("omega", k, i));
    if (obj)
        for (int i = 0; i < I; ++i) dc.push_back(sub0("omega", i));
    auto& dr = out.dual_rows;
    for (int j = 0; j < J; ++j) dr.push_back(sub("eta", j));
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) dr.push_back(sub("gamma", k, d.server[j], j));
    if (obj)
        for (int j = 0; j < J; ++j) dr.push_back(sub0("gamma", d.server[j], j));
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < I; ++i) dr.push_back(sub("beta", k, i));
    if (obj)
        for (int i = 0; i < I; ++i) dr.push_back(sub0("beta", i));
    return out;
}

double DimensionReport::relative_reduction() const {
    if (before == 0) return 100.0;
    return 100.0 * (1.0 - static_cast<double>(after) / static_cast<double>(before));
}

nlohmann::json DimensionReport::to_json() const {
    return {{"eq2_form", eq2_form},
            {"no_routing", no_routing},
            {"before", before},
            {"after", after},
            {"relative_reduction", relative_reduction()}};
}

DimensionReport dimension_report(const SclpData& d, bool objective_uncertainty) {
    const long long K = d.K(), J = d.J(), I = d.I();
    DimensionReport r;
    r.eq2_form = (K + 1) * (J + I) + 1;
    r.no_routing = K * (K + I);
    // one beta per (k, i) and one gamma per (k, j), idle servers included
    r.before = K * (J + I) + (objective_uncertainty ? J + I : 0);
    auto red = robust::RobustModel::reduced(d, robust::reduce(d, objective_uncertainty));
    r.after = make_layout(red, false, objective_uncertainty).additional();
    return r;
}

}  // namespace sclp::rc
