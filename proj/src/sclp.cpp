#include "sclp/sclp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sclp {

IndexList IntervalBasis::K() const {
    IndexList out;
    int nc = static_cast<int>(u.size());
    for (int v : basic)
        if (v >= nc) out.push_back(v - nc);
    return out;
}

IndexList IntervalBasis::J() const {
    IndexList out;
    int nc = static_cast<int>(u.size());
    for (int j = 0; j < nc; ++j)
        if (!std::binary_search(basic.begin(), basic.end(), j)) out.push_back(j);
    return out;
}

// ---- Boundary-LP ----

BoundarySolution solve_boundary(const SclpProblem& p, const Tolerances& tol) {
    const int K = p.K(), L = p.L(), J = p.J(), I = p.I();
    BoundarySolution out;

    lp::Instance primal;
    primal.A.resize(K, K + L);
    primal.A << Mat::Identity(K, K), p.F;
    primal.rhs = p.alpha;
    primal.objective = Vec::Zero(K + L);
    primal.objective.tail(L) = p.d;
    primal.signs.assign(K + L, lp::Sign::Nonneg);
    auto rp = lp::solve(primal, nullptr, tol);
    if (rp.status != lp::Status::Optimal)
        throw SolverError(std::string("boundary LP (initial states) is ") + lp::to_string(rp.status));
    out.x0 = rp.x;

    lp::Instance dual;
    dual.A.resize(J, J + I);
    dual.A << -Mat::Identity(J, J), p.H.transpose();
    dual.rhs = p.gamma;
    dual.objective = Vec::Zero(J + I);
    dual.objective.tail(I) = p.b;
    dual.sense = lp::Sense::Min;
    dual.signs.assign(J + I, lp::Sign::Nonneg);
    auto rd = lp::solve(dual, nullptr, tol);
    if (rd.status != lp::Status::Optimal)
        throw SolverError(std::string("boundary LP (terminal duals) is ") + lp::to_string(rd.status));
    out.qN = rd.x;

    double thr = 1e-9;
    for (int k = 0; k < K + L; ++k)
        if (out.x0(k) > thr) out.K0.push_back(k);
    for (int j = 0; j < J + I; ++j)
        if (out.qN(j) > thr) out.JN1.push_back(j);
    return out;
}

BoundarySolution solve_boundary(const SclpData& d, const Tolerances& tol) {
    return solve_boundary(d.nominal(), tol);
}

// ---- Rates-LP ----

NominalRates::NominalRates(const SclpProblem& p, const Tolerances& tol) : p_(p), tol_(tol) {}

lp::Instance NominalRates::instance(const IndexList& K, const IndexList& Jz) const {
    const int Kn = p_.K(), L = p_.L(), J = p_.J(), I = p_.I();
    const int nc = J + I, ns = Kn + L;
    lp::Instance lp;
    lp.A = Mat::Zero(Kn + I, nc + ns);
    lp.A.block(0, 0, Kn, J) = p_.G;
    lp.A.block(0, nc, Kn, Kn) = Mat::Identity(Kn, Kn);
    lp.A.block(0, nc + Kn, Kn, L) = p_.F;
    lp.A.block(Kn, 0, I, J) = p_.H;
    lp.A.block(Kn, J, I, I) = Mat::Identity(I, I);
    lp.rhs.resize(Kn + I);
    lp.rhs << p_.a, p_.b;
    lp.objective = Vec::Zero(nc + ns);
    lp.objective.head(J) = p_.c;
    lp.objective.tail(L) = p_.d;
    lp.signs.assign(nc + ns, lp::Sign::Nonneg);
    for (int j : Jz) lp.signs.at(j) = lp::Sign::Zero;
    for (int k : K) lp.signs.at(nc + k) = lp::Sign::Free;
    return lp;
}

namespace {

std::string set_str(const IndexList& s) {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "}";
    return os.str();
}

}  // namespace

IntervalBasis NominalRates::solve(const IndexList& K, const IndexList& J, const IntervalBasis* warm) {
    lp::Instance lp = instance(K, J);
    const lp::Basis* wb = warm && !warm->lp_basis.empty() ? &warm->lp_basis : nullptr;
    auto r = lp::solve(lp, wb, tol_);
    if (r.status != lp::Status::Optimal)
        throw SolverError(std::string("Rates-LP(K=") + set_str(K) + ", J=" + set_str(J) + ") is " +
                          lp::to_string(r.status));
    const int nc = num_controls();
    IntervalBasis b;
    b.K_in = K;
    b.J_in = J;
    b.basic = r.basis.basic;
    std::sort(b.basic.begin(), b.basic.end());
    b.u = r.x.head(nc);
    b.xdot = r.x.tail(num_states());
    b.qdot = r.reduced.head(nc);
    b.p = r.reduced.tail(num_states());
    b.c_eff = lp.objective.head(nc);
    b.lp_basis = r.basis;
    return b;
}

std::optional<IntervalBasis> NominalRates::from_basis(const IndexList& basic, const IndexList& Jallowed) {
    const int nc = num_controls(), ns = num_states();
    const int m = p_.K() + p_.I();
    if (static_cast<int>(basic.size()) != m) return std::nullopt;
    IndexList K, J;
    for (int v : basic)
        if (v >= nc) K.push_back(v - nc);
    for (int j : Jallowed)
        if (!contains(basic, j)) J.push_back(j);
    lp::Instance lp = instance(K, J);
    Mat B(m, m);
    Vec cB(m);
    for (int r = 0; r < m; ++r) {
        B.col(r) = lp.A.col(basic[r]);
        cB(r) = lp.objective(basic[r]);
    }
    Eigen::FullPivLU<Mat> lu(B);
    if (!lu.isInvertible()) return std::nullopt;
    Vec xB = lu.solve(lp.rhs);
    Vec y = B.transpose().fullPivLu().solve(cB);
    Vec x = Vec::Zero(nc + ns);
    for (int r = 0; r < m; ++r) x(basic[r]) = xB(r);
    Vec reduced = lp.A.transpose() * y - lp.objective;
    const double eps = 1e-9;
    for (int r = 0; r < m; ++r)
        if (basic[r] < nc && xB(r) < -eps) return std::nullopt;
    for (int k = 0; k < ns; ++k)
        if (!contains(K, k) && !contains(basic, nc + k) && reduced(nc + k) < -eps) return std::nullopt;
    for (int j = 0; j < nc; ++j)
        if (!contains(J, j) && !contains(basic, j) && reduced(j) < -eps) return std::nullopt;
    for (int r = 0; r < m; ++r) reduced(basic[r]) = 0;
    IntervalBasis b;
    b.K_in = K;
    b.J_in = J;
    b.basic = basic;
    std::sort(b.basic.begin(), b.basic.end());
    b.u = x.head(nc);
    b.xdot = x.tail(ns);
    b.qdot = reduced.head(nc);
    b.p = reduced.tail(ns);
    b.c_eff = lp.objective.head(nc);
    b.lp_basis.basic = basic;
    return b;
}

IntervalBasis solve_rates(const SclpProblem& p, const IndexList& K, const IndexList& J, const IntervalBasis* warm) {
    NominalRates nr(p);
    return nr.solve(K, J, warm);
}

IntervalBasis solve_rates(const SclpData& d, const IndexList& K, const IndexList& J, const IntervalBasis* warm) {
    return solve_rates(d.nominal(), K, J, warm);
}

// ---- breakpoint equations ----

int leaving_variable(const IntervalBasis& a, const IntervalBasis& b) {
    if (lp::basis_distance(a.basic, b.basic) != 2) return -1;
    for (int v : a.basic)
        if (!std::binary_search(b.basic.begin(), b.basic.end(), v)) return v;
    return -1;
}

Intervals compute_intervals(const std::vector<IntervalBasis>& seq, const BoundarySolution& bnd, double T) {
    const int N = static_cast<int>(seq.size());
    if (N == 0) throw SolverError("compute_intervals: empty basis sequence");
    const int nc = static_cast<int>(seq[0].u.size());
    const int ns = static_cast<int>(seq[0].xdot.size());

    Mat M = Mat::Zero(N, N);
    Vec rhs = Vec::Zero(N), drhs = Vec::Zero(N);
    for (int n = 0; n + 1 < N; ++n) {
        int v = leaving_variable(seq[n], seq[n + 1]);
        if (v < 0)
            throw DegeneracyError("bases " + std::to_string(n + 1) + " and " + std::to_string(n + 2) +
                                      " are not adjacent",
                                  0.0, {"position " + std::to_string(n + 1)});
        if (v >= nc) {
            int k = v - nc;
            for (int m = 0; m <= n; ++m) M(n, m) = seq[m].xdot(k);
            rhs(n) = -bnd.x0(k);
        } else {
            for (int m = n + 1; m < N; ++m) M(n, m) = seq[m].qdot(v);
            rhs(n) = -bnd.qN(v);
        }
    }
    M.row(N - 1).setOnes();
    rhs(N - 1) = T;
    drhs(N - 1) = 1.0;

    Eigen::FullPivLU<Mat> lu(M);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
        int pos = 0;
        for (int n = 0; n < N; ++n)
            if (M.row(n).cwiseAbs().maxCoeff() < 1e-13) pos = n + 1;
        throw DegeneracyError("singular breakpoint system (N=" + std::to_string(N) + ")", 0.0,
                              {"position " + std::to_string(pos)});
    }
    Intervals iv;
    iv.tau = lu.solve(rhs);
    iv.dtau = lu.solve(drhs);

    iv.x.resize(ns, N + 1);
    iv.dx.resize(ns, N + 1);
    iv.x.col(0) = bnd.x0;
    iv.dx.col(0).setZero();
    for (int n = 0; n < N; ++n) {
        iv.x.col(n + 1) = iv.x.col(n) + seq[n].xdot * iv.tau(n);
        iv.dx.col(n + 1) = iv.dx.col(n) + seq[n].xdot * iv.dtau(n);
    }
    iv.q.resize(nc, N + 1);
    iv.dq.resize(nc, N + 1);
    iv.q.col(N) = bnd.qN;
    iv.dq.col(N).setZero();
    for (int n = N - 1; n >= 0; --n) {
        iv.q.col(n) = iv.q.col(n + 1) + seq[n].qdot * iv.tau(n);
        iv.dq.col(n) = iv.dq.col(n + 1) + seq[n].qdot * iv.dtau(n);
    }
    return iv;
}

// ---- objectives ----

double primal_objective(const SclpProblem& p, const SclpSolution& s) {
    const int J = p.J(), K = p.K(), L = p.L();
    double obj = 0;
    for (size_t n = 0; n < s.bases.size(); ++n) {
        const IntervalBasis& b = s.bases[n];
        double tau = s.tau(n);
        double mid = 0.5 * (s.breakpoints[n] + s.breakpoints[n + 1]);
        obj += p.gamma.dot(b.u.head(J)) * tau;
        obj += b.c_eff.dot(b.u) * tau * (s.T - mid);
        if (L > 0) obj += p.d.dot(0.5 * (s.x.col(n).segment(K, L) + s.x.col(n + 1).segment(K, L))) * tau;
    }
    return obj;
}

double dual_objective(const SclpProblem& p, const SclpSolution& s) {
    const int K = p.K(), J = p.J(), I = p.I();
    double obj = 0;
    for (size_t n = 0; n < s.bases.size(); ++n) {
        const IntervalBasis& b = s.bases[n];
        double t0 = s.breakpoints[n], t1 = s.breakpoints[n + 1], tau = s.tau(n);
        Vec pk = b.p.head(K);
        obj += p.alpha.dot(pk) * tau;
        obj += p.a.dot(pk) * 0.5 * (t1 * t1 - t0 * t0);
        obj += p.b.dot(0.5 * (s.q.col(n).segment(J, I) + s.q.col(n + 1).segment(J, I))) * tau;
    }
    return obj;
}

double holding_cost_objective(const SclpData& d, const SclpSolution& s) {
    const int K = d.K();
    double integral = 0;
    for (size_t n = 0; n < s.bases.size(); ++n)
        integral += d.g.dot(0.5 * (s.x.col(n).head(K) + s.x.col(n + 1).head(K))) * s.tau(n);
    return d.g.dot(d.alpha) * s.T + d.g.dot(d.a) * s.T * s.T / 2 - integral;
}

// ---- optimality verification ----

bool OptimalityReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string OptimalityReport::summary() const {
    std::ostringstream os;
    os.precision(6);
    for (const auto& c : checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << " (worst " << c.margin << ")\n";
    return os.str();
}

OptimalityReport verify_optimality(const SclpProblem& p, const SclpSolution& s) {
    OptimalityReport rep;
    const int N = static_cast<int>(s.bases.size());
    const int K = p.K(), L = p.L(), J = p.J(), I = p.I();
    const int nc = J + I;
    auto add = [&](std::string name, bool ok, double margin) { rep.checks.push_back({std::move(name), ok, margin}); };

    int worst_dist = 2;
    for (int n = 0; n + 1 < N; ++n) {
        int d = lp::basis_distance(s.bases[n].basic, s.bases[n + 1].basic);
        if (d != 2) worst_dist = d;
    }
    add("adjacency of consecutive bases", worst_dist == 2, worst_dist);

    bool compat = N > 0;
    if (compat) {
        IndexList K1 = s.bases.front().K(), JN = s.bases.back().J();
        for (int k : s.boundary.K0) compat = compat && contains(K1, k);
        for (int j : s.boundary.JN1) compat = compat && contains(JN, j);
    }
    add("boundary compatibility K0 in K1, J_{N+1} in J_N", compat, compat ? 0 : 1);

    double min_tau = N ? s.tau.minCoeff() : 0;
    add("interval lengths positive", min_tau > 0, min_tau);
    double min_x = s.x.size() ? s.x.minCoeff() : 0, min_q = s.q.size() ? s.q.minCoeff() : 0;
    add("primal states nonnegative", min_x >= -1e-9, min_x);
    add("dual states nonnegative", min_q >= -1e-9, min_q);

    // Rates-LP feasibility per interval
    double rate_res = 0, sign_viol = 0;
    for (const auto& b : s.bases) {
        Vec bal = p.G * b.u.head(J) + b.xdot.head(K) + p.F * b.xdot.tail(L) - p.a;
        Vec cap = p.H * b.u.head(J) + b.u.tail(I) - p.b;
        rate_res = std::max({rate_res, bal.size() ? bal.cwiseAbs().maxCoeff() : 0.0,
                             cap.size() ? cap.cwiseAbs().maxCoeff() : 0.0});
        IndexList Kb = b.K(), Jb = b.J();
        for (int j = 0; j < nc; ++j) {
            if (!contains(Jb, j)) sign_viol = std::max(sign_viol, -b.u(j));
            if (contains(b.J_in, j) && std::abs(b.u(j)) > 0) sign_viol = std::max(sign_viol, std::abs(b.u(j)));
        }
        for (int k = 0; k < K + L; ++k)
            if (!contains(b.K_in, k)) sign_viol = std::max(sign_viol, -b.xdot(k));
    }
    add("interval rates satisfy Rates-LP constraints", rate_res <= 1e-8, rate_res);
    add("interval rates sign restrictions", sign_viol <= 1e-9, sign_viol);

    // exits hit zero, lengths sum to T
    double res7 = std::abs(s.tau.sum() - s.T);
    for (int n = 0; n + 1 < N; ++n) {
        int v = leaving_variable(s.bases[n], s.bases[n + 1]);
        if (v < 0) continue;
        if (v >= nc) res7 = std::max(res7, std::abs(s.x(v - nc, n + 1)));
        else res7 = std::max(res7, std::abs(s.q(v, n + 1)));
    }
    add("breakpoint equations residual", res7 <= 1e-8, res7);

    // recursions from the boundary values
    double res8 = 0;
    if (N > 0) {
        Vec x = s.boundary.x0;
        res8 = (s.x.col(0) - x).cwiseAbs().maxCoeff();
        for (int n = 0; n < N; ++n) {
            x += s.bases[n].xdot * s.tau(n);
            res8 = std::max(res8, (s.x.col(n + 1) - x).cwiseAbs().maxCoeff());
        }
        Vec q = s.boundary.qN;
        if (q.size()) res8 = std::max(res8, (s.q.col(N) - q).cwiseAbs().maxCoeff());
        for (int n = N - 1; n >= 0; --n) {
            q += s.bases[n].qdot * s.tau(n);
            if (q.size()) res8 = std::max(res8, (s.q.col(n) - q).cwiseAbs().maxCoeff());
        }
    }
    add("state value recursions residual", res8 <= 1e-8, res8);

    double P = primal_objective(p, s), D = dual_objective(p, s);
    double gap = std::abs(P - D) / std::max(1.0, std::abs(P));
    add("strong duality", gap <= 1e-8, gap);
    return rep;
}

// ---- JSON ----

namespace {

nlohmann::json ilist(const IndexList& v) { return nlohmann::json(v); }

}  // namespace

nlohmann::json solution_to_json(const SclpSolution& s) {
    using nlohmann::json;
    json j;
    j["horizon"] = s.T;
    j["robust"] = s.robust;
    j["breakpoints"] = s.breakpoints;
    j["tau"] = vec_to_json(s.tau);
    j["objective"] = s.objective;
    j["dual_objective"] = s.dual_objective;
    j["trace"] = s.trace;
    j["boundary"] = {{"x0", vec_to_json(s.boundary.x0)},
                     {"qN", vec_to_json(s.boundary.qN)},
                     {"K0", ilist(s.boundary.K0)},
                     {"JN1", ilist(s.boundary.JN1)}};
    json iv = json::array();
    for (const auto& b : s.bases) {
        iv.push_back({{"basic", ilist(b.basic)},
                      {"K_in", ilist(b.K_in)},
                      {"J_in", ilist(b.J_in)},
                      {"u", vec_to_json(b.u)},
                      {"x_dot", vec_to_json(b.xdot)},
                      {"p", vec_to_json(b.p)},
                      {"q_dot", vec_to_json(b.qdot)},
                      {"c_eff", vec_to_json(b.c_eff)}});
    }
    j["intervals"] = iv;
    json xs = json::array(), qs = json::array();
    for (Eigen::Index n = 0; n < s.x.cols(); ++n) xs.push_back(vec_to_json(s.x.col(n)));
    for (Eigen::Index n = 0; n < s.q.cols(); ++n) qs.push_back(vec_to_json(s.q.col(n)));
    j["x"] = xs;
    j["q"] = qs;
    return j;
}

SclpSolution solution_from_json(const nlohmann::json& j) {
    SclpSolution s;
    try {
        s.T = j.at("horizon").get<double>();
        s.robust = j.value("robust", false);
        s.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        s.tau = vec_from_json(j.at("tau"));
        s.objective = j.at("objective").get<double>();
        s.dual_objective = j.value("dual_objective", 0.0);
        s.trace = j.value("trace", std::vector<double>{});
        const auto& bj = j.at("boundary");
        s.boundary.x0 = vec_from_json(bj.at("x0"));
        s.boundary.qN = vec_from_json(bj.at("qN"));
        s.boundary.K0 = bj.at("K0").get<IndexList>();
        s.boundary.JN1 = bj.at("JN1").get<IndexList>();
        for (const auto& b : j.at("intervals")) {
            IntervalBasis ib;
            ib.basic = b.at("basic").get<IndexList>();
            ib.K_in = b.at("K_in").get<IndexList>();
            ib.J_in = b.at("J_in").get<IndexList>();
            ib.u = vec_from_json(b.at("u"));
            ib.xdot = vec_from_json(b.at("x_dot"));
            ib.p = vec_from_json(b.at("p"));
            ib.qdot = vec_from_json(b.at("q_dot"));
            ib.c_eff = vec_from_json(b.at("c_eff"));
            s.bases.push_back(std::move(ib));
        }
        const auto& xs = j.at("x");
        const auto& qs = j.at("q");
        if (!xs.empty()) {
            s.x.resize(xs[0].size(), xs.size());
            for (size_t n = 0; n < xs.size(); ++n) s.x.col(n) = vec_from_json(xs[n]);
        }
        if (!qs.empty()) {
            s.q.resize(qs[0].size(), qs.size());
            for (size_t n = 0; n < qs.size(); ++n) s.q.col(n) = vec_from_json(qs[n]);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("solution file: ") + e.what());
    }
    return s;
}

}  // namespace sclp
