// Parametric sweep over the horizon. The basis sequence is kept valid for the
// current horizon h and updated at every collision.
#include "sclp/sclp.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace sclp {

namespace {

enum class Kind { Tau, X, Q };

struct Event {
    Kind kind;
    int n;      // interval (Tau) or breakpoint column (X, Q)
    int index;  // state or control index
    double ratio;
};

std::string describe(const Event& e) {
    std::ostringstream os;
    switch (e.kind) {
        case Kind::Tau: os << "tau_" << e.n + 1; break;
        case Kind::X: os << "x_" << e.index + 1 << "(t_" << e.n << ")"; break;
        case Kind::Q: os << "q_" << e.index + 1 << "(t_" << e.n << ")"; break;
    }
    return os.str();
}

IndexList without(IndexList s, int v) {
    s.erase(std::remove(s.begin(), s.end(), v), s.end());
    return s;
}

using Seq = std::vector<IntervalBasis>;

class Sweep {
public:
    Sweep(const SclpProblem& p, RatesSolver& rates, const BoundarySolution& bnd, const Tolerances& tol)
        : p_(p), rates_(rates), bnd_(bnd), tol_(tol), nc_(rates.num_controls()), ns_(rates.num_states()) {
        tie_ = 1e-9 * std::max(1.0, p.T);
    }

    SclpSolution run() {
        Seq seq{rates_.solve(bnd_.K0, bnd_.JN1, nullptr)};
        double h = 0;
        std::vector<double> trace;
        const int max_iter = 100000;
        for (int iter = 0;; ++iter) {
            if (iter > max_iter) throw SolverError("parametric sweep: iteration limit exceeded");
            Intervals iv = intervals(seq, h);
            auto evs = events(iv);
            double delta = std::numeric_limits<double>::infinity();
            for (const auto& e : evs) delta = std::min(delta, e.ratio);
            if (h + delta >= p_.T - tie_) break;

            std::vector<Event> tied;
            for (const auto& e : evs)
                if (e.ratio <= delta + tie_) tied.push_back(e);
            if (delta <= tie_) throw DegeneracyError("zero-length parametric step", h / p_.T, names(tied));
            h += delta;
            tied = drop_implied(seq, tied, h);
            trace.push_back(h / p_.T);
            seq = update(seq, tied, h);
        }
        return finish(seq, trace);
    }

private:
    Intervals intervals(const Seq& seq, double h) const {
        try {
            return compute_intervals(seq, bnd_, h);
        } catch (DegeneracyError& e) {
            throw DegeneracyError(e.what(), h / p_.T, e.tied_set());
        }
    }

    std::vector<Event> events(const Intervals& iv) const {
        std::vector<Event> out;
        const double neg = tol_.ratio_negative;
        const int N = static_cast<int>(iv.tau.size());
        for (int n = 0; n < N; ++n)
            if (iv.dtau(n) < -neg) out.push_back({Kind::Tau, n, -1, std::max(iv.tau(n), 0.0) / -iv.dtau(n)});
        for (int n = 1; n <= N; ++n)
            for (int k = 0; k < ns_; ++k)
                if (iv.dx(k, n) < -neg) out.push_back({Kind::X, n, k, std::max(iv.x(k, n), 0.0) / -iv.dx(k, n)});
        for (int n = 0; n < N; ++n)
            for (int j = 0; j < nc_; ++j)
                if (iv.dq(j, n) < -neg) out.push_back({Kind::Q, n, j, std::max(iv.q(j, n), 0.0) / -iv.dq(j, n)});
        return out;
    }

    // A vanishing run of intervals n1..n2 spans t_{n1}..t_{n2+1}. A state or
    // dual state that is already zero at one end of the run reaches zero at
    // every other point of the run together with the tau collision; those
    // events are consequences, not separate collisions.
    std::vector<Event> drop_implied(const Seq& seq, const std::vector<Event>& tied, double h) const {
        int n1 = std::numeric_limits<int>::max(), n2 = -1;
        for (const auto& e : tied)
            if (e.kind == Kind::Tau) {
                n1 = std::min(n1, e.n);
                n2 = std::max(n2, e.n);
            }
        if (n2 < 0) return tied;
        Intervals iv = intervals(seq, h);
        const double eps = 1e-9 * std::max(1.0, h);
        std::vector<Event> out;
        for (const auto& e : tied) {
            bool implied = false;
            if (e.kind != Kind::Tau && e.n >= n1 && e.n <= n2 + 1) {
                const Mat& v = e.kind == Kind::X ? iv.x : iv.q;
                implied = (e.n != n1 && std::abs(v(e.index, n1)) <= eps) ||
                          (e.n != n2 + 1 && std::abs(v(e.index, n2 + 1)) <= eps);
            }
            if (!implied) out.push_back(e);
        }
        return out;
    }

    static std::vector<std::string> names(const std::vector<Event>& evs) {
        std::vector<std::string> out;
        for (const auto& e : evs) out.push_back(describe(e));
        return out;
    }

    // Collision events plus the degenerate rates next to them: basic controls
    // at zero, nonbasic controls outside J with zero reduced cost and
    // nonbasic state slopes with zero dual, i.e. alternative optimal pivots.
    std::vector<std::string> names(const Seq& seq, const std::vector<Event>& evs) const {
        std::vector<std::string> out = names(evs);
        std::vector<char> seen(nc_ + ns_, 0);
        auto add = [&](int v, const std::string& what, int n) {
            if (seen[v]) return;
            seen[v] = 1;
            std::string name = v < nc_ ? "u_" + std::to_string(v + 1) : "xdot_" + std::to_string(v - nc_ + 1);
            out.push_back(name + " " + what + " (interval " + std::to_string(n + 1) + ")");
        };
        for (const auto& e : evs)
            for (int n : {e.n - 1, e.n}) {
                if (n < 0 || n >= static_cast<int>(seq.size())) continue;
                const IntervalBasis& b = seq[n];
                for (int j = 0; j < nc_; ++j) {
                    if (contains(b.basic, j)) {
                        if (std::abs(b.u(j)) <= tol_.feasibility) add(j, "basic at zero", n);
                    } else if (!contains(b.J_in, j) && std::abs(b.qdot(j)) <= tol_.optimality) {
                        add(j, "zero reduced cost", n);
                    }
                }
                for (int k = 0; k < ns_; ++k)
                    if (!contains(b.basic, nc_ + k) && std::abs(b.p(k)) <= tol_.optimality)
                        add(nc_ + k, "nonbasic with zero dual", n);
            }
        return out;
    }

    // A sequence is acceptable at horizon h when its interval lengths and
    // states are feasible and the next collision is strictly ahead.
    bool valid(const Seq& seq, double h, bool strict = true) const {
        if (seq.empty()) return false;
        for (size_t n = 0; n + 1 < seq.size(); ++n)
            if (leaving_variable(seq[n], seq[n + 1]) < 0) return false;
        IndexList K1 = seq.front().K(), JN = seq.back().J();
        for (int k : bnd_.K0)
            if (!contains(K1, k)) return false;
        for (int j : bnd_.JN1)
            if (!contains(JN, j)) return false;
        Intervals iv;
        try {
            iv = compute_intervals(seq, bnd_, h);
        } catch (const DegeneracyError&) {
            return false;
        }
        double eps = 1e-9 * std::max(1.0, h);
        if (iv.tau.minCoeff() < -eps) return false;
        // intervals born at this collision must grow
        if (strict)
            for (Eigen::Index n = 0; n < iv.tau.size(); ++n)
                if (iv.tau(n) <= eps && iv.dtau(n) <= tol_.ratio_negative) return false;
        if (iv.x.size() && iv.x.minCoeff() < -eps) return false;
        if (iv.q.size() && iv.q.minCoeff() < -eps) return false;
        for (const auto& e : events(iv))
            if (e.ratio <= tie_) return false;
        return true;
    }

    IndexList K_of(const IntervalBasis* b) const { return b ? b->K() : bnd_.K0; }
    IndexList J_of(const IntervalBasis* b) const { return b ? b->J() : bnd_.JN1; }

    bool same(const IntervalBasis& a, const IntervalBasis& b) const { return a.basic == b.basic; }
    static bool adjacent(const IntervalBasis* a, const IntervalBasis* b) {
        return !a || !b || leaving_variable(*a, *b) >= 0;
    }

    const std::optional<IntervalBasis>& evaluate(const IndexList& basic, const IndexList& J) {
        auto key = std::make_pair(basic, J);
        auto it = basis_cache_.find(key);
        if (it == basis_cache_.end()) it = basis_cache_.emplace(key, rates_.from_basis(basic, J)).first;
        return it->second;
    }

    static IndexList merge(const IndexList& a, const IndexList& b) {
        IndexList out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    // Rates-LP optimal bases one pivot away from `from`: `out_var` leaves
    // (or, if negative, `in_var` enters).
    std::vector<IntervalBasis> neighbours(const IndexList& from, int out_var, int in_var, const IndexList& J) {
        std::vector<IntervalBasis> res;
        const int nv = nc_ + ns_;
        if (out_var >= 0) {
            if (!std::binary_search(from.begin(), from.end(), out_var)) return res;
            for (int e = 0; e < nv; ++e) {
                if (e == out_var || std::binary_search(from.begin(), from.end(), e)) continue;
                IndexList next = from;
                next.erase(std::find(next.begin(), next.end(), out_var));
                next.insert(std::upper_bound(next.begin(), next.end(), e), e);
                if (const auto& b = evaluate(next, J)) res.push_back(*b);
            }
        } else {
            if (std::binary_search(from.begin(), from.end(), in_var)) return res;
            for (int f : from) {
                IndexList next = from;
                next.erase(std::find(next.begin(), next.end(), f));
                next.insert(std::upper_bound(next.begin(), next.end(), in_var), in_var);
                if (const auto& b = evaluate(next, J)) res.push_back(*b);
            }
        }
        return res;
    }

    // Chains of single pivots from `cur` to r, at most `budget` pivots long,
    // whose intermediate bases are optimal for their own Rates-LP.
    void pivot_paths(const IndexList& cur, const IntervalBasis& r, const IndexList& J, int budget, Seq& path,
                     std::vector<Seq>& out) {
        if (out.size() >= 64) return;
        const int left = lp::basis_distance(cur, r.basic) / 2;
        if (left == 1) {
            if (std::none_of(out.begin(), out.end(), [&](const Seq& s) { return same_chain(s, path); }))
                out.push_back(path);
            return;
        }
        if (left > budget) return;
        const int nv = nc_ + ns_;
        // pivots that close the distance first, then detours
        for (int pass = 0; pass < 2; ++pass)
            for (int f : cur)
                for (int e = 0; e < nv; ++e) {
                    if (std::binary_search(cur.begin(), cur.end(), e)) continue;
                    bool progress = !std::binary_search(r.basic.begin(), r.basic.end(), f) &&
                                    std::binary_search(r.basic.begin(), r.basic.end(), e);
                    if (progress != (pass == 0)) continue;
                    IndexList next = cur;
                    next.erase(std::find(next.begin(), next.end(), f));
                    next.insert(std::upper_bound(next.begin(), next.end(), e), e);
                    if (lp::basis_distance(next, r.basic) / 2 > budget - 1) continue;
                    if (std::any_of(path.begin(), path.end(), [&](const IntervalBasis& b) { return b.basic == next; }))
                        continue;
                    auto b = evaluate(next, J);
                    if (!b) continue;
                    path.push_back(*b);
                    pivot_paths(next, r, J, budget - 1, path, out);
                    path.pop_back();
                    if (out.size() >= 64) return;
                }
    }

    static bool same_chain(const Seq& a, const Seq& b) {
        if (a.size() != b.size()) return false;
        for (size_t n = 0; n < a.size(); ++n)
            if (a[n].basic != b[n].basic) return false;
        return true;
    }

    // Candidate chains of bases connecting two non-adjacent bases.
    std::vector<Seq> bridge(const IntervalBasis& l, const IntervalBasis& r, int depth) {
        std::vector<Seq> out;
        if (depth > 8) return out;
        if (depth == 1 && lp::basis_distance(l.basic, r.basic) <= 8) {
            const int d = lp::basis_distance(l.basic, r.basic) / 2;
            const IndexList J = merge(l.J(), r.J());
            Seq path;
            pivot_paths(l.basic, r, J, d, path, out);
            pivot_paths(l.basic, r, J, d + 2, path, out);
        }
        int dist = lp::basis_distance(l.basic, r.basic);
        IndexList leave;
        for (int v : l.basic)
            if (!std::binary_search(r.basic.begin(), r.basic.end(), v)) leave.push_back(v);
        IndexList leave_ctrl;
        for (int v : leave)
            if (v < nc_) leave_ctrl.push_back(v);

        for (int first : leave) {
            IndexList K = K_of(&l), J = J_of(&r);
            if (first >= nc_) K = without(K, first - nc_);
            for (int c : leave_ctrl)
                if (c != first) J = without(J, c);
            std::optional<IntervalBasis> D;
            try {
                D = rates_.solve(K, J, &l);
            } catch (const SolverError&) {
                continue;
            }
            if (same(*D, l) || same(*D, r)) continue;
            if (lp::basis_distance(l.basic, D->basic) >= dist || lp::basis_distance(D->basic, r.basic) >= dist)
                continue;
            auto lefts = adjacent(&l, &*D) ? std::vector<Seq>{Seq{}} : bridge(l, *D, depth + 1);
            auto rights = adjacent(&*D, &r) ? std::vector<Seq>{Seq{}} : bridge(*D, r, depth + 1);
            for (const auto& a : lefts)
                for (const auto& b : rights) {
                    Seq s = a;
                    s.push_back(*D);
                    s.insert(s.end(), b.begin(), b.end());
                    out.push_back(std::move(s));
                    if (out.size() >= 32) return out;
                }
        }
        return out;
    }

    // Chains to place between l and r (either may be null at the boundary)
    // built around the new basis D.
    std::vector<Seq> around(const IntervalBasis* l, const IntervalBasis* r, const IntervalBasis& D) {
        std::vector<Seq> out;
        if ((l && same(D, *l)) || (r && same(D, *r))) return out;
        auto lefts = adjacent(l, &D) ? std::vector<Seq>{Seq{}} : bridge(*l, D, 1);
        auto rights = adjacent(&D, r) ? std::vector<Seq>{Seq{}} : bridge(D, *r, 1);
        for (const auto& a : lefts)
            for (const auto& b : rights) {
                Seq s = a;
                s.push_back(D);
                s.insert(s.end(), b.begin(), b.end());
                out.push_back(std::move(s));
            }
        if (out.size() > 1 || (!out.empty() && out[0].size() > 1)) ++pending_subproblems_;
        return out;
    }

    Seq splice(const Seq& seq, int from, int to, const Seq& mid) const {
        Seq s(seq.begin(), seq.begin() + from);
        s.insert(s.end(), mid.begin(), mid.end());
        s.insert(s.end(), seq.begin() + to, seq.end());
        return s;
    }

    // Insert new bases for a state or dual-state collision at breakpoint n.
    std::vector<Seq> insertion(const Seq& seq, int n, const IndexList& K, const IndexList& J, bool warm_left,
                               int pivot) {
        const int N = static_cast<int>(seq.size());
        const IntervalBasis* l = n > 0 ? &seq[n - 1] : nullptr;
        const IntervalBasis* r = n < N ? &seq[n] : nullptr;
        std::vector<Seq> out;
        std::vector<const IntervalBasis*> warms;
        if (warm_left) warms = {l ? l : r, r ? r : l};
        else warms = {r ? r : l, l ? l : r};
        std::vector<IndexList> seen;
        for (const IntervalBasis* w : warms) {
            IntervalBasis D;
            try {
                D = rates_.solve(K, J, w);
            } catch (const SolverError&) {
                continue;
            }
            if (std::find(seen.begin(), seen.end(), D.basic) != seen.end()) continue;
            seen.push_back(D.basic);
            for (auto& mid : around(l, r, D)) out.push_back(splice(seq, n, n, mid));
        }
        const int out_var = warm_left ? nc_ + pivot : -1;
        const int in_var = warm_left ? -1 : pivot;
        for (const IntervalBasis* from : warms)
            for (auto& D : neighbours(from->basic, out_var, in_var, J)) {
                if (std::find(seen.begin(), seen.end(), D.basic) != seen.end()) continue;
                seen.push_back(D.basic);
                for (auto& mid : around(l, r, D)) out.push_back(splice(seq, n, n, mid));
            }
        return out;
    }

    Seq update(const Seq& seq, const std::vector<Event>& tied, double h) {
        const int N = static_cast<int>(seq.size());
        const double theta = h / p_.T;
        std::vector<Seq> cands;
        pending_subproblems_ = 0;

        bool all_tau = std::all_of(tied.begin(), tied.end(), [](const Event& e) { return e.kind == Kind::Tau; });
        if (all_tau) {
            IndexList ns;
            for (const auto& e : tied) ns.push_back(e.n);
            std::sort(ns.begin(), ns.end());
            int n1 = ns.front(), n2 = ns.back();
            if (n2 - n1 + 1 != static_cast<int>(ns.size()))
                throw DegeneracyError("non-contiguous vanishing intervals", theta, names(tied));
            if (n2 - n1 + 1 == N) throw DegeneracyError("all intervals vanish", theta, names(tied));
            Seq removed = splice(seq, n1, n2 + 1, {});
            if (n1 == 0 || n2 == N - 1) {
                cands.push_back(removed);
            } else {
                const IntervalBasis& l = seq[n1 - 1];
                const IntervalBasis& r = seq[n2 + 1];
                if (same(l, r)) {
                    cands.push_back(splice(seq, n1, n2 + 2, {}));
                } else if (leaving_variable(l, r) >= 0) {
                    cands.push_back(removed);
                } else {
                    for (auto& mid : bridge(l, r, 1)) cands.push_back(splice(seq, n1, n2 + 1, mid));
                    if (!cands.empty()) ++pending_subproblems_;
                }
            }
        } else if (tied.size() == 1 && tied[0].kind == Kind::X) {
            int n = tied[0].n, k = tied[0].index;
            const IntervalBasis& l = seq[n - 1];
            IndexList K = without(l.K(), k);
            IndexList J = bnd_.JN1;
            if (n < N) {
                J = seq[n].J();
                int v = leaving_variable(l, seq[n]);
                if (v >= 0 && v < nc_) J = without(J, v);
            }
            cands = insertion(seq, n, K, J, true, k);
        } else if (tied.size() == 1 && tied[0].kind == Kind::Q) {
            int n = tied[0].n, j = tied[0].index;
            const IntervalBasis& r = seq[n];
            IndexList J = without(r.J(), j);
            IndexList K = bnd_.K0;
            if (n > 0) {
                K = seq[n - 1].K();
                int v = leaving_variable(seq[n - 1], r);
                if (v >= nc_) K = without(K, v - nc_);
            }
            cands = insertion(seq, n, K, J, false, j);
        } else {
            throw DegeneracyError("tied collision set", theta, names(seq, tied));
        }

        for (auto& c : cands) {
            if (valid(c, h)) {
                if (pending_subproblems_ && c.size() > seq.size() + 1) ++subproblems_;
                return c;
            }
        }
        for (auto& c : cands)
            if (valid(c, h, false))
                throw DegeneracyError("collision resolves only through a persistent zero-length interval", theta,
                                      names(seq, tied));
        throw DegeneracyError("no valid basis sequence after collision", theta, names(seq, tied));
    }

    SclpSolution finish(const Seq& seq, const std::vector<double>& trace) {
        Intervals iv = intervals(seq, p_.T);
        SclpSolution s;
        s.T = p_.T;
        s.boundary = bnd_;
        s.bases = seq;
        s.tau = iv.tau;
        s.x = iv.x;
        s.q = iv.q;
        s.trace = trace;
        s.breakpoints.assign(1, 0.0);
        for (int n = 0; n < iv.tau.size(); ++n) s.breakpoints.push_back(s.breakpoints.back() + iv.tau(n));
        s.breakpoints.back() = p_.T;
        s.objective = primal_objective(p_, s);
        s.dual_objective = dual_objective(p_, s);
        s.subproblems = subproblems_;
        return s;
    }

    const SclpProblem& p_;
    RatesSolver& rates_;
    const BoundarySolution& bnd_;
    const Tolerances& tol_;
    int nc_, ns_;
    double tie_;
    int subproblems_ = 0;
    int pending_subproblems_ = 0;
    std::map<std::pair<IndexList, IndexList>, std::optional<IntervalBasis>> basis_cache_;
};

}  // namespace

SclpSolution parametric_simplex(const SclpProblem& p, RatesSolver& rates, const BoundarySolution& boundary,
                                const Tolerances& tol) {
    if (!(p.T > 0)) throw InputError("horizon must be positive");
    Sweep sw(p, rates, boundary, tol);
    return sw.run();
}

SclpSolution sclp_simplex(const SclpProblem& p, const Tolerances& tol) {
    BoundarySolution bnd = solve_boundary(p, tol);
    NominalRates rates(p, tol);
    return parametric_simplex(p, rates, bnd, tol);
}

SclpSolution sclp_simplex(const SclpData& d, double T, const Tolerances& tol) {
    SclpProblem p = d.nominal();
    p.T = T;
    return sclp_simplex(p, tol);
}

}  // namespace sclp
