#include "sclp/lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace sclp::lp {

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "Optimal";
        case Status::Infeasible: return "Infeasible";
        case Status::Unbounded: return "Unbounded";
    }
    return "?";
}

void Instance::check() const {
    if (rhs.size() != A.rows()) throw SolverError("lp: rhs length does not match row count");
    if (objective.size() != A.cols()) throw SolverError("lp: objective length does not match column count");
    if (static_cast<Eigen::Index>(signs.size()) != A.cols())
        throw SolverError("lp: sign pattern length does not match column count");
}

int basis_distance(const IndexList& a, const IndexList& b) {
    std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    int d = 0;
    for (int v : sa)
        if (!sb.count(v)) ++d;
    for (int v : sb)
        if (!sa.count(v)) ++d;
    return d;
}

namespace {

enum class Outcome { Done, Unbounded, Infeasible };

// Revised simplex on an explicit basis inverse with product-form updates.
class Engine {
public:
    Engine(const Mat& A, const Vec& b, std::vector<Sign> signs, const Tolerances& tol)
        : A_(A), b_(b), sign_(std::move(signs)), tol_(tol), m_(static_cast<int>(A.rows())),
          n_(static_cast<int>(A.cols())) {
        limit_ = 100 * (m_ + n_) + 1000;
    }

    bool set_basis(const IndexList& basic) {
        basic_ = basic;
        pos_.assign(n_, -1);
        for (int r = 0; r < m_; ++r) pos_[basic_[r]] = r;
        return refactor();
    }

    bool refactor() {
        if (m_ == 0) {
            Binv_.resize(0, 0);
            xB_.resize(0);
            return true;
        }
        Mat B(m_, m_);
        for (int r = 0; r < m_; ++r) B.col(r) = A_.col(basic_[r]);
        Eigen::FullPivLU<Mat> lu(B);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) return false;
        Binv_ = lu.inverse();
        updates_ = 0;
        xB_ = Binv_ * b_;
        return true;
    }

    Vec duals(const Vec& c) const {
        Vec cB(m_);
        for (int r = 0; r < m_; ++r) cB(r) = c(basic_[r]);
        return Binv_.transpose() * cB;
    }

    double reduced(const Vec& c, const Vec& y, int j) const { return c(j) - A_.col(j).dot(y); }

    bool primal_feasible() const {
        for (int r = 0; r < m_; ++r)
            if (sign_[basic_[r]] == Sign::Nonneg && xB_(r) < -feas_scale()) return false;
        return true;
    }

    bool dual_feasible(const Vec& c) const {
        Vec y = duals(c);
        for (int j = 0; j < n_; ++j) {
            if (pos_[j] >= 0 || sign_[j] == Sign::Zero) continue;
            double d = reduced(c, y, j);
            if (sign_[j] == Sign::Nonneg && d > tol_.optimality) return false;
            if (sign_[j] == Sign::Free && std::abs(d) > tol_.optimality) return false;
        }
        return true;
    }

    // Shift costs of dual-infeasible nonbasic columns so the basis becomes dual feasible.
    Vec shifted_costs(const Vec& c) const {
        Vec cs = c;
        Vec y = duals(c);
        for (int j = 0; j < n_; ++j) {
            if (pos_[j] >= 0 || sign_[j] == Sign::Zero) continue;
            double d = reduced(c, y, j);
            if ((sign_[j] == Sign::Nonneg && d > 0) || sign_[j] == Sign::Free) cs(j) -= d;
        }
        return cs;
    }

    Outcome primal(const Vec& c) {
        int consecutive = 0;
        bool bland = false;
        for (;;) {
            guard();
            Vec y = duals(c);
            int enter = -1;
            double best = 0, d_enter = 0;
            for (int j = 0; j < n_; ++j) {
                if (pos_[j] >= 0 || sign_[j] == Sign::Zero) continue;
                double d = reduced(c, y, j);
                bool ok = sign_[j] == Sign::Nonneg ? d > tol_.optimality : std::abs(d) > tol_.optimality;
                if (!ok) continue;
                if (bland) {
                    enter = j;
                    d_enter = d;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    d_enter = d;
                }
            }
            if (enter < 0) return Outcome::Done;
            double dir = d_enter > 0 ? 1.0 : -1.0;
            Vec w = Binv_ * A_.col(enter);

            int leave = -1;
            double ratio = 0, piv = 0;
            for (int r = 0; r < m_; ++r) {
                if (sign_[basic_[r]] != Sign::Nonneg) continue;
                double alpha = dir * w(r);
                if (alpha <= tol_.pivot) continue;
                double t = std::max(xB_(r), 0.0) / alpha;
                if (leave < 0 || t < ratio - 1e-12 * std::max(1.0, ratio)) {
                    leave = r, ratio = t, piv = alpha;
                } else if (std::abs(t - ratio) <= 1e-12 * std::max(1.0, ratio)) {
                    bool take = bland ? basic_[r] < basic_[leave] : alpha > piv;
                    if (take) leave = r, ratio = std::min(t, ratio), piv = alpha;
                }
            }
            if (leave < 0) return Outcome::Unbounded;

            xB_ -= (dir * ratio) * w;
            xB_(leave) = dir * ratio;
            exchange(leave, enter, w);
            count_degenerate(ratio <= tol_.feasibility, consecutive, bland);
        }
    }

    Outcome dual(const Vec& c) {
        int consecutive = 0;
        bool bland = false;
        for (;;) {
            guard();
            int leave = -1;
            double worst = 0;
            for (int r = 0; r < m_; ++r) {
                if (sign_[basic_[r]] != Sign::Nonneg) continue;
                if (xB_(r) >= -feas_scale()) continue;
                if (bland) {
                    if (leave < 0 || basic_[r] < basic_[leave]) leave = r;
                } else if (xB_(r) < worst) {
                    worst = xB_(r);
                    leave = r;
                }
            }
            if (leave < 0) return Outcome::Done;

            Vec y = duals(c);
            Vec row = Binv_.row(leave).transpose();
            int enter = -1;
            double ratio = 0, piv = 0;
            for (int j = 0; j < n_; ++j) {
                if (pos_[j] >= 0 || sign_[j] == Sign::Zero) continue;
                double alpha = row.dot(A_.col(j));
                double t;
                if (sign_[j] == Sign::Nonneg) {
                    if (alpha >= -tol_.pivot) continue;
                    t = std::max(-reduced(c, y, j), 0.0) / (-alpha);
                } else {
                    if (std::abs(alpha) <= tol_.pivot) continue;
                    t = std::abs(reduced(c, y, j)) / std::abs(alpha);
                }
                if (enter < 0 || t < ratio - 1e-12 * std::max(1.0, ratio)) {
                    enter = j, ratio = t, piv = std::abs(alpha);
                } else if (std::abs(t - ratio) <= 1e-12 * std::max(1.0, ratio)) {
                    bool take = bland ? false : std::abs(alpha) > piv;
                    if (take) enter = j, ratio = std::min(t, ratio), piv = std::abs(alpha);
                }
            }
            if (enter < 0) return Outcome::Infeasible;

            Vec w = Binv_ * A_.col(enter);
            double theta = xB_(leave) / w(leave);
            xB_ -= theta * w;
            xB_(leave) = theta;
            exchange(leave, enter, w);
            count_degenerate(ratio <= tol_.optimality, consecutive, bland);
        }
    }

    // Pivot basic variable at row r out in favour of the best available column.
    bool pivot_out(int r, int n_allowed) {
        Vec row = Binv_.row(r).transpose();
        int enter = -1;
        double best = tol_.pivot * 100;
        for (int j = 0; j < n_allowed; ++j) {
            if (pos_[j] >= 0 || sign_[j] == Sign::Zero) continue;
            double alpha = std::abs(row.dot(A_.col(j)));
            if (alpha > best) best = alpha, enter = j;
        }
        if (enter < 0) return false;
        Vec w = Binv_ * A_.col(enter);
        double theta = xB_(r) / w(r);
        xB_ -= theta * w;
        xB_(r) = theta;
        exchange(r, enter, w);
        return true;
    }

    void exchange(int r, int enter, const Vec& w) {
        double p = w(r);
        Binv_.row(r) /= p;
        for (int i = 0; i < m_; ++i)
            if (i != r && w(i) != 0.0) Binv_.row(i) -= w(i) * Binv_.row(r);
        pos_[basic_[r]] = -1;
        basic_[r] = enter;
        pos_[enter] = r;
        ++iterations_;
        if (++updates_ >= tol_.refactor_every) {
            if (!refactor()) throw SolverError("lp: basis became singular during refactorization");
        }
    }

    void count_degenerate(bool degenerate, int& consecutive, bool& bland) {
        if (degenerate) {
            ++degenerate_;
            if (++consecutive >= tol_.bland_after_factor * std::max(m_, 1)) {
                bland = true;
                used_bland_ = true;
            }
        } else {
            consecutive = 0;
            bland = false;
        }
    }

    void guard() const {
        if (iterations_ > limit_) throw SolverError("lp: iteration limit exceeded");
    }

    double feas_scale() const { return tol_.feasibility * (1.0 + bnorm_); }

    Vec values() const {
        Vec x = Vec::Zero(n_);
        for (int r = 0; r < m_; ++r) x(basic_[r]) = xB_(r);
        return x;
    }

    const Mat& A_;
    const Vec& b_;
    std::vector<Sign> sign_;
    const Tolerances& tol_;
    int m_, n_;
    IndexList basic_;
    std::vector<int> pos_;
    Mat Binv_;
    Vec xB_;
    int updates_ = 0;
    int iterations_ = 0;
    int degenerate_ = 0;
    bool used_bland_ = false;
    int limit_;
    double bnorm_ = 0;
};

Result finish(Engine& e, const Instance& lp, const Vec& c_int, Status status) {
    Result res;
    res.status = status;
    const int n = lp.cols();
    Vec x_all = e.values();
    res.x = x_all.head(n);
    Vec y = e.duals(c_int);
    res.y = lp.sense == Sense::Max ? y : Vec(-y);
    res.reduced.resize(n);
    for (int j = 0; j < n; ++j) res.reduced(j) = lp.A.col(j).dot(y) - c_int(j);
    res.objective = lp.objective.dot(res.x);
    res.basis.basic = e.basic_;
    res.basis.inverse = std::make_shared<const Mat>(e.Binv_);
    res.iterations = e.iterations_;
    res.degenerate_pivots = e.degenerate_;
    res.used_bland = e.used_bland_;
    return res;
}

// Phase 2 followed by a clean-up loop that restores feasibility lost to rounding.
Status optimize(Engine& e, const Vec& c) {
    for (int round = 0; round < 4; ++round) {
        Outcome o = e.primal(c);
        if (o == Outcome::Unbounded) return Status::Unbounded;
        if (!e.refactor()) throw SolverError("lp: singular basis at optimum");
        if (e.primal_feasible() && e.dual_feasible(c)) return Status::Optimal;
        if (!e.primal_feasible()) {
            Vec cs = e.shifted_costs(c);
            if (e.dual(cs) == Outcome::Infeasible) return Status::Infeasible;
        }
    }
    throw SolverError("lp: failed to converge after repeated clean-up rounds");
}

Result solve_cold(const Instance& lp, const Vec& c, const Tolerances& tol) {
    const int m = lp.rows(), n = lp.cols();
    Mat Aug(m, n + m);
    Aug.leftCols(n) = lp.A;
    Aug.rightCols(m).setZero();
    std::vector<Sign> signs = lp.signs;
    IndexList basic(m);
    for (int i = 0; i < m; ++i) {
        Aug(i, n + i) = lp.rhs(i) >= 0 ? 1.0 : -1.0;
        signs.push_back(Sign::Nonneg);
        basic[i] = n + i;
    }
    Engine e(Aug, lp.rhs, signs, tol);
    e.bnorm_ = lp.rhs.size() ? lp.rhs.cwiseAbs().maxCoeff() : 0.0;
    e.set_basis(basic);

    Vec c1 = Vec::Zero(n + m);
    c1.tail(m).setConstant(-1.0);
    e.primal(c1);
    e.refactor();
    double infeas = 0;
    for (int r = 0; r < m; ++r)
        if (e.basic_[r] >= n) infeas += std::abs(e.xB_(r));
    if (infeas > e.feas_scale() * std::max(1, m)) {
        Vec cfull = Vec::Zero(n + m);
        cfull.head(n) = c;
        Result res = finish(e, lp, cfull, Status::Infeasible);
        return res;
    }
    for (int r = 0; r < m; ++r) {
        if (e.basic_[r] < n) continue;
        if (!e.pivot_out(r, n))
            throw SolverError("lp: constraint matrix is rank deficient (row " + std::to_string(r) +
                              " is redundant)");
    }
    for (int i = 0; i < m; ++i) e.sign_[n + i] = Sign::Zero;
    if (!e.refactor()) throw SolverError("lp: singular basis after phase 1");

    Vec cfull = Vec::Zero(n + m);
    cfull.head(n) = c;
    Status st = optimize(e, cfull);
    return finish(e, lp, cfull, st);
}

}  // namespace

Result solve(const Instance& lp, const Basis* warm, const Tolerances& tol) {
    lp.check();
    const int m = lp.rows(), n = lp.cols();
    Vec c = lp.sense == Sense::Max ? lp.objective : Vec(-lp.objective);

    if (m == 0) {
        Result res;
        res.x = Vec::Zero(n);
        res.y = Vec::Zero(0);
        res.reduced = -c;
        res.status = Status::Optimal;
        for (int j = 0; j < n; ++j) {
            if (lp.signs[j] == Sign::Nonneg && c(j) > tol.optimality) res.status = Status::Unbounded;
            if (lp.signs[j] == Sign::Free && std::abs(c(j)) > tol.optimality) res.status = Status::Unbounded;
        }
        return res;
    }

    if (warm && static_cast<int>(warm->basic.size()) == m) {
        bool ok = true;
        std::vector<char> seen(n, 0);
        for (int v : warm->basic) {
            if (v < 0 || v >= n || seen[v]) {
                ok = false;
                break;
            }
            seen[v] = 1;
        }
        if (ok) {
            Engine e(lp.A, lp.rhs, lp.signs, tol);
            e.bnorm_ = lp.rhs.cwiseAbs().maxCoeff();
            if (e.set_basis(warm->basic)) {
                for (int r = 0; r < m && ok; ++r)
                    if (lp.signs[e.basic_[r]] == Sign::Zero) ok = e.pivot_out(r, n);
                if (ok && e.refactor()) {
                    if (!e.primal_feasible()) {
                        Vec cs = e.dual_feasible(c) ? c : e.shifted_costs(c);
                        if (e.dual(cs) == Outcome::Infeasible) return finish(e, lp, c, Status::Infeasible);
                    }
                    Status st = optimize(e, c);
                    return finish(e, lp, c, st);
                }
            }
        }
    }
    return solve_cold(lp, c, tol);
}

Basis pivot(const Instance& lp, const Basis& basis, int entering, int leaving, const Tolerances& tol) {
    const int m = lp.rows();
    if (static_cast<int>(basis.basic.size()) != m) throw SolverError("pivot: basis size mismatch");
    if (lp.signs.at(entering) == Sign::Zero) throw SolverError("pivot: entering variable is fixed at zero");
    int r = -1;
    for (int i = 0; i < m; ++i) {
        if (basis.basic[i] == entering) throw SolverError("pivot: entering variable already basic");
        if (basis.basic[i] == leaving) r = i;
    }
    if (r < 0) throw SolverError("pivot: leaving variable is not basic");

    Mat Binv;
    int updates = basis.updates;
    if (basis.inverse) {
        Binv = *basis.inverse;
    } else {
        Mat B(m, m);
        for (int i = 0; i < m; ++i) B.col(i) = lp.A.col(basis.basic[i]);
        Eigen::FullPivLU<Mat> lu(B);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) throw SolverError("pivot: input basis is singular");
        Binv = lu.inverse();
        updates = 0;
    }
    Vec w = Binv * lp.A.col(entering);
    if (std::abs(w(r)) <= tol.pivot * std::max(1.0, w.cwiseAbs().maxCoeff()))
        throw SolverError("pivot: resulting basis is singular (variables not adjacent)");
    double p = w(r);
    Binv.row(r) /= p;
    for (int i = 0; i < m; ++i)
        if (i != r && w(i) != 0.0) Binv.row(i) -= w(i) * Binv.row(r);

    Basis out;
    out.basic = basis.basic;
    out.basic[r] = entering;
    out.updates = updates + 1;
    if (out.updates >= tol.refactor_every) {
        Mat B(m, m);
        for (int i = 0; i < m; ++i) B.col(i) = lp.A.col(out.basic[i]);
        Binv = B.fullPivLu().inverse();
        out.updates = 0;
    }
    out.inverse = std::make_shared<const Mat>(std::move(Binv));
    return out;
}

AddRowResult add_row(const Instance& lp, const Basis& basis, const Vec& row, double rhs, Sign slack,
                     const Tolerances& tol) {
    const int m = lp.rows(), n = lp.cols();
    if (row.size() != n) throw SolverError("add_row: row length mismatch");
    AddRowResult out;
    Instance& aug = out.instance;
    aug.A = Mat::Zero(m + 1, n + 1);
    aug.A.topLeftCorner(m, n) = lp.A;
    aug.A.block(m, 0, 1, n) = row.transpose();
    aug.A(m, n) = 1.0;
    aug.rhs.resize(m + 1);
    aug.rhs << lp.rhs, rhs;
    aug.objective.resize(n + 1);
    aug.objective << lp.objective, 0.0;
    aug.sense = lp.sense;
    aug.signs = lp.signs;
    aug.signs.push_back(slack);

    Basis warm;
    warm.basic = basis.basic;
    warm.basic.push_back(n);
    out.result = solve(aug, &warm, tol);
    return out;
}

std::string debug_dump(const Instance& lp) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << lp.rows() << " " << lp.cols() << " " << (lp.sense == Sense::Max ? "max" : "min") << "\n";
    for (int i = 0; i < lp.rows(); ++i) {
        for (int j = 0; j < lp.cols(); ++j) os << lp.A(i, j) << " ";
        os << "| " << lp.rhs(i) << "\n";
    }
    os << "c";
    for (int j = 0; j < lp.cols(); ++j) os << " " << lp.objective(j);
    os << "\ns";
    for (Sign s : lp.signs) os << " " << (s == Sign::Free ? 'F' : s == Sign::Nonneg ? 'N' : 'Z');
    os << "\n";
    return os.str();
}

}  // namespace sclp::lp
