#include "sclp/oracle.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sclp::oracle {

namespace {

double step_to_boundary(const Vec& v, const Vec& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
    return a;
}

// Quasi-definite augmented system [-(Z/X + rho) A'; A delta] with a fixed
// elimination order. Iterative refinement runs against the unregularized system.
class AugmentedSolver {
public:
    explicit AugmentedSolver(const SpMat& A) : A_(A), At_(A.transpose()) {
        const Eigen::Index m = A.rows(), n = A.cols();
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(A.nonZeros() * 2 + n + m);
        for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(j, j, -1.0);
        for (Eigen::Index i = 0; i < m; ++i) t.emplace_back(n + i, n + i, 1.0);
        for (int k = 0; k < A.outerSize(); ++k)
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                t.emplace_back(n + it.row(), it.col(), it.value());
                t.emplace_back(it.col(), n + it.row(), it.value());
            }
        K_.resize(n + m, n + m);
        K_.setFromTriplets(t.begin(), t.end());
        K_.makeCompressed();
        for (Eigen::Index j = 0; j < n + m; ++j) diag_.push_back(&K_.coeffRef(j, j));
        ldlt_.analyzePattern(K_);
    }

    void factor(const Vec& theta_inv, double rho, double delta) {
        const Eigen::Index m = A_.rows(), n = A_.cols();
        theta_inv_ = theta_inv;
        for (int attempt = 0; attempt < 6; ++attempt) {
            for (Eigen::Index j = 0; j < n; ++j) *diag_[j] = -(theta_inv(j) + rho);
            for (Eigen::Index i = 0; i < m; ++i) *diag_[n + i] = delta;
            ldlt_.factorize(K_);
            if (ldlt_.info() == Eigen::Success) return;
            rho = std::max(rho * 100, 1e-12);
            delta = std::max(delta * 100, 1e-12);
        }
        throw SolverError("interior point: augmented system could not be factorized");
    }

    // Solves -Theta^{-1} dx + A' dy = r1, A dx = r2.
    void solve(const Vec& r1, const Vec& r2, Vec& dx, Vec& dy) const {
        const Eigen::Index m = A_.rows(), n = A_.cols();
        Vec r(n + m);
        r << r1, r2;
        Vec v = ldlt_.solve(r);
        const double scale = 1 + r.cwiseAbs().maxCoeff();
        for (int it = 0; it < 10; ++it) {
            Vec res(n + m);
            res.head(n) = r1 + theta_inv_.cwiseProduct(v.head(n)) - At_ * v.tail(m);
            res.tail(m) = r2 - A_ * v.head(n);
            if (res.cwiseAbs().maxCoeff() <= 1e-14 * scale) break;
            v += ldlt_.solve(res);
        }
        dx = v.head(n);
        dy = v.tail(m);
    }

private:
    const SpMat& A_;
    SpMat At_;
    SpMat K_;
    std::vector<double*> diag_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
    Vec theta_inv_;
};

}  // namespace

// Minimizes -objective' x internally, on a Ruiz-equilibrated copy of the LP.
IpmResult ipm_solve(const SparseLP& lp, const IpmOptions& opt) {
    const Eigen::Index m = lp.A.rows(), n = lp.A.cols();
    Vec rs = Vec::Ones(m), cs = Vec::Ones(n);
    SpMat A = lp.A;
    for (int pass = 0; pass < 10; ++pass) {
        Vec rmax = Vec::Zero(m), cmax = Vec::Zero(n);
        for (int k = 0; k < A.outerSize(); ++k)
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                double v = std::abs(it.value());
                rmax(it.row()) = std::max(rmax(it.row()), v);
                cmax(it.col()) = std::max(cmax(it.col()), v);
            }
        Vec r = rmax.unaryExpr([](double v) { return v > 0 ? 1.0 / std::sqrt(v) : 1.0; });
        Vec c = cmax.unaryExpr([](double v) { return v > 0 ? 1.0 / std::sqrt(v) : 1.0; });
        A = r.asDiagonal() * A * c.asDiagonal();
        rs = rs.cwiseProduct(r);
        cs = cs.cwiseProduct(c);
    }
    const Vec b = rs.cwiseProduct(lp.rhs);
    const Vec c = -cs.cwiseProduct(lp.objective);
    IpmResult res;

    AugmentedSolver ks(A);
    // starting point (Mehrotra): least-norm x and least-squares y
    ks.factor(Vec::Ones(n), 0, 0);
    Vec x, y, tmp;
    ks.solve(Vec::Zero(n), b, x, tmp);
    ks.solve(c, Vec::Zero(m), tmp, y);
    Vec z = c - A.transpose() * y;
    double dx = std::max(-1.5 * x.minCoeff(), 0.0), dz = std::max(-1.5 * z.minCoeff(), 0.0);
    x.array() += dx;
    z.array() += dz;
    double xz = x.dot(z);
    x.array() += 0.5 * xz / std::max(z.sum(), 1e-300);
    z.array() += 0.5 * xz / std::max(x.sum(), 1e-300);
    x = x.cwiseMax(1e-8);
    z = z.cwiseMax(1e-8);

    Vec bx, by;
    double best = std::numeric_limits<double>::infinity();
    int best_it = 0;
    IpmResult best_res;
    const double bnorm = 1 + b.cwiseAbs().maxCoeff();
    const double cnorm = 1 + c.cwiseAbs().maxCoeff();
    for (int it = 0; it < opt.max_iter; ++it) {
        Vec rp = b - A * x;
        Vec rd = c - A.transpose() * y - z;
        double pobj = c.dot(x), dobj = b.dot(y);
        res.primal_residual = rp.cwiseAbs().maxCoeff() / bnorm;
        res.dual_residual = rd.cwiseAbs().maxCoeff() / cnorm;
        res.gap = std::abs(pobj - dobj) / (1 + std::abs(pobj));
        res.complementarity = x.dot(z) / (1 + std::abs(pobj));
        res.iterations = it;
        if (!std::isfinite(res.primal_residual + res.dual_residual + res.gap)) break;
        double merit = std::max({res.primal_residual, res.dual_residual, res.complementarity});
        if (merit < best) {
            best = merit;
            best_it = it;
            best_res = res;
            bx = x;
            by = y;
        }
        if (merit < opt.tol) {
            res.converged = true;
            break;
        }
        if (it - best_it >= opt.stall_iterations) break;
        double mu = x.dot(z) / n;
        ks.factor(z.cwiseQuotient(x), 1e-10, 1e-10);

        auto direction = [&](const Vec& rxz, Vec& ddx, Vec& ddy, Vec& ddz) {
            ks.solve(rd - rxz.cwiseQuotient(x), rp, ddx, ddy);
            ddz = (rxz - z.cwiseProduct(ddx)).cwiseQuotient(x);
        };

        Vec ax, ay, az;
        Vec rxz = -x.cwiseProduct(z);
        direction(rxz, ax, ay, az);
        double ap = step_to_boundary(x, ax), ad = step_to_boundary(z, az);
        double mu_aff = (x + ap * ax).dot(z + ad * az) / n;
        double sigma = std::pow(mu_aff / mu, 3);

        Vec cx, cy, cz;
        rxz = -x.cwiseProduct(z) - ax.cwiseProduct(az);
        rxz.array() += sigma * mu;
        direction(rxz, cx, cy, cz);
        ap = std::min(1.0, 0.995 * step_to_boundary(x, cx));
        ad = std::min(1.0, 0.995 * step_to_boundary(z, cz));
        x += ap * cx;
        y += ad * cy;
        z += ad * cz;
    }
    if (!res.converged) {
        // numerical trouble late in the run: report the best iterate seen
        int iters = res.iterations;
        res = best_res;
        res.iterations = iters;
        x = bx;
        y = by;
    }
    res.x = cs.cwiseProduct(x);
    res.y = -rs.cwiseProduct(y);
    res.objective = lp.objective.dot(res.x);
    return res;
}

}  // namespace sclp::oracle
