#pragma once

#include "sclp/common.hpp"

#include <memory>
#include <string>
#include <vector>

namespace sclp::lp {

enum class Sign { Free, Nonneg, Zero };
enum class Sense { Max, Min };
enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

// Equality-form LP:  opt c'x  s.t.  A x = rhs,  x_j restricted by signs[j].
struct Instance {
    Mat A;
    Vec rhs;
    Vec objective;
    Sense sense = Sense::Max;
    std::vector<Sign> signs;

    int rows() const { return static_cast<int>(A.rows()); }
    int cols() const { return static_cast<int>(A.cols()); }
    void check() const;
};

// Ordered basic variables; basic[r] is the variable of row position r.
struct Basis {
    IndexList basic;
    std::shared_ptr<const Mat> inverse;  // explicit B^-1 when known, may be null
    int updates = 0;

    bool empty() const { return basic.empty(); }
};

struct Result {
    Status status = Status::Infeasible;
    Basis basis;
    Vec x;          // primal values
    Vec y;          // row duals, y = c_B' B^-1
    Vec reduced;    // dual slacks, >= 0 for Nonneg at optimum (either sense)
    double objective = 0;
    int iterations = 0;
    int degenerate_pivots = 0;
    bool used_bland = false;
};

Result solve(const Instance& lp, const Basis* warm = nullptr,
             const Tolerances& tol = default_tolerances());

// Replace `leaving` by `entering` in the basis. Throws SolverError when the
// resulting basis matrix is singular (the two bases are not adjacent).
Basis pivot(const Instance& lp, const Basis& basis, int entering, int leaving,
            const Tolerances& tol = default_tolerances());

struct AddRowResult {
    Instance instance;  // augmented with the row and a slack column
    Result result;
};

// Append `row . x + s = rhs` with a fresh slack s of sign `slack` and
// re-optimize from `basis` extended by the slack (dual simplex).
AddRowResult add_row(const Instance& lp, const Basis& basis, const Vec& row, double rhs,
                     Sign slack = Sign::Nonneg, const Tolerances& tol = default_tolerances());

// Symmetric difference size of two bases, as sets.
int basis_distance(const IndexList& a, const IndexList& b);

// Plain text dump: header line "m n sense", then A|rhs rows, objective, signs.
std::string debug_dump(const Instance& lp);

}  // namespace sclp::lp
