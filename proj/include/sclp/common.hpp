#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace sclp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IndexList = std::vector<int>;

// Shared numeric thresholds. Every solver layer reads from here.
struct Tolerances {
    double feasibility = 1e-9;
    double optimality = 1e-9;
    double pivot = 1e-10;
    double ratio_negative = 1e-10;   // a derivative counts as negative below -this
    int refactor_every = 50;
    int bland_after_factor = 3;      // Bland's rule after factor*m degenerate pivots
};

const Tolerances& default_tolerances();

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegeneracyError : public SolverError {
public:
    DegeneracyError(const std::string& what, double theta, std::vector<std::string> tied)
        : SolverError(what), theta_(theta), tied_(std::move(tied)) {}
    double theta() const { return theta_; }
    const std::vector<std::string>& tied_set() const { return tied_; }

private:
    double theta_;
    std::vector<std::string> tied_;
};

class RobustInfeasibleError : public SolverError {
public:
    using SolverError::SolverError;
};

inline bool contains(const IndexList& s, int v) {
    for (int x : s)
        if (x == v) return true;
    return false;
}

}  // namespace sclp
