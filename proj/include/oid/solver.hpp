#pragma once

#include <string>
#include <vector>

#include "oid/conic.hpp"

namespace oid {

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    Numerical,
};

std::string to_string(SolveStatus s);

struct SolverSettings {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iter = 200;
    double step_fraction = 0.99;  // fraction-to-boundary
    int refine_rounds = 2;        // iterative refinement on KKT solves
    bool verbose = false;
};

struct IterStat {
    int iter;
    double mu;
    double primal_obj, dual_obj;
    double primal_res, dual_res, rel_gap;
    double tau, kappa;
    double step;
};

/// Raw solution of a standard-form problem; all quantities still carry the
/// homogenizing scale tau (divide by tau for the certificate).
struct RawSolution {
    SolveStatus status = SolveStatus::Numerical;
    int iterations = 0;
    std::string message;
    Eigen::VectorXd x, y, s;
    double tau = 1.0, kappa = 0.0;
    double primal_obj = 0.0, dual_obj = 0.0;
    double primal_res = 0.0, dual_res = 0.0, rel_gap = 0.0;
    std::vector<IterStat> trace;
};

RawSolution solve_standard(const StandardProblem& problem, const SolverSettings& settings);

/// Structured solution of a ConicProgram. Dual conventions: with the
/// Lagrangian  L = f - sum_i mult_i * g_i - sum_j redcost_j * x_j
///               - sum_k <lmi_mult_k, LMI_k>,
/// where g_i is the i-th constraint expression (g = 0 or g >= 0),
/// eq_duals holds mult_i, var_duals holds redcost_j >= 0 and lmi_duals the
/// PSD multiplier matrices.
struct Solution {
    SolveStatus status = SolveStatus::Numerical;
    int iterations = 0;
    std::string message;
    double objective = 0.0;
    double dual_objective = 0.0;
    double rel_gap = 0.0, primal_res = 0.0, dual_res = 0.0;

    Eigen::MatrixXcd v;       // Hermitian matrix value
    Eigen::VectorXd vars;     // scalar variable values
    Eigen::VectorXd eq_duals;
    Eigen::VectorXd var_duals;
    std::vector<Eigen::MatrixXd> lmi_duals;
    Eigen::MatrixXcd v_dual;  // multiplier of V >= 0

    std::vector<IterStat> trace;
};

Solution solve(const ConicProgram& program, const SolverSettings& settings = {});

/// KKT residual report for a structured solution.
struct KktReport {
    double primal_eq = 0.0;        // max |g_i| over equalities
    double primal_ineq = 0.0;      // max violation of g_i >= 0
    double primal_cone = 0.0;      // max negative eigenvalue over PSD blocks
    double dual_stationarity = 0.0;
    double dual_cone = 0.0;        // negativity of multipliers
    double complementarity = 0.0;  // max |mult * slack| style product

    double worst() const;
};

KktReport check_kkt(const ConicProgram& program, const Solution& solution);

}  // namespace oid
