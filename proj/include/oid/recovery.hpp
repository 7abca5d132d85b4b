#pragma once

#include "oid/formulation.hpp"
#include "oid/solver.hpp"

namespace oid {

struct RankInfo {
    double lambda1 = 0.0;  // dominant eigenvalue
    double lambda2 = 0.0;  // second eigenvalue (after pair deduplication)
    double ratio = 0.0;    // lambda2 / lambda1
};

struct PhasorExtraction {
    RankInfo rank;
    bool tight = false;
    Eigen::VectorXcd v;        // empty unless tight
    Eigen::VectorXcd current;  // injected currents, Y v
};

/// Eigen-decompose the PSD matrix on its real embedding, deduplicate the
/// paired spectrum, and recover phase-anchored phasors when the matrix is
/// numerically rank one. No phasors are fabricated otherwise.
PhasorExtraction extract_phasors(const Eigen::MatrixXcd& v_mat,
                                 const Eigen::MatrixXcd& admittance,
                                 double rank_tol = 1e-5);

/// Physical quantities recovered from one dispatch solve.
struct DispatchSolution {
    SolveStatus status = SolveStatus::Numerical;
    bool tight = false;
    RankInfo rank;

    Eigen::VectorXcd v;        // node phasors (empty when not tight)
    Eigen::VectorXcd current;  // injected currents
    Eigen::VectorXd p_curtail, q_set, p_set;  // per house
    Eigen::VectorXd cost_epi, group_epi;      // auxiliaries (zero when absent)
    double deviation_epi = 0.0;

    double objective = 0.0;
    double loss_term = 0.0;       // weighted loss part of the objective
    double curtail_term = 0.0;    // weighted curtailment cost
    double deviation_term = 0.0;  // weighted flatness term
    double regularizer_term = 0.0;

    Solution conic;  // full conic solution, duals included
};

DispatchSolution recover(const DispatchProblem& problem, const Solution& solution,
                         const FeederModel& model, const ScenarioStep& step,
                         const DispatchSpec& spec, double rank_tol = 1e-5);

/// Convenience wrapper: assemble, solve, recover.
DispatchSolution solve_dispatch(const FeederModel& model, const ScenarioStep& step,
                                const DispatchSpec& spec,
                                const std::vector<InverterSpec>& inverters,
                                const SolverSettings& settings = {},
                                std::vector<bool> control_mask = {},
                                double rank_tol = 1e-5);

}  // namespace oid
