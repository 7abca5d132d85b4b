#pragma once

#include <cstdint>
#include <vector>

#include "oid/recovery.hpp"

namespace oid {

struct PowerFlowResult {
    Eigen::VectorXcd v;
    Eigen::VectorXcd current;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;
};

/// Full Newton-Raphson power flow in polar coordinates, flat start at the
/// slack magnitude. injections holds the complex power injected at each
/// node (pu, ignored at the slack).
PowerFlowResult newton_power_flow(const FeederModel& model,
                                  const Eigen::VectorXcd& injections, double v_slack,
                                  int max_iter = 50, double tol = 1e-12);

/// Injections for a scenario step given inverter setpoints.
Eigen::VectorXcd step_injections(const FeederModel& model, const ScenarioStep& step,
                                 const Eigen::VectorXd& p_set,
                                 const Eigen::VectorXd& q_set);

/// Injections of the no-control baseline (p_set = available, q_set = 0).
Eigen::VectorXcd baseline_injections(const FeederModel& model, const ScenarioStep& step);

struct AssignmentOutcome {
    std::uint32_t mask = 0;
    SolveStatus status = SolveStatus::Numerical;
    bool tight = false;
    double objective = 0.0;
};

struct ExhaustiveResult {
    bool found = false;
    std::uint32_t best_mask = 0;
    double best_objective = 0.0;
    DispatchSolution best;
    std::vector<AssignmentOutcome> assignments;
};

/// Ground-truth search over inverter subsets of size at most k: unselected
/// inverters are pinned to their maximum-power unity-pf point and the
/// relaxed program is solved per assignment. Intended for tiny feeders;
/// throws when the house count exceeds five.
ExhaustiveResult minp_exhaustive(const FeederModel& model, const ScenarioStep& step,
                                 const DispatchSpec& spec,
                                 const std::vector<InverterSpec>& inverters, int k,
                                 const SolverSettings& settings = {});

/// Closed-form group-sparse setpoint: block soft-thresholding with the
/// scalar subproblem solved by bracketed golden-section search.
Eigen::Vector2d soft_threshold_setpoint(const Eigen::Matrix2d& quad,
                                        const Eigen::Vector2d& lin, double lambda);

struct HouseCrosscheck {
    bool applicable = false;
    bool selected = false;
    double c_norm = 0.0;      // norm of the reconstructed linear term
    double lambda = 0.0;
    Eigen::Vector2d predicted = Eigen::Vector2d::Zero();
    Eigen::Vector2d actual = Eigen::Vector2d::Zero();
    double discrepancy = 0.0;
};

struct DualCrosscheckReport {
    bool applicable = false;  // spec matches the closed-form assumptions
    std::vector<HouseCrosscheck> houses;
    double max_discrepancy = 0.0;
};

/// Rebuild each house's quadratic subproblem from the returned multipliers
/// and compare the closed-form setpoint against the solver's. Requires a
/// spec with no flatness term, no power-factor cuts, no entrywise weights
/// and no pins.
DualCrosscheckReport crosscheck_duals(const DispatchProblem& problem,
                                      const Solution& solution,
                                      const ScenarioStep& step,
                                      const DispatchSpec& spec);

}  // namespace oid
