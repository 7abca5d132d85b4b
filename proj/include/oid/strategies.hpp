#pragma once

#include <vector>

#include "oid/recovery.hpp"

namespace oid {

/// Rewrite a base spec for one of the named dispatch strategies. Throws on
/// contradictory pins (for example reactive control with a reactive pin).
DispatchSpec strategy_spec(StrategyKind kind, const DispatchSpec& base);

/// Restriction of the base spec used for objective-dominance comparisons:
/// identical weights, only the pins differ, and the power-factor cut is
/// dropped everywhere so the feasible sets nest exactly.
DispatchSpec comparison_variant(StrategyKind kind, const DispatchSpec& base);

struct SelectionCount {
    int count = 0;
    std::vector<int> selected;  // house indices
};

/// A house is selected when its setpoint pair moved away from zero.
SelectionCount count_selected(const Eigen::VectorXd& p_curtail,
                              const Eigen::VectorXd& q_set, double eps = 1e-4);

std::vector<double> default_lambda_grid(int points = 17, double lo = 1e-3,
                                        double hi = 10.0);

struct SweepEntry {
    double lambda = 0.0;
    int count = 0;
    double objective = 0.0;
    double loss = 0.0;
    bool tight = false;
};

struct LambdaSelection {
    bool found = false;        // some grid point met the target
    double lambda = 0.0;       // smallest such lambda (or grid max when floor hit)
    int floor_count = 0;       // smallest count seen over the grid
    std::vector<SweepEntry> sweep;  // in increasing lambda order
    DispatchSolution solution;      // solve at the reported lambda
};

/// Sweep the group weight over a grid (optionally refined by bisection) and
/// pick the smallest value whose solution controls at most target_k houses.
LambdaSelection select_lambda(const FeederModel& model, const ScenarioStep& step,
                              const DispatchSpec& spec,
                              const std::vector<InverterSpec>& inverters, int target_k,
                              std::vector<double> grid = {},
                              const SolverSettings& settings = {},
                              bool bisection_refine = false);

/// Per-house group weights increasing in past selection frequency:
/// lambda_h = lambda * (1 + freq_h).
std::vector<double> equitable_weights(const std::vector<std::vector<int>>& history,
                                      double lambda, int num_houses);

}  // namespace oid
