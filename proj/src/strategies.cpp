#include "oid/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oid/metrics.hpp"
#include "oid/runner.hpp"

namespace oid {

DispatchSpec strategy_spec(StrategyKind kind, const DispatchSpec& base) {
    DispatchSpec spec = base;
    switch (kind) {
        case StrategyKind::Oid:
            if (spec.pin_curtail_zero || spec.pin_reactive_zero)
                throw std::invalid_argument("joint dispatch cannot carry pins");
            spec.lambda_p = 0.0;
            spec.lambda_q = 0.0;
            break;
        case StrategyKind::Apc:
            if (spec.pin_curtail_zero)
                throw std::invalid_argument("curtailment-only strategy with curtailment pinned");
            spec.pin_reactive_zero = true;
            spec.lambda = 0.0;
            spec.lambda_h.reset();
            spec.lambda_q = 0.0;
            break;
        case StrategyKind::Rpc:
            if (spec.pin_reactive_zero)
                throw std::invalid_argument("reactive-only strategy with reactive power pinned");
            spec.pin_curtail_zero = true;
            spec.lambda = 0.0;
            spec.lambda_h.reset();
            spec.lambda_p = 0.0;
            // operating at the available-power point can push the power factor
            // below any sensible floor, so the cut is dropped for this strategy
            spec.enforce_pf = false;
            break;
        case StrategyKind::Mixed:
            if (spec.pin_curtail_zero || spec.pin_reactive_zero)
                throw std::invalid_argument("mixed strategy cannot carry pins");
            if (spec.lambda <= 0 || spec.lambda_p <= 0 || spec.lambda_q <= 0)
                throw std::invalid_argument(
                    "mixed strategy needs all three regularization weights positive");
            break;
    }
    return spec;
}

DispatchSpec comparison_variant(StrategyKind kind, const DispatchSpec& base) {
    if (base.lambda_p > 0 || base.lambda_q > 0)
        throw std::invalid_argument(
            "dominance comparisons need a base spec without entrywise weights");
    DispatchSpec spec = base;
    spec.enforce_pf = false;
    spec.pin_curtail_zero = false;
    spec.pin_reactive_zero = false;
    switch (kind) {
        case StrategyKind::Oid:
            break;
        case StrategyKind::Rpc:
            spec.pin_curtail_zero = true;
            break;
        case StrategyKind::Apc:
            spec.pin_reactive_zero = true;
            break;
        case StrategyKind::Mixed:
            spec.lambda_p = 0.02;
            spec.lambda_q = 0.02;
            break;
    }
    return spec;
}

SelectionCount count_selected(const Eigen::VectorXd& p_curtail,
                              const Eigen::VectorXd& q_set, double eps) {
    if (p_curtail.size() != q_set.size())
        throw std::invalid_argument("setpoint vectors are misaligned");
    SelectionCount out;
    for (int h = 0; h < p_curtail.size(); ++h)
        if (std::hypot(p_curtail(h), q_set(h)) > eps) {
            ++out.count;
            out.selected.push_back(h);
        }
    return out;
}

std::vector<double> default_lambda_grid(int points, double lo, double hi) {
    std::vector<double> grid(points);
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(step * i);
    return grid;
}

namespace {

SweepEntry entry_for(double lambda, const DispatchSolution& sol,
                     const FeederModel& model) {
    SweepEntry e;
    e.lambda = lambda;
    e.objective = sol.objective;
    e.tight = sol.tight;
    if (sol.status == SolveStatus::Optimal) {
        e.count = count_selected(sol.p_curtail, sol.q_set).count;
        if (sol.tight) e.loss = losses(sol.v, model);
    } else {
        e.count = -1;
    }
    return e;
}

}  // namespace

LambdaSelection select_lambda(const FeederModel& model, const ScenarioStep& step,
                              const DispatchSpec& spec,
                              const std::vector<InverterSpec>& inverters, int target_k,
                              std::vector<double> grid, const SolverSettings& settings,
                              bool bisection_refine) {
    if (grid.empty()) grid = default_lambda_grid();
    std::sort(grid.begin(), grid.end());

    std::vector<DispatchSolution> sols(grid.size());
    parallel_for(grid.size(), [&](size_t i) {
        DispatchSpec s = spec;
        s.lambda = grid[i];
        s.lambda_h.reset();
        sols[i] = solve_dispatch(model, step, s, inverters, settings);
    });

    LambdaSelection out;
    if (sols.empty()) return out;
    if (sols.front().status != SolveStatus::Optimal &&
        grid.front() == 0.0)
        throw std::runtime_error("dispatch infeasible at zero regularization: " +
                                 sols.front().conic.message);

    out.floor_count = std::numeric_limits<int>::max();
    int pick = -1;
    for (size_t i = 0; i < grid.size(); ++i) {
        out.sweep.push_back(entry_for(grid[i], sols[i], model));
        const auto& e = out.sweep.back();
        if (e.count >= 0) out.floor_count = std::min(out.floor_count, e.count);
        if (pick < 0 && e.count >= 0 && e.count <= target_k)
            pick = static_cast<int>(i);
    }
    if (out.floor_count == std::numeric_limits<int>::max()) out.floor_count = -1;

    if (pick < 0) {
        out.found = false;
        out.lambda = grid.back();
        out.solution = std::move(sols.back());
        return out;
    }
    out.found = true;
    double lo = pick > 0 ? grid[pick - 1] : 0.0;
    double hi = grid[pick];
    DispatchSolution best = std::move(sols[pick]);
    if (bisection_refine && pick > 0) {
        for (int it = 0; it < 12; ++it) {
            const double mid = 0.5 * (lo + hi);
            DispatchSpec s = spec;
            s.lambda = mid;
            s.lambda_h.reset();
            DispatchSolution sol = solve_dispatch(model, step, s, inverters, settings);
            const int count = sol.status == SolveStatus::Optimal
                                  ? count_selected(sol.p_curtail, sol.q_set).count
                                  : -1;
            if (count >= 0 && count <= target_k) {
                hi = mid;
                best = std::move(sol);
            } else {
                lo = mid;
            }
        }
    }
    out.lambda = hi;
    out.solution = std::move(best);
    return out;
}

std::vector<double> equitable_weights(const std::vector<std::vector<int>>& history,
                                      double lambda, int num_houses) {
    if (history.empty()) throw std::invalid_argument("selection history is empty");
    std::vector<double> freq(num_houses, 0.0);
    for (const auto& sel : history)
        for (int h : sel) {
            if (h < 0 || h >= num_houses)
                throw std::invalid_argument("house index out of range in history");
            freq[h] += 1.0;
        }
    std::vector<double> weights(num_houses);
    for (int h = 0; h < num_houses; ++h)
        weights[h] = lambda * (1.0 + freq[h] / history.size());
    return weights;
}

}  // namespace oid
