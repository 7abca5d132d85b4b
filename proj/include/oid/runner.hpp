#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oid/metrics.hpp"
#include "oid/oracle.hpp"
#include "oid/strategies.hpp"

namespace oid {

/// Run fn(0..count-1) on a bounded worker pool; results must be written to
/// pre-sized slots so the output order is deterministic.
void parallel_for(size_t count, const std::function<void(size_t)>& fn);

struct StepOutcome {
    int step_index = 0;
    DispatchSolution solution;
    StepMetrics metrics;
};

struct DayRun {
    std::vector<StepOutcome> steps;
    DayAggregate summary;
    bool all_optimal = true;
    bool all_tight = true;
};

DayRun run_day(const FeederModel& model, const Scenario& scenario,
               const DispatchSpec& spec, const SolverSettings& settings = {},
               double c_retail = 0.12);

/// No-control voltage profiles per step via the power-flow oracle.
struct BaselineRun {
    std::vector<PowerFlowResult> steps;
    bool all_converged = true;
};

BaselineRun run_baseline(const FeederModel& model, const Scenario& scenario);

std::string baseline_csv(const BaselineRun& run, const Scenario& scenario);

SolverSettings settings_from_env();

}  // namespace oid
