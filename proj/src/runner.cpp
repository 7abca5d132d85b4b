#include "oid/runner.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace oid {

void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
    if (count == 0) return;
    const size_t workers =
        std::min(count, static_cast<size_t>(std::max(1u, std::thread::hardware_concurrency())));
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

DayRun run_day(const FeederModel& model, const Scenario& scenario,
               const DispatchSpec& spec, const SolverSettings& settings,
               double c_retail) {
    DayRun out;
    out.steps.resize(scenario.steps.size());
    parallel_for(scenario.steps.size(), [&](size_t i) {
        const ScenarioStep& step = scenario.steps[i];
        StepOutcome& slot = out.steps[i];
        slot.step_index = static_cast<int>(i);
        slot.solution = solve_dispatch(model, step, spec, scenario.inverters, settings);
        slot.metrics = step_metrics(slot.solution, model, step.time_h);
    });
    std::vector<StepMetrics> metrics;
    for (const auto& s : out.steps) {
        metrics.push_back(s.metrics);
        if (s.solution.status != SolveStatus::Optimal) out.all_optimal = false;
        if (!s.solution.tight) out.all_tight = false;
    }
    out.summary = aggregate(metrics, scenario.step_hours, model.base().s_base_va,
                            c_retail, true);
    return out;
}

BaselineRun run_baseline(const FeederModel& model, const Scenario& scenario) {
    BaselineRun out;
    out.steps.resize(scenario.steps.size());
    parallel_for(scenario.steps.size(), [&](size_t i) {
        out.steps[i] = newton_power_flow(model, baseline_injections(model, scenario.steps[i]),
                                         scenario.bounds.v_slack);
    });
    for (const auto& s : out.steps)
        if (!s.converged) out.all_converged = false;
    return out;
}

std::string baseline_csv(const BaselineRun& run, const Scenario& scenario) {
    std::ostringstream os;
    os.precision(10);
    os << "step,time_h,node,v_mag,v_arg\n";
    for (size_t i = 0; i < run.steps.size(); ++i) {
        const auto& pf = run.steps[i];
        for (int n = 0; n < pf.v.size(); ++n)
            os << i << ',' << scenario.steps[i].time_h << ',' << n << ','
               << std::abs(pf.v(n)) << ',' << std::arg(pf.v(n)) << '\n';
    }
    return os.str();
}

SolverSettings settings_from_env() {
    SolverSettings settings;
    if (const char* tol = std::getenv("OID_SOLVER_TOL")) {
        const double v = std::atof(tol);
        if (v > 0) {
            settings.feas_tol = v;
            settings.gap_tol = v;
        }
    }
    return settings;
}

}  // namespace oid
