#pragma once

#include <string>
#include <vector>

#include "oid/feeder.hpp"
#include "oid/recovery.hpp"

namespace oid {

/// Series-branch active power loss recomputed from phasors (pu).
double losses(const Eigen::VectorXcd& v, const FeederModel& model);

/// Quadratic curtailment cost sum a_h p^2 + b_h p.
double curtailment_cost(const Eigen::VectorXd& p_curtail, const std::vector<double>& a,
                        const std::vector<double>& b);

/// Root-sum-square deviation of squared voltage magnitudes from their mean.
double voltage_deviation(const Eigen::VectorXcd& v);

struct StepMetrics {
    double time_h = 0.0;
    double loss = 0.0;          // pu
    double curtailed = 0.0;     // pu, sum of p_c
    double deviation = 0.0;
    int selected = 0;
    double v_max = 0.0, v_min = 0.0;
    double objective = 0.0;
    double rank_ratio = 0.0;
    bool tight = false;
};

StepMetrics step_metrics(const DispatchSolution& sol, const FeederModel& model,
                         double time_h, double eps_selected = 1e-4);

struct DayAggregate {
    double network_kwh = 0.0;
    double curtailed_kwh = 0.0;
    double overall_kwh = 0.0;
    double economic_usd = 0.0;  // c_retail * (network [+ curtailed])
};

DayAggregate aggregate(const std::vector<StepMetrics>& steps, double step_hours,
                       double s_base_va, double c_retail_per_kwh = 0.12,
                       bool price_curtailment = true);

std::string metrics_csv(const std::vector<StepMetrics>& steps, const DayAggregate& day);
std::string metrics_json(const std::vector<StepMetrics>& steps, const DayAggregate& day);

/// Solution dump: one row per node then one per house (schema in docs).
std::string solution_csv(const DispatchSolution& sol, const FeederModel& model,
                         const ScenarioStep& step);

}  // namespace oid
