#include "oid/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "oid/strategies.hpp"

namespace oid {

double losses(const Eigen::VectorXcd& v, const FeederModel& model) {
    double total = 0.0;
    for (const auto& e : model.edges()) {
        const Complex i_series = e.admittance.series * (v(e.from) - v(e.to));
        total += (v(e.from) * std::conj(i_series)).real() -
                 (v(e.to) * std::conj(i_series)).real();
    }
    return total;
}

double curtailment_cost(const Eigen::VectorXd& p_curtail, const std::vector<double>& a,
                        const std::vector<double>& b) {
    if (static_cast<size_t>(p_curtail.size()) != a.size() || a.size() != b.size())
        throw std::invalid_argument("curtailment cost vectors are misaligned");
    double cost = 0.0;
    for (int h = 0; h < p_curtail.size(); ++h)
        cost += a[h] * p_curtail(h) * p_curtail(h) + b[h] * p_curtail(h);
    return cost;
}

double voltage_deviation(const Eigen::VectorXcd& v) {
    const int n = static_cast<int>(v.size());
    Eigen::VectorXd sq(n);
    for (int i = 0; i < n; ++i) sq(i) = std::norm(v(i));
    const double mean = sq.mean();
    return (sq.array() - mean).matrix().norm();
}

StepMetrics step_metrics(const DispatchSolution& sol, const FeederModel& model,
                         double time_h, double eps_selected) {
    StepMetrics m;
    m.time_h = time_h;
    m.objective = sol.objective;
    m.rank_ratio = sol.rank.ratio;
    m.tight = sol.tight;
    if (sol.p_curtail.size() > 0) {
        m.curtailed = sol.p_curtail.sum();
        m.selected = count_selected(sol.p_curtail, sol.q_set, eps_selected).count;
    }
    if (sol.tight) {
        m.loss = losses(sol.v, model);
        m.deviation = voltage_deviation(sol.v);
        m.v_max = sol.v.cwiseAbs().maxCoeff();
        m.v_min = sol.v.cwiseAbs().minCoeff();
    }
    return m;
}

DayAggregate aggregate(const std::vector<StepMetrics>& steps, double step_hours,
                       double s_base_va, double c_retail_per_kwh,
                       bool price_curtailment) {
    if (step_hours <= 0) throw std::invalid_argument("step duration must be positive");
    DayAggregate day;
    const double pu_to_kw = s_base_va / 1e3;
    for (const auto& s : steps) {
        day.network_kwh += s.loss * pu_to_kw * step_hours;
        day.curtailed_kwh += s.curtailed * pu_to_kw * step_hours;
    }
    day.overall_kwh = day.network_kwh + day.curtailed_kwh;
    day.economic_usd = c_retail_per_kwh *
                       (day.network_kwh + (price_curtailment ? day.curtailed_kwh : 0.0));
    return day;
}

namespace {

void append_row(std::ostringstream& os, const StepMetrics& s) {
    os << s.time_h << ',' << s.loss << ',' << s.curtailed << ',' << s.deviation << ','
       << s.selected << ',' << s.v_max << ',' << s.v_min << ',' << s.rank_ratio << ','
       << (s.tight ? 1 : 0) << ',' << s.objective << '\n';
}

}  // namespace

std::string metrics_csv(const std::vector<StepMetrics>& steps, const DayAggregate& day) {
    std::ostringstream os;
    os.precision(10);
    os << "time_h,loss_pu,curtailed_pu,deviation,selected,v_max,v_min,rank_ratio,"
          "tight,objective\n";
    for (const auto& s : steps) append_row(os, s);
    os << "# summary: Network_kWh,Curtailed_kWh,Overall_kWh,Economic_USD\n";
    os << "# " << day.network_kwh << ',' << day.curtailed_kwh << ',' << day.overall_kwh
       << ',' << day.economic_usd << '\n';
    return os.str();
}

std::string metrics_json(const std::vector<StepMetrics>& steps,
                         const DayAggregate& day) {
    std::ostringstream os;
    os.precision(10);
    os << "{\n  \"steps\": [\n";
    for (size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        os << "    {\"time_h\": " << s.time_h << ", \"loss_pu\": " << s.loss
           << ", \"curtailed_pu\": " << s.curtailed << ", \"deviation\": " << s.deviation
           << ", \"selected\": " << s.selected << ", \"v_max\": " << s.v_max
           << ", \"v_min\": " << s.v_min << ", \"rank_ratio\": " << s.rank_ratio
           << ", \"tight\": " << (s.tight ? "true" : "false")
           << ", \"objective\": " << s.objective << "}"
           << (i + 1 < steps.size() ? "," : "") << "\n";
    }
    os << "  ],\n  \"summary\": {\"network_kwh\": " << day.network_kwh
       << ", \"curtailed_kwh\": " << day.curtailed_kwh
       << ", \"overall_kwh\": " << day.overall_kwh
       << ", \"economic_usd\": " << day.economic_usd << "}\n}\n";
    return os.str();
}

std::string solution_csv(const DispatchSolution& sol, const FeederModel& model,
                         const ScenarioStep& step) {
    std::ostringstream os;
    os.precision(10);
    os << "kind,index,v_mag,v_arg,p_inject,q_inject\n";
    if (sol.tight) {
        for (int n = 0; n < model.node_count(); ++n) {
            const Complex s = sol.v(n) * std::conj(sol.current(n));
            os << "node," << n << ',' << std::abs(sol.v(n)) << ','
               << std::arg(sol.v(n)) << ',' << s.real() << ',' << s.imag() << '\n';
        }
    }
    os << "kind,house,p_avail,p_curtail,q_set,group_norm\n";
    for (int h = 0; h < sol.p_curtail.size(); ++h)
        os << "house," << h + 1 << ',' << step.p_avail[h] << ',' << sol.p_curtail(h)
           << ',' << sol.q_set(h) << ','
           << std::hypot(sol.p_curtail(h), sol.q_set(h)) << '\n';
    return os.str();
}

}  // namespace oid
