#include "oid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace oid {

void InverterSpec::validate() const {
    if (s_rating <= 0) throw std::invalid_argument("inverter rating must be positive");
    if (pf_min <= 0 || pf_min > 1)
        throw std::invalid_argument("pf_min must lie in (0, 1]");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        size_t start = field.find_first_not_of(' ');
        out.push_back(start == std::string::npos ? "" : field.substr(start));
    }
    return out;
}

}  // namespace

Scenario load_scenario(const FeederModel& feeder, const std::string& csv_path,
                       const std::string& specs_path) {
    const int nh = static_cast<int>(feeder.houses().size());
    const double s_base_kw = feeder.base().s_base_va / 1e3;

    // Inverter specs file.
    std::ifstream sin(specs_path);
    if (!sin) throw std::runtime_error("cannot open inverter specs: " + specs_path);
    nlohmann::json sj;
    sin >> sj;

    Scenario sc;
    sc.inverters.resize(nh);
    std::vector<bool> have(nh, false);
    for (const auto& item : sj.at("inverters")) {
        const int house = item.at("house").get<int>();  // 1-based house number
        if (house < 1 || house > nh)
            throw std::invalid_argument("inverter spec house out of range");
        InverterSpec spec;
        spec.node = feeder.houses()[house - 1];
        const double dc_kw = item.at("dc_kw").get<double>();
        const double derating = item.value("derating", 0.77);
        const double oversize = item.value("oversize", 1.10);
        spec.s_rating = oversize * derating * dc_kw / s_base_kw;
        spec.pf_min = item.value("pf_min", 0.85);
        spec.validate();
        sc.inverters[house - 1] = spec;
        have[house - 1] = true;
    }
    for (int h = 0; h < nh; ++h)
        if (!have[h])
            throw std::invalid_argument("inverter specs missing house " +
                                        std::to_string(h + 1));
    if (sj.contains("bounds")) {
        const auto& b = sj["bounds"];
        sc.bounds.v_min = b.value("v_min", sc.bounds.v_min);
        sc.bounds.v_max = b.value("v_max", sc.bounds.v_max);
        sc.bounds.v_slack = b.value("v_slack", sc.bounds.v_slack);
    }
    sc.step_hours = sj.value("step_hours", 1.0);

    // Time series CSV (kW / kvar, converted to pu here).
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open scenario CSV: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty scenario CSV");
    const auto header = split_csv_line(line);

    auto find_col = [&header](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };

    std::vector<int> col_pavail(nh), col_pload(nh), col_qload(nh);
    bool have_q = true;
    for (int h = 0; h < nh; ++h) {
        const std::string tag = "H" + std::to_string(h + 1);
        col_pavail[h] = find_col(tag + "_pavail");
        col_pload[h] = find_col(tag + "_pload");
        col_qload[h] = find_col(tag + "_qload");
        if (col_pavail[h] < 0)
            throw std::invalid_argument("scenario CSV missing column " + tag + "_pavail");
        if (col_pload[h] < 0)
            throw std::invalid_argument("scenario CSV missing column " + tag + "_pload");
        if (col_qload[h] < 0) have_q = false;
    }
    const int col_time = find_col("time");
    if (col_time < 0) throw std::invalid_argument("scenario CSV missing time column");
    const double tan_load = std::tan(std::acos(0.9));

    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \r\n\t") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size())
            throw std::invalid_argument("scenario CSV row has too few fields");
        ScenarioStep step;
        step.time_h = std::stod(fields[col_time]);
        step.p_avail.resize(nh);
        step.p_load.resize(nh);
        step.q_load.resize(nh);
        for (int h = 0; h < nh; ++h) {
            step.p_avail[h] = std::stod(fields[col_pavail[h]]) / s_base_kw;
            step.p_load[h] = std::stod(fields[col_pload[h]]) / s_base_kw;
            step.q_load[h] = have_q ? std::stod(fields[col_qload[h]]) / s_base_kw
                                    : step.p_load[h] * tan_load;
            if (step.p_avail[h] < 0)
                throw std::invalid_argument("negative available power in scenario CSV");
            if (step.p_avail[h] > sc.inverters[h].s_rating + 1e-12)
                throw std::invalid_argument(
                    "available power exceeds inverter rating for house " +
                    std::to_string(h + 1));
        }
        sc.steps.push_back(std::move(step));
    }
    return sc;
}

std::vector<InverterSpec> fixture_inverter_specs(const FeederModel& feeder) {
    const double s_base_kw = feeder.base().s_base_va / 1e3;
    const double dc_kw[12] = {5.52, 5.70, 9.00, 9.00, 9.00, 5.70,
                              9.00, 5.70, 5.52, 5.52, 5.70, 9.00};
    std::vector<InverterSpec> specs(12);
    for (int h = 0; h < 12; ++h) {
        specs[h].node = feeder.houses().at(h);
        specs[h].s_rating = 1.10 * 0.77 * dc_kw[h] / s_base_kw;
        specs[h].pf_min = 0.85;
    }
    return specs;
}

Scenario synthesize_profiles(const FeederModel& feeder,
                             const std::vector<double>& base_load_w,
                             const std::vector<double>& pv_shape,
                             const std::vector<InverterSpec>& inverters,
                             const SynthesisConfig& config) {
    if (base_load_w.size() != pv_shape.size())
        throw std::invalid_argument("base load and PV shape lengths differ");
    for (double p : base_load_w)
        if (p <= 0) throw std::invalid_argument("base load profile must be positive");

    const int nh = static_cast<int>(feeder.houses().size());
    const double s_base_w = feeder.base().s_base_va;
    const double tan_load = std::tan(std::acos(config.load_pf));
    const double ac_derate = 1.0 / 1.10;  // rating includes the 10 % oversize

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Scenario sc;
    sc.inverters = inverters;
    sc.step_hours = base_load_w.size() > 1 ? 24.0 / static_cast<double>(base_load_w.size())
                                           : 1.0;
    for (size_t t = 0; t < base_load_w.size(); ++t) {
        ScenarioStep step;
        step.time_h = static_cast<double>(t) * sc.step_hours;
        step.p_avail.resize(nh);
        step.p_load.resize(nh);
        step.q_load.resize(nh);
        for (int h = 0; h < nh; ++h) {
            const double w = std::max(0.0, base_load_w[t] + config.sigma_w * noise(rng));
            step.p_load[h] = w / s_base_w;
            step.q_load[h] = step.p_load[h] * tan_load;
            step.p_avail[h] = std::clamp(pv_shape[t], 0.0, 1.0) *
                              inverters.at(h).s_rating * ac_derate;
        }
        sc.steps.push_back(std::move(step));
    }
    return sc;
}

bool feasible_set_membership(const InverterSpec& spec, double p_avail, double p_set,
                             double q_set, StrategyKind strategy, bool enforce_pf,
                             double tol) {
    spec.validate();
    const double s2 = spec.s_rating * spec.s_rating;
    switch (strategy) {
        case StrategyKind::Rpc: {
            if (std::abs(p_set - p_avail) > tol) return false;
            const double cap = s2 - p_avail * p_avail;
            return q_set * q_set <= std::max(0.0, cap) + tol;
        }
        case StrategyKind::Apc:
            return p_set >= -tol && p_set <= p_avail + tol && std::abs(q_set) <= tol;
        case StrategyKind::Oid:
        case StrategyKind::Mixed: {
            if (p_set < -tol || p_set > p_avail + tol) return false;
            if (q_set * q_set > s2 - p_set * p_set + tol) return false;
            if (enforce_pf) {
                const double tan_theta = std::tan(std::acos(spec.pf_min));
                if (std::abs(q_set) > tan_theta * p_set + tol) return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace oid
