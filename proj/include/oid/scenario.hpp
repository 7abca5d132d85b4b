#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oid/feeder.hpp"

namespace oid {

/// Rating data for the PV inverter at one house. All powers in pu.
struct InverterSpec {
    int node = -1;
    double s_rating = 0.0;  // rated apparent power
    double pf_min = 0.85;   // minimum power factor (cos theta)

    void validate() const;
};

/// Operating conditions at one time instant, per house (pu).
struct ScenarioStep {
    double time_h = 0.0;
    std::vector<double> p_avail;
    std::vector<double> p_load;
    std::vector<double> q_load;
};

struct VoltageBounds {
    double v_min = 0.917;
    double v_max = 1.042;
    double v_slack = 1.02;
};

struct Scenario {
    std::vector<ScenarioStep> steps;
    double step_hours = 1.0;
    std::vector<InverterSpec> inverters;  // aligned with FeederModel::houses()
    VoltageBounds bounds;
};

/// Load a scenario from a CSV of kW columns plus an inverter-spec JSON.
/// CSV header: time,H1_pavail,...,Hk_pavail,H1_pload,...,Hk_pload
/// with optional trailing H1_qload,...,Hk_qload; missing reactive columns
/// are derived from active load at a fixed 0.9 lagging power factor.
Scenario load_scenario(const FeederModel& feeder, const std::string& csv_path,
                       const std::string& specs_path);

/// Inverter ratings for the 12 houses of the fixture feeder: DC ratings
/// 5.52 / 5.70 / 9.00 kW, derating 0.77, inverters oversized 10 %.
std::vector<InverterSpec> fixture_inverter_specs(const FeederModel& feeder);

struct SynthesisConfig {
    double sigma_w = 200.0;   // Gaussian load perturbation, watts
    double load_pf = 0.9;     // lagging
    std::uint64_t seed = 42;
};

/// Per-house load profiles: base profile plus zero-mean Gaussian noise,
/// clamped at zero; reactive power from the fixed power factor. Available
/// PV power comes from scaling each inverter's AC rating by pv_shape.
Scenario synthesize_profiles(const FeederModel& feeder,
                             const std::vector<double>& base_load_w,
                             const std::vector<double>& pv_shape,
                             const std::vector<InverterSpec>& inverters,
                             const SynthesisConfig& config);

enum class StrategyKind { Oid, Rpc, Apc, Mixed };

/// Membership test for the per-inverter feasible operating sets.
bool feasible_set_membership(const InverterSpec& spec, double p_avail, double p_set,
                             double q_set, StrategyKind strategy,
                             bool enforce_pf = false, double tol = 1e-12);

}  // namespace oid
