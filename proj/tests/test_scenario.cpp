#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "oid/scenario.hpp"

using namespace oid;

namespace {

const std::string kFixtures = OID_FIXTURE_DIR;

FeederModel fixture_model() { return build_feeder(fixture_feeder_topology()); }

std::string write_temp_csv(const std::string& name, const std::string& contents) {
    std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << contents;
    return path;
}

std::string small_day_csv(int rows) {
    std::ostringstream os;
    os << "time";
    for (int h = 1; h <= 12; ++h) os << ",H" << h << "_pavail";
    for (int h = 1; h <= 12; ++h) os << ",H" << h << "_pload";
    os << "\n";
    for (int t = 0; t < rows; ++t) {
        os << t;
        for (int h = 1; h <= 12; ++h) os << "," << 0.1 * t;
        for (int h = 1; h <= 12; ++h) os << "," << 0.5;
        os << "\n";
    }
    return os.str();
}

}  // namespace

TEST_CASE("scenario CSV ingestion produces one step per row") {
    FeederModel model = fixture_model();
    auto path = write_temp_csv("day24.csv", small_day_csv(24));
    Scenario sc = load_scenario(model, path, kFixtures + "/inverters_fig1.json");
    CHECK(sc.steps.size() == 24);
    CHECK(sc.inverters.size() == 12);
    // q columns absent: derived at PF 0.9 lagging
    const double tan_phi = std::tan(std::acos(0.9));
    CHECK(sc.steps[3].q_load[0] ==
          doctest::Approx(sc.steps[3].p_load[0] * tan_phi).epsilon(1e-12));
}

TEST_CASE("kW quantities are converted to per unit on ingest") {
    FeederModel model = fixture_model();
    // one row whose H1 available power is the derated 5.52 kW DC rating
    std::ostringstream os;
    os << "time";
    for (int h = 1; h <= 12; ++h) os << ",H" << h << "_pavail";
    for (int h = 1; h <= 12; ++h) os << ",H" << h << "_pload";
    os << "\n0";
    os << "," << 5.52 * 0.77;
    for (int h = 2; h <= 12; ++h) os << ",0.0";
    for (int h = 1; h <= 12; ++h) os << ",0.4";
    os << "\n";
    auto path = write_temp_csv("one_row.csv", os.str());
    Scenario sc = load_scenario(model, path, kFixtures + "/inverters_fig1.json");
    CHECK(sc.steps.size() == 1);
    CHECK(sc.steps[0].p_avail[0] == doctest::Approx(0.42504).epsilon(1e-12));
    // AC ratings are oversized by 10 %
    CHECK(sc.inverters[0].s_rating ==
          doctest::Approx(1.1 * 0.77 * 5.52 / 10.0).epsilon(1e-12));
    CHECK(sc.inverters[2].s_rating ==
          doctest::Approx(1.1 * 0.77 * 9.00 / 10.0).epsilon(1e-12));
}

TEST_CASE("ingestion rejects malformed scenarios") {
    FeederModel model = fixture_model();
    SUBCASE("missing house column") {
        std::string csv = "time,H1_pavail\n0,1.0\n";
        auto path = write_temp_csv("bad1.csv", csv);
        CHECK_THROWS_AS(load_scenario(model, path, kFixtures + "/inverters_fig1.json"),
                        std::invalid_argument);
    }
    SUBCASE("negative available power") {
        std::string csv = small_day_csv(1);
        csv.replace(csv.find("\n0,0") + 1, 3, "0,-1");
        auto path = write_temp_csv("bad2.csv", csv);
        CHECK_THROWS_AS(load_scenario(model, path, kFixtures + "/inverters_fig1.json"),
                        std::invalid_argument);
    }
    SUBCASE("rating violation") {
        std::ostringstream os;
        os << "time";
        for (int h = 1; h <= 12; ++h) os << ",H" << h << "_pavail";
        for (int h = 1; h <= 12; ++h) os << ",H" << h << "_pload";
        os << "\n0";
        for (int h = 1; h <= 12; ++h) os << ",50.0";  // 50 kW > any rating
        for (int h = 1; h <= 12; ++h) os << ",0.4";
        os << "\n";
        auto path = write_temp_csv("bad3.csv", os.str());
        CHECK_THROWS_AS(load_scenario(model, path, kFixtures + "/inverters_fig1.json"),
                        std::invalid_argument);
    }
}

TEST_CASE("zero-noise synthesis reproduces the base profile exactly") {
    FeederModel model = fixture_model();
    auto specs = fixture_inverter_specs(model);
    std::vector<double> base(24, 800.0);
    std::vector<double> shape(24, 0.5);
    SynthesisConfig cfg;
    cfg.sigma_w = 0.0;
    Scenario sc = synthesize_profiles(model, base, shape, specs, cfg);
    for (const auto& step : sc.steps)
        for (double p : step.p_load) CHECK(p == 800.0 / 10e3);
}

TEST_CASE("synthesis is deterministic under a fixed seed") {
    FeederModel model = fixture_model();
    auto specs = fixture_inverter_specs(model);
    std::vector<double> base(24, 800.0);
    std::vector<double> shape(24, 0.5);
    SynthesisConfig cfg;
    cfg.seed = 1234;
    Scenario a = synthesize_profiles(model, base, shape, specs, cfg);
    Scenario b = synthesize_profiles(model, base, shape, specs, cfg);
    REQUIRE(a.steps.size() == b.steps.size());
    for (size_t t = 0; t < a.steps.size(); ++t)
        for (size_t h = 0; h < a.steps[t].p_load.size(); ++h) {
            CHECK(a.steps[t].p_load[h] == b.steps[t].p_load[h]);  // bit identical
            CHECK(a.steps[t].q_load[h] == b.steps[t].q_load[h]);
        }
}

TEST_CASE("perturbation sample mean stays near zero") {
    FeederModel model = fixture_model();
    auto specs = fixture_inverter_specs(model);
    // 10^4 draws: 834 steps x 12 houses; base far from the clamp.
    std::vector<double> base(834, 2000.0);
    std::vector<double> shape(834, 0.1);
    SynthesisConfig cfg;
    cfg.seed = 7;
    Scenario sc = synthesize_profiles(model, base, shape, specs, cfg);
    double sum_w = 0.0;
    int count = 0;
    for (const auto& step : sc.steps)
        for (double p : step.p_load) {
            sum_w += p * 10e3 - 2000.0;
            ++count;
        }
    REQUIRE(count >= 10000);
    CHECK(std::abs(sum_w / count) < 3.0 * 200.0 / 100.0);  // 3 sigma / sqrt(1e4)
}

TEST_CASE("feasible set membership matches the defining inequalities") {
    InverterSpec spec;
    spec.node = 1;
    spec.s_rating = 0.5;
    spec.pf_min = 0.85;

    SUBCASE("full output leaves no reactive headroom under reactive-only control") {
        CHECK(feasible_set_membership(spec, 0.5, 0.5, 0.0, StrategyKind::Rpc));
        CHECK_FALSE(feasible_set_membership(spec, 0.5, 0.5, 0.05, StrategyKind::Rpc));
    }
    SUBCASE("the maximum-power unity-pf point belongs to every set") {
        for (auto kind : {StrategyKind::Rpc, StrategyKind::Apc, StrategyKind::Oid})
            CHECK(feasible_set_membership(spec, 0.3, 0.3, 0.0, kind));
    }
    SUBCASE("power-factor cone cut by hand arithmetic") {
        // tan(acos 0.85) * 0.4 = 0.24791... < 0.3, so the point is cut off
        InverterSpec wide = spec;
        wide.s_rating = 1.0;
        CHECK_FALSE(
            feasible_set_membership(wide, 0.8, 0.4, 0.3, StrategyKind::Oid, true));
        CHECK(feasible_set_membership(wide, 0.8, 0.4, 0.24, StrategyKind::Oid, true));
        CHECK(feasible_set_membership(wide, 0.8, 0.4, 0.3, StrategyKind::Oid, false));
    }
}

TEST_CASE("restricted strategy sets are contained in the joint set") {
    InverterSpec spec;
    spec.node = 1;
    spec.s_rating = 0.6;
    spec.pf_min = 0.85;
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double p_avail = 0.45;
    const double q_cap = std::sqrt(0.6 * 0.6 - p_avail * p_avail);
    int rpc_hits = 0, apc_hits = 0;
    for (int i = 0; i < 2000; ++i) {
        // sample inside each restricted set, then check joint-set membership
        const double q = (2.0 * unif(rng) - 1.0) * q_cap;
        if (feasible_set_membership(spec, p_avail, p_avail, q, StrategyKind::Rpc)) {
            ++rpc_hits;
            CHECK(feasible_set_membership(spec, p_avail, p_avail, q, StrategyKind::Oid));
        }
        const double p = unif(rng) * p_avail;
        if (feasible_set_membership(spec, p_avail, p, 0.0, StrategyKind::Apc)) {
            ++apc_hits;
            CHECK(feasible_set_membership(spec, p_avail, p, 0.0, StrategyKind::Oid));
        }
    }
    CHECK(rpc_hits == 2000);
    CHECK(apc_hits == 2000);
}
