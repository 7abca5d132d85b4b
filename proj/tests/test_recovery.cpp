#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oid/metrics.hpp"
#include "oid/oracle.hpp"
#include "oid/recovery.hpp"

using namespace oid;

namespace {

FeederModel fixture_model() { return build_feeder(fixture_feeder_topology()); }

Eigen::VectorXcd random_phasors(std::mt19937& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 0.05);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(1.0 + gauss(rng), gauss(rng));
    return v;
}

ScenarioStep noon_step(const std::vector<InverterSpec>& inverters) {
    ScenarioStep step;
    step.time_h = 12.0;
    const int nh = static_cast<int>(inverters.size());
    step.p_avail.resize(nh);
    step.p_load.assign(nh, 0.1);
    step.q_load.assign(nh, 0.1 * std::tan(std::acos(0.9)));
    for (int h = 0; h < nh; ++h) step.p_avail[h] = 0.8 * inverters[h].s_rating / 1.1;
    return step;
}

}  // namespace

TEST_CASE("rank-1 input recovers the phasors up to global phase") {
    std::mt19937 rng(3);
    FeederModel model = fixture_model();
    Eigen::VectorXcd v = random_phasors(rng, 19);
    PhasorExtraction px =
        extract_phasors(v * v.adjoint(), model.admittance(), 1e-5);
    REQUIRE(px.tight);
    CHECK(px.rank.ratio < 1e-12);
    // compare after anchoring the reference phase of the expected vector
    Eigen::VectorXcd expect = v * std::polar(1.0, -std::arg(v(0)));
    CHECK((px.v - expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((px.current - model.admittance() * expect).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(std::arg(px.v(0))) < 1e-12);
}

TEST_CASE("two-eigenvalue matrix is flagged not tight with the right ratio") {
    std::mt19937 rng(4);
    FeederModel model = fixture_model();
    Eigen::VectorXcd v = random_phasors(rng, 19);
    // orthogonal unit direction
    Eigen::VectorXcd u = random_phasors(rng, 19);
    u -= (v.dot(u) / v.squaredNorm()) * v;
    u.normalize();
    Eigen::MatrixXcd m = v * v.adjoint() + 0.5 * u * u.adjoint();
    PhasorExtraction px = extract_phasors(m, model.admittance(), 1e-5);
    CHECK_FALSE(px.tight);
    CHECK(px.rank.ratio == doctest::Approx(0.5 / v.squaredNorm()).epsilon(1e-9));
    CHECK(px.v.size() == 0);  // no phasors fabricated
}

TEST_CASE("fixture solve recovers physically consistent quantities") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.lambda = 0.2;
    // tight tolerances keep the rank-2 contamination below the 1e-7 checks
    SolverSettings settings;
    settings.feas_tol = 1e-10;
    settings.gap_tol = 1e-10;
    DispatchProblem prob = assemble(model, step, spec, inverters);
    Solution conic = solve(prob.program, settings);
    DispatchSolution sol = recover(prob, conic, model, step, spec);
    REQUIRE(sol.status == SolveStatus::Optimal);
    REQUIRE(sol.tight);
    CHECK(sol.rank.ratio < 1e-5);

    SUBCASE("setpoints satisfy the joint feasible set") {
        for (int h = 0; h < 12; ++h) {
            CHECK(sol.p_curtail(h) >= -1e-8);
            CHECK(sol.p_curtail(h) <= step.p_avail[h] + 1e-8);
            CHECK(sol.p_set(h) == doctest::Approx(step.p_avail[h] - sol.p_curtail(h)));
            const double s2 = inverters[h].s_rating * inverters[h].s_rating;
            CHECK(sol.q_set(h) * sol.q_set(h) + sol.p_set(h) * sol.p_set(h) <=
                  s2 + 1e-8);
        }
    }
    SUBCASE("nodal balance holds for houses and poles") {
        for (int h = 0; h < 12; ++h) {
            const int node = model.houses()[h];
            const Complex s = sol.v(node) * std::conj(sol.current(node));
            const Complex target(step.p_avail[h] - sol.p_curtail(h) - step.p_load[h],
                                 sol.q_set(h) - step.q_load[h]);
            CHECK(std::abs(s - target) < 1e-6);
        }
        for (int u : model.poles()) {
            const Complex s = sol.v(u) * std::conj(sol.current(u));
            CHECK(std::abs(s) < 1e-6);
        }
    }
    SUBCASE("loss trace equals the branch-current recomputation") {
        const double via_trace =
            (model.total_loss().cast<Complex>().adjoint() * conic.v).trace().real();
        CHECK(via_trace == doctest::Approx(losses(sol.v, model)).epsilon(1e-7));
    }
    SUBCASE("group epigraphs are tight at the optimum") {
        for (int h = 0; h < 12; ++h)
            CHECK(sol.group_epi(h) ==
                  doctest::Approx(std::hypot(sol.p_curtail(h), sol.q_set(h)))
                      .epsilon(1e-6)
                      .scale(1.0));
    }
    SUBCASE("objective decomposition matches the solver objective") {
        CHECK(sol.loss_term + sol.curtail_term + sol.deviation_term +
                  sol.regularizer_term ==
              doctest::Approx(sol.objective).epsilon(1e-6));
    }
}

TEST_CASE("deviation epigraph is tight when the flatness term is active") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.c_deviation = 0.5;
    SolverSettings settings;
    settings.feas_tol = 1e-10;
    settings.gap_tol = 1e-10;
    DispatchSolution sol = solve_dispatch(model, step, spec, inverters, settings);
    REQUIRE(sol.status == SolveStatus::Optimal);
    REQUIRE(sol.tight);
    CHECK(sol.deviation_epi ==
          doctest::Approx(voltage_deviation(sol.v)).epsilon(1e-6));
}

TEST_CASE("curtailment-only strategy returns exactly zero reactive setpoints") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.pin_reactive_zero = true;
    DispatchSolution sol = solve_dispatch(model, step, spec, inverters);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.q_set.cwiseAbs().maxCoeff() == 0.0);  // pinned by omission
}

TEST_CASE("recovered voltages agree with the power-flow oracle") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.lambda = 0.1;
    DispatchSolution sol = solve_dispatch(model, step, spec, inverters);
    REQUIRE(sol.tight);
    PowerFlowResult pf = newton_power_flow(
        model, step_injections(model, step, sol.p_set, sol.q_set), 1.02);
    REQUIRE(pf.converged);
    for (int n = 0; n < model.node_count(); ++n)
        CHECK(std::abs(std::abs(pf.v(n)) - std::abs(sol.v(n))) < 1e-6);
}
