#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oid/formulation.hpp"
#include "oid/oracle.hpp"
#include "oid/recovery.hpp"
#include "oid/solver.hpp"

using namespace oid;

namespace {

FeederModel fixture_model() { return build_feeder(fixture_feeder_topology()); }

ScenarioStep noon_step(const std::vector<InverterSpec>& inverters, double frac = 0.8) {
    ScenarioStep step;
    step.time_h = 12.0;
    const int nh = static_cast<int>(inverters.size());
    step.p_avail.resize(nh);
    step.p_load.assign(nh, 0.1);
    step.q_load.assign(nh, 0.1 * std::tan(std::acos(0.9)));
    for (int h = 0; h < nh; ++h)
        step.p_avail[h] = frac * inverters[h].s_rating / 1.1;
    return step;
}

/// Random radial feeder with explicit roles, for identity checks.
FeederModel random_radial(std::mt19937& rng, int nodes) {
    std::uniform_real_distribution<double> unif(0.3, 1.0);
    FeederTopology topo;
    topo.roles.assign(nodes, NodeRole::House);
    topo.roles[0] = NodeRole::Slack;
    std::uniform_int_distribution<int> parent_of;
    for (int n = 1; n < nodes; ++n) {
        FeederEdge e;
        e.from = std::uniform_int_distribution<int>(0, n - 1)(rng);
        e.to = n;
        e.params.r_ohm_per_km = 0.3 * unif(rng);
        e.params.l_mh_per_km = 0.25 * unif(rng);
        e.params.c_uf_per_km = 0.06 * unif(rng);
        e.params.length_m = 40.0 * unif(rng) + 10.0;
        topo.edges.push_back(e);
    }
    if (nodes > 2) topo.roles[1] = NodeRole::Pole;  // mix in a zero-injection node
    return build_feeder(topo);
}

}  // namespace

TEST_CASE("projector is idempotent and annihilates the ones vector") {
    FeederModel model = fixture_model();
    FormulationMatrices f = build_formulation_matrices(model);
    const auto& p = f.projector;
    CHECK(((p * p) - p).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p * Eigen::VectorXd::Ones(19)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("trace identities reproduce nodal complex power on random networks") {
    std::mt19937 rng(31);
    std::normal_distribution<double> gauss(0.0, 0.05);
    for (int trial = 0; trial < 10; ++trial) {
        FeederModel model = random_radial(rng, 4 + trial % 5);
        FormulationMatrices f = build_formulation_matrices(model);
        const int n = model.node_count();
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = Complex(1.0 + gauss(rng), gauss(rng));
        const Eigen::VectorXcd current = model.admittance() * v;
        const Eigen::MatrixXcd vv = v * v.adjoint();
        for (int node = 0; node < n; ++node) {
            const Complex s = v(node) * std::conj(current(node));
            const double p_trace = (f.z[node].adjoint() * vv).trace().real();
            const double q_trace = (f.zbar[node].adjoint() * vv).trace().real();
            CHECK(p_trace == doctest::Approx(s.real()).epsilon(1e-9));
            CHECK(q_trace == doctest::Approx(s.imag()).epsilon(1e-9));
        }
    }
}

TEST_CASE("power-balance rows vanish at a power-flow-consistent outer product") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);

    // Oracle: no-control operating point from Newton power flow.
    PowerFlowResult pf =
        newton_power_flow(model, baseline_injections(model, step), 1.02);
    REQUIRE(pf.converged);

    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.bounds.v_max = 1.2;  // wide band so the oracle point is feasible
    DispatchProblem prob = assemble(model, step, spec, inverters);

    // Assignment: V = v v^H, p_c = 0, q split = 0, epigraphs irrelevant.
    Eigen::MatrixXcd vv = pf.v * pf.v.adjoint();
    Eigen::VectorXd vars = Eigen::VectorXd::Zero(prob.program.num_vars());
    for (int h = 0; h < prob.num_houses; ++h) {
        const double r =
            prob.program.constraints[prob.row_balance_p[h]].expr.eval(vv, vars);
        CHECK(std::abs(r) < 1e-9);
        const double rq =
            prob.program.constraints[prob.row_balance_q[h]].expr.eval(vv, vars);
        CHECK(std::abs(rq) < 1e-9);
    }
    for (int row : prob.row_pole_p)
        CHECK(std::abs(prob.program.constraints[row].expr.eval(vv, vars)) < 1e-9);
    for (int row : prob.row_pole_q)
        CHECK(std::abs(prob.program.constraints[row].expr.eval(vv, vars)) < 1e-9);
    CHECK(std::abs(prob.program.constraints[prob.row_slack_mag].expr.eval(vv, vars)) <
          1e-9);
}

TEST_CASE("voltage band rows square the configured limits") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;  // defaults carry 0.917 / 1.042
    DispatchProblem prob = assemble(model, step, spec, inverters);

    // vmax row reads  1.085764 - Tr(M_n V) >= 0, vmin row  Tr(M_n V) - 0.840889 >= 0.
    const auto& hi = prob.program.constraints[prob.row_vmax[5]];
    const auto& lo = prob.program.constraints[prob.row_vmin[5]];
    CHECK(hi.expr.constant == doctest::Approx(1.085764).epsilon(1e-12));
    CHECK(lo.expr.constant == doctest::Approx(-0.840889).epsilon(1e-12));
    CHECK(hi.expr.v_coeff(5, 5).real() == doctest::Approx(-1.0));
    CHECK(lo.expr.v_coeff(5, 5).real() == doctest::Approx(1.0));
}

TEST_CASE("objective composes the configured weight structure") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);

    SUBCASE("loss-only objective reduces to the loss trace") {
        DispatchSpec spec;
        spec.c_loss = 1.0;
        DispatchProblem prob = assemble(model, step, spec, inverters);
        CHECK(prob.program.objective.terms.empty());
        CHECK((prob.program.objective.v_coeff.real() - model.total_loss())
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }
    SUBCASE("overall-loss weights add the cost epigraphs") {
        DispatchSpec spec;
        spec.c_loss = 1.0;
        spec.c_curtail = 1.0;
        spec.b = {1.0};
        DispatchProblem prob = assemble(model, step, spec, inverters);
        int epi_terms = 0;
        for (const auto& t : prob.program.objective.terms)
            for (int h = 0; h < 12; ++h)
                if (t.var == prob.cost_epi[h]) ++epi_terms;
        CHECK(epi_terms == 12);
    }
    SUBCASE("reactive-only strategy carries entrywise reactive weights") {
        DispatchSpec spec;
        spec.c_loss = 1.0;
        spec.pin_curtail_zero = true;
        spec.lambda_q = 0.05;
        spec.enforce_pf = false;
        DispatchProblem prob = assemble(model, step, spec, inverters);
        for (int h = 0; h < 12; ++h) {
            CHECK(prob.curtail[h] == -1);
            CHECK(prob.q_plus[h] >= 0);
        }
        int q_terms = 0;
        for (const auto& t : prob.program.objective.terms)
            if (t.coeff == 0.05) ++q_terms;
        CHECK(q_terms == 24);  // q_plus and q_minus per house
    }
}

TEST_CASE("epigraph block degenerates to a linear row when the quadratic is off") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.c_curtail = 1.0;
    spec.b = {1.0};
    spec.a = {0.0};
    DispatchProblem prob = assemble(model, step, spec, inverters);
    for (int h = 0; h < 12; ++h) {
        CHECK(prob.lmi_cost[h] == -1);
        CHECK(prob.row_cost_linear[h] >= 0);
    }
}

TEST_CASE("group-norm block is psd exactly when the epigraph inequality holds") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.lambda = 0.5;
    DispatchProblem prob = assemble(model, step, spec, inverters);
    REQUIRE(prob.lmi_group[0] >= 0);
    const LmiBlock& blk = prob.program.lmis[prob.lmi_group[0]];

    Eigen::VectorXd vars = Eigen::VectorXd::Zero(prob.program.num_vars());
    Eigen::MatrixXcd v0;  // block does not touch V
    vars(prob.curtail[0]) = 0.1;
    vars(prob.q_plus[0]) = 0.2;
    vars(prob.group_epi[0]) = 0.3;  // 0.3 >= sqrt(0.05) = 0.2236...
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ok(blk.eval(v0, vars));
    CHECK(ok.eigenvalues().minCoeff() > 0);

    vars(prob.group_epi[0]) = 0.2;  // below the norm: not psd
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bad(blk.eval(v0, vars));
    CHECK(bad.eigenvalues().minCoeff() < 0);
}

TEST_CASE("rating block hits a zero eigenvalue exactly on the rating circle") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    DispatchProblem prob = assemble(model, step, spec, inverters);
    const int h = 2;
    const double s = inverters[h].s_rating;
    const double pbar = step.p_avail[h];

    Eigen::VectorXd vars = Eigen::VectorXd::Zero(prob.program.num_vars());
    Eigen::MatrixXcd v0;
    // choose q so that q^2 + (pbar - pc)^2 = s^2 with pc = 0
    vars(prob.q_plus[h]) = std::sqrt(s * s - pbar * pbar);
    const LmiBlock& blk = prob.program.lmis[prob.lmi_rating[h]];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.eval(v0, vars));
    CHECK(std::abs(es.eigenvalues().minCoeff()) < 1e-12);
}

TEST_CASE("schur blocks agree with their scalar inequalities on random points") {
    // Randomized two-way check of the epigraph encodings.
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double w = std::abs(unif(rng));
        const double pc = std::abs(unif(rng));
        const double q = unif(rng);
        // group-norm block
        Eigen::Matrix3d norm_blk;
        norm_blk << w, 0, pc, 0, w, q, pc, q, w;
        const bool psd =
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(norm_blk).eigenvalues().minCoeff() >=
            -1e-12;
        const bool scalar = w >= std::hypot(pc, q) - 1e-12;
        CHECK(psd == scalar);

        // curtailment cost block (negated to psd orientation)
        const double a = std::abs(unif(rng)), b = unif(rng) + 1.0, y = 2.0 * std::abs(unif(rng));
        Eigen::Matrix2d cost_blk;
        cost_blk << y - b * pc, -std::sqrt(a) * pc, -std::sqrt(a) * pc, 1.0;
        const bool cost_psd =
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cost_blk).eigenvalues().minCoeff() >=
            -1e-12;
        const bool cost_scalar = y >= a * pc * pc + b * pc - 1e-12;
        CHECK(cost_psd == cost_scalar);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("real embedding doubles the spectrum") {
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd m(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
    m = (0.5 * (m + m.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ec(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(embed_hermitian(m));
    for (int i = 0; i < 6; ++i) {
        CHECK(er.eigenvalues()(2 * i) == doctest::Approx(ec.eigenvalues()(i)).epsilon(1e-10));
        CHECK(er.eigenvalues()(2 * i + 1) ==
              doctest::Approx(ec.eigenvalues()(i)).epsilon(1e-10));
    }
}

TEST_CASE("assembled fixture problem has the documented shape") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.c_curtail = 1.0;
    spec.a = {0.5};
    spec.b = {1.0};
    spec.lambda = 0.1;
    DispatchProblem prob = assemble(model, step, spec, inverters);

    CHECK(prob.program.v_dim == 19);  // embeds to 38 x 38
    Lowering lo = lower(prob.program);
    CHECK(lo.std_problem.cones.psd[lo.v_block] == 38);
    int cost_blocks = 0, group_blocks = 0, rating_blocks = 0;
    for (int h = 0; h < 12; ++h) {
        cost_blocks += prob.lmi_cost[h] >= 0;
        group_blocks += prob.lmi_group[h] >= 0;
        rating_blocks += prob.lmi_rating[h] >= 0;
    }
    CHECK(cost_blocks == 12);
    CHECK(group_blocks == 12);
    CHECK(rating_blocks == 12);
}

TEST_CASE("no PV available reduces to a feasibility problem in V") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step;
    step.time_h = 0.0;
    step.p_avail.assign(12, 0.0);
    step.p_load.assign(12, 0.05);
    step.q_load.assign(12, 0.02);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.lambda = 100.0;  // huge group weight, nothing to regularize anyway
    DispatchProblem prob = assemble(model, step, spec, inverters);
    for (int h = 0; h < 12; ++h) CHECK(prob.curtail[h] == -1);

    DispatchSolution sol = solve_dispatch(model, step, spec, inverters);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.tight);
    CHECK(sol.q_set.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("power-factor cut encodings solve to the same objective") {
    FeederModel model = fixture_model();
    auto inverters = fixture_inverter_specs(model);
    ScenarioStep step = noon_step(inverters, 0.85);
    DispatchSpec spec;
    spec.c_loss = 1.0;
    spec.lambda = 0.1;
    spec.enforce_pf = true;

    spec.pf_encoding = PfCutEncoding::LinearPair;
    DispatchSolution lin = solve_dispatch(model, step, spec, inverters);
    spec.pf_encoding = PfCutEncoding::PsdBlock;
    DispatchSolution cone = solve_dispatch(model, step, spec, inverters);
    REQUIRE(lin.status == SolveStatus::Optimal);
    REQUIRE(cone.status == SolveStatus::Optimal);
    CHECK(lin.objective ==
          doctest::Approx(cone.objective).epsilon(1e-6));
    CHECK((lin.q_set - cone.q_set).cwiseAbs().maxCoeff() < 1e-5);
}
