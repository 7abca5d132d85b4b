#include "oid/recovery.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace oid {

PhasorExtraction extract_phasors(const Eigen::MatrixXcd& v_mat,
                                 const Eigen::MatrixXcd& admittance, double rank_tol) {
    const int n = static_cast<int>(v_mat.rows());
    PhasorExtraction out;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(embed_hermitian(v_mat));
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending, in pairs

    // Deduplicate the doubled spectrum from the top.
    out.rank.lambda1 = 0.5 * (ev(2 * n - 1) + ev(2 * n - 2));
    out.rank.lambda2 = n > 1 ? std::max(0.0, 0.5 * (ev(2 * n - 3) + ev(2 * n - 4))) : 0.0;
    if (out.rank.lambda1 <= 0) {
        out.rank.ratio = 1.0;
        return out;
    }
    out.rank.ratio = out.rank.lambda2 / out.rank.lambda1;
    out.tight = out.rank.ratio <= rank_tol;
    if (!out.tight) return out;

    Eigen::VectorXd top = es.eigenvectors().col(2 * n - 1);
    Eigen::VectorXcd v(n);
    v.real() = top.head(n);
    v.imag() = top.tail(n);
    v *= std::sqrt(out.rank.lambda1);
    // anchor the slack angle at zero
    const Complex a0 = v(0);
    if (std::abs(a0) > 0) v *= std::conj(a0) / std::abs(a0);
    out.v = v;
    out.current = admittance * v;
    return out;
}

DispatchSolution recover(const DispatchProblem& problem, const Solution& solution,
                         const FeederModel& model, const ScenarioStep& step,
                         const DispatchSpec& spec, double rank_tol) {
    const int nh = problem.num_houses;
    DispatchSolution out;
    out.conic = solution;
    out.status = solution.status;
    out.objective = solution.objective;
    if (solution.status != SolveStatus::Optimal) return out;

    DispatchSpec prepared = spec;
    prepared.prepare(nh);

    PhasorExtraction px = extract_phasors(solution.v, model.admittance(), rank_tol);
    out.rank = px.rank;
    out.tight = px.tight;
    out.v = px.v;
    out.current = px.current;

    out.p_curtail.resize(nh);
    out.q_set.resize(nh);
    out.p_set.resize(nh);
    out.cost_epi = Eigen::VectorXd::Zero(nh);
    out.group_epi = Eigen::VectorXd::Zero(nh);
    for (int h = 0; h < nh; ++h) {
        out.p_curtail(h) = problem.p_curtail(h, solution.vars);
        out.q_set(h) = problem.q_set(h, solution.vars);
        out.p_set(h) = step.p_avail[h] - out.p_curtail(h);
        if (problem.cost_epi[h] >= 0) out.cost_epi(h) = solution.vars(problem.cost_epi[h]);
        if (problem.group_epi[h] >= 0)
            out.group_epi(h) = solution.vars(problem.group_epi[h]);
    }
    if (problem.deviation_epi >= 0)
        out.deviation_epi = solution.vars(problem.deviation_epi);

    // Objective decomposition from the recovered quantities.
    out.loss_term =
        prepared.c_loss *
        (model.total_loss().cast<Complex>().adjoint() * solution.v).trace().real();
    double curtail_cost = 0.0, reg = 0.0;
    for (int h = 0; h < nh; ++h) {
        curtail_cost += prepared.a[h] * out.p_curtail(h) * out.p_curtail(h) +
                        prepared.b[h] * out.p_curtail(h);
        reg += prepared.group_weight(h) *
               std::hypot(out.p_curtail(h), out.q_set(h));
        reg += prepared.lambda_p * out.p_curtail(h);
        reg += prepared.lambda_q * std::abs(out.q_set(h));
    }
    out.curtail_term = prepared.c_curtail * curtail_cost;
    out.regularizer_term = reg;
    out.deviation_term = prepared.c_deviation * out.deviation_epi;
    return out;
}

DispatchSolution solve_dispatch(const FeederModel& model, const ScenarioStep& step,
                                const DispatchSpec& spec,
                                const std::vector<InverterSpec>& inverters,
                                const SolverSettings& settings,
                                std::vector<bool> control_mask, double rank_tol) {
    DispatchProblem problem = assemble(model, step, spec, inverters,
                                       std::move(control_mask));
    Solution sol = solve(problem.program, settings);
    return recover(problem, sol, model, step, spec, rank_tol);
}

}  // namespace oid
