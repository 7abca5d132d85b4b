#include "oid/oracle.hpp"

#include <cmath>

#include <bit>

#include "oid/runner.hpp"

namespace oid {

PowerFlowResult newton_power_flow(const FeederModel& model,
                                  const Eigen::VectorXcd& injections, double v_slack,
                                  int max_iter, double tol) {
    const int n = model.node_count();
    const int unknowns = n - 1;  // every non-slack node is a PQ node
    const Eigen::MatrixXd g = model.admittance().real();
    const Eigen::MatrixXd b = model.admittance().imag();

    Eigen::VectorXd vm = Eigen::VectorXd::Constant(n, v_slack);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(n);

    PowerFlowResult out;
    Eigen::VectorXd p_calc(n), q_calc(n);
    auto compute_power = [&]() {
        for (int i = 0; i < n; ++i) {
            double p = 0.0, q = 0.0;
            for (int k = 0; k < n; ++k) {
                if (g(i, k) == 0.0 && b(i, k) == 0.0) continue;
                const double d = th(i) - th(k);
                const double c = std::cos(d), s = std::sin(d);
                p += vm(i) * vm(k) * (g(i, k) * c + b(i, k) * s);
                q += vm(i) * vm(k) * (g(i, k) * s - b(i, k) * c);
            }
            p_calc(i) = p;
            q_calc(i) = q;
        }
    };

    Eigen::MatrixXd jac(2 * unknowns, 2 * unknowns);
    Eigen::VectorXd mismatch(2 * unknowns);
    for (int iter = 0; iter <= max_iter; ++iter) {
        compute_power();
        double worst = 0.0;
        for (int i = 1; i < n; ++i) {
            mismatch(i - 1) = injections(i).real() - p_calc(i);
            mismatch(unknowns + i - 1) = injections(i).imag() - q_calc(i);
            worst = std::max({worst, std::abs(mismatch(i - 1)),
                              std::abs(mismatch(unknowns + i - 1))});
        }
        out.iterations = iter;
        out.max_mismatch = worst;
        if (worst <= tol) {
            out.converged = true;
            break;
        }
        if (iter == max_iter) break;

        for (int i = 1; i < n; ++i) {
            for (int k = 1; k < n; ++k) {
                const int ri = i - 1, ck = k - 1;
                if (i == k) {
                    jac(ri, ck) = -q_calc(i) - b(i, i) * vm(i) * vm(i);
                    jac(ri, unknowns + ck) = p_calc(i) / vm(i) + g(i, i) * vm(i);
                    jac(unknowns + ri, ck) = p_calc(i) - g(i, i) * vm(i) * vm(i);
                    jac(unknowns + ri, unknowns + ck) =
                        q_calc(i) / vm(i) - b(i, i) * vm(i);
                } else {
                    const double d = th(i) - th(k);
                    const double c = std::cos(d), s = std::sin(d);
                    const double gp = g(i, k) * c + b(i, k) * s;
                    const double gq = g(i, k) * s - b(i, k) * c;
                    jac(ri, ck) = vm(i) * vm(k) * gq;
                    jac(ri, unknowns + ck) = vm(i) * gp;
                    jac(unknowns + ri, ck) = -vm(i) * vm(k) * gp;
                    jac(unknowns + ri, unknowns + ck) = vm(i) * gq;
                }
            }
        }
        Eigen::VectorXd delta = jac.partialPivLu().solve(mismatch);
        for (int i = 1; i < n; ++i) {
            th(i) += delta(i - 1);
            vm(i) += delta(unknowns + i - 1);
        }
    }

    out.v.resize(n);
    for (int i = 0; i < n; ++i) out.v(i) = std::polar(vm(i), th(i));
    out.current = model.admittance() * out.v;
    return out;
}

Eigen::VectorXcd step_injections(const FeederModel& model, const ScenarioStep& step,
                                 const Eigen::VectorXd& p_set,
                                 const Eigen::VectorXd& q_set) {
    Eigen::VectorXcd inj = Eigen::VectorXcd::Zero(model.node_count());
    for (size_t h = 0; h < model.houses().size(); ++h) {
        const int node = model.houses()[h];
        inj(node) = Complex(p_set(h) - step.p_load[h], q_set(h) - step.q_load[h]);
    }
    return inj;
}

Eigen::VectorXcd baseline_injections(const FeederModel& model,
                                     const ScenarioStep& step) {
    const int nh = static_cast<int>(model.houses().size());
    Eigen::VectorXd p(nh), q = Eigen::VectorXd::Zero(nh);
    for (int h = 0; h < nh; ++h) p(h) = step.p_avail[h];
    return step_injections(model, step, p, q);
}

ExhaustiveResult minp_exhaustive(const FeederModel& model, const ScenarioStep& step,
                                 const DispatchSpec& spec,
                                 const std::vector<InverterSpec>& inverters, int k,
                                 const SolverSettings& settings) {
    const int nh = static_cast<int>(model.houses().size());
    if (nh > 5)
        throw std::invalid_argument("exhaustive search is capped at five houses");

    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 0; mask < (1u << nh); ++mask)
        if (static_cast<int>(std::popcount(mask)) <= k) masks.push_back(mask);

    DispatchSpec sub = spec;
    sub.lambda = 0.0;  // the selection-constrained problem carries no group term
    sub.lambda_h.reset();
    sub.lambda_p = 0.0;
    sub.lambda_q = 0.0;

    std::vector<DispatchSolution> sols(masks.size());
    parallel_for(masks.size(), [&](size_t i) {
        std::vector<bool> mask(nh);
        for (int h = 0; h < nh; ++h) mask[h] = (masks[i] >> h) & 1u;
        sols[i] = solve_dispatch(model, step, sub, inverters, settings, mask);
    });

    ExhaustiveResult out;
    for (size_t i = 0; i < masks.size(); ++i) {
        AssignmentOutcome rec;
        rec.mask = masks[i];
        rec.status = sols[i].status;
        rec.tight = sols[i].tight;
        rec.objective = sols[i].objective;
        out.assignments.push_back(rec);
        if (sols[i].status == SolveStatus::Optimal && sols[i].tight &&
            (!out.found || sols[i].objective < out.best_objective)) {
            out.found = true;
            out.best_mask = masks[i];
            out.best_objective = sols[i].objective;
            out.best = sols[i];
        }
    }
    return out;
}

namespace {

/// Objective of the scalar eta problem behind the soft threshold.
double eta_objective(double eta, const Eigen::Matrix2d& quad, const Eigen::Vector2d& lin,
                     double lambda) {
    Eigen::Matrix2d m = eta * quad + 0.5 * lambda * lambda * Eigen::Matrix2d::Identity();
    return eta - 0.5 * eta * lin.dot(m.ldlt().solve(lin));
}

}  // namespace

Eigen::Vector2d soft_threshold_setpoint(const Eigen::Matrix2d& quad,
                                        const Eigen::Vector2d& lin, double lambda) {
    const double c_norm = lin.norm();
    if (c_norm <= lambda) return Eigen::Vector2d::Zero();

    if (lambda == 0.0) {
        // unregularized quadratic minimum
        return -quad.ldlt().solve(lin);
    }

    // Bracket the minimizer of the scalar problem, then golden-section.
    double hi = 1.0;
    double f_hi = eta_objective(hi, quad, lin, lambda);
    for (int grow = 0; grow < 200; ++grow) {
        const double f_next = eta_objective(2.0 * hi, quad, lin, lambda);
        if (f_next >= f_hi) break;
        hi *= 2.0;
        f_hi = f_next;
    }
    hi *= 2.0;
    double lo = 0.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = eta_objective(x1, quad, lin, lambda);
    double f2 = eta_objective(x2, quad, lin, lambda);
    while (hi - lo > 1e-12 * (1.0 + hi)) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = eta_objective(x1, quad, lin, lambda);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = eta_objective(x2, quad, lin, lambda);
        }
    }
    const double eta = 0.5 * (lo + hi);
    Eigen::Matrix2d m = eta * quad + 0.5 * lambda * lambda * Eigen::Matrix2d::Identity();
    return -eta * m.ldlt().solve(lin);
}

DualCrosscheckReport crosscheck_duals(const DispatchProblem& problem,
                                      const Solution& solution,
                                      const ScenarioStep& step,
                                      const DispatchSpec& spec) {
    DualCrosscheckReport rep;
    const int nh = problem.num_houses;
    DispatchSpec prepared = spec;
    prepared.prepare(nh);
    if (prepared.c_deviation > 0 || prepared.enforce_pf || prepared.lambda_p > 0 ||
        prepared.lambda_q > 0 || prepared.pin_curtail_zero ||
        prepared.pin_reactive_zero)
        return rep;  // closed form derived without these terms
    if (solution.status != SolveStatus::Optimal) return rep;
    rep.applicable = true;
    rep.houses.resize(nh);

    for (int h = 0; h < nh; ++h) {
        HouseCrosscheck& hc = rep.houses[h];
        if (problem.curtail[h] < 0 || problem.q_plus[h] < 0) continue;  // no inverter freedom
        hc.applicable = true;
        hc.lambda = prepared.group_weight(h);

        // Multipliers, mapped to the sign convention of the quadratic
        // subproblem (balance rows enter with an opposite orientation).
        const double mu_p = -solution.eq_duals(problem.row_balance_p[h]);
        const double mu_q = -solution.eq_duals(problem.row_balance_q[h]);
        const double nu_lo = solution.var_duals(problem.curtail[h]);
        const double nu_hi = solution.eq_duals(problem.row_pc_upper[h]);
        const double gamma = problem.lmi_rating[h] >= 0
                                 ? solution.lmi_duals[problem.lmi_rating[h]](0, 0)
                                 : 0.0;

        Eigen::Matrix2d quad = Eigen::Matrix2d::Zero();
        quad(0, 0) = 2.0 * prepared.c_curtail * prepared.a[h];
        quad += 2.0 * gamma * Eigen::Matrix2d::Identity();

        Eigen::Vector2d lin;
        lin(0) = prepared.c_curtail * prepared.b[h] + mu_p + (nu_hi - nu_lo) +
                 gamma * (-2.0 * step.p_avail[h]);
        lin(1) = -mu_q;

        hc.c_norm = lin.norm();
        hc.actual << problem.p_curtail(h, solution.vars),
            problem.q_set(h, solution.vars);
        hc.selected = hc.actual.norm() > 1e-4;
        if (hc.lambda > 0) {
            hc.predicted = soft_threshold_setpoint(quad, lin, hc.lambda);
            hc.discrepancy = (hc.predicted - hc.actual).norm();
        } else {
            // Without the group weight the minimizer need not be unique, so
            // test first-order optimality componentwise. The curtailment
            // component only pins the multipliers when it is strictly inside
            // its box (at a bound the cost-epigraph dual is degenerate).
            hc.predicted = hc.actual;
            const Eigen::Vector2d grad = quad * hc.actual + lin;
            hc.discrepancy = std::abs(grad(1));
            const double pc = hc.actual(0);
            if (pc > 1e-6 && pc < step.p_avail[h] - 1e-6)
                hc.discrepancy = std::max(hc.discrepancy, std::abs(grad(0)));
        }
        rep.max_discrepancy = std::max(rep.max_discrepancy, hc.discrepancy);
    }
    return rep;
}

}  // namespace oid
