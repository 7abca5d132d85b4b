#include "oid/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace oid {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal_infeasible";
        case SolveStatus::DualInfeasible: return "dual_infeasible";
        case SolveStatus::MaxIterations: return "max_iter";
        case SolveStatus::Numerical: return "numerical";
    }
    return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Nesterov-Todd scaling state for the product cone.
struct Scaling {
    VectorXd w_nn;    // nonneg: w_i = sqrt(x_i / s_i)
    VectorXd lam_nn;  // nonneg scaled point sqrt(x_i s_i)
    struct PsdScaling {
        MatrixXd r, rinv;  // scaling factor, lam = rinv * X * rinv' = r' * S * r
        VectorXd lam;      // diagonal of the scaled point
        MatrixXd big;      // r * r'
        MatrixXd big_inv;  // (r * r')^{-1}
    };
    std::vector<PsdScaling> psd;
    bool ok = true;
};

struct Blocks {
    const ConeLayout* lay;
    explicit Blocks(const ConeLayout& l) : lay(&l) {}
    MatrixXd mat(const VectorXd& v, int k) const {
        return smat(v.segment(lay->psd_offset(k), svec_dim(lay->psd[k])));
    }
    void set_mat(VectorXd& v, int k, const MatrixXd& m) const {
        v.segment(lay->psd_offset(k), svec_dim(lay->psd[k])) = svec(m);
    }
};

Scaling compute_scaling(const ConeLayout& lay, const VectorXd& x, const VectorXd& s) {
    Scaling sc;
    Blocks bl(lay);
    sc.w_nn = (x.head(lay.nonneg).array() / s.head(lay.nonneg).array()).sqrt();
    sc.lam_nn = (x.head(lay.nonneg).array() * s.head(lay.nonneg).array()).sqrt();
    if (!sc.w_nn.allFinite() || (sc.w_nn.array() <= 0).any()) {
        sc.ok = false;
        return sc;
    }
    sc.psd.resize(lay.psd.size());
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        MatrixXd xm = bl.mat(x, static_cast<int>(k));
        MatrixXd sm = bl.mat(s, static_cast<int>(k));
        Eigen::LLT<MatrixXd> lx(xm), ls(sm);
        if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
            sc.ok = false;
            return sc;
        }
        MatrixXd l1 = lx.matrixL();
        MatrixXd l2 = ls.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(l2.transpose() * l1,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
        VectorXd sig = svd.singularValues();
        if ((sig.array() <= 0).any()) {
            sc.ok = false;
            return sc;
        }
        VectorXd sig_isqrt = sig.array().sqrt().inverse();
        auto& ps = sc.psd[k];
        ps.r = l1 * svd.matrixV() * sig_isqrt.asDiagonal();
        ps.rinv = sig_isqrt.asDiagonal() * svd.matrixU().transpose() * l2.transpose();
        ps.lam = sig;
        ps.big = ps.r * ps.r.transpose();
        ps.big_inv = ps.rinv.transpose() * ps.rinv;
        ps.big = 0.5 * (ps.big + ps.big.transpose());
        ps.big_inv = 0.5 * (ps.big_inv + ps.big_inv.transpose());
    }
    return sc;
}

/// u <- H^{-1} v with H = W^{-1} W^{-T}; per block: nonneg w^2 .* v, psd R v R.
VectorXd apply_h_inv(const ConeLayout& lay, const Scaling& sc, const VectorXd& v) {
    VectorXd out(v.size());
    out.head(lay.nonneg) =
        v.head(lay.nonneg).array() * sc.w_nn.array() * sc.w_nn.array();
    Blocks bl(lay);
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        MatrixXd m = bl.mat(v, static_cast<int>(k));
        MatrixXd r = sc.psd[k].big * m * sc.psd[k].big;
        bl.set_mat(out, static_cast<int>(k), 0.5 * (r + r.transpose()));
    }
    return out;
}

/// Largest step alpha so that the scaled point lam + alpha * dir stays in
/// the cone; dir given in scaled coordinates.
double max_step_nn(const VectorXd& lam, const VectorXd& dir) {
    double a = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lam.size(); ++i)
        if (dir(i) < 0) a = std::min(a, -lam(i) / dir(i));
    return a;
}

double max_step_psd(const VectorXd& lam, const MatrixXd& dir) {
    VectorXd isq = lam.array().sqrt().inverse();
    MatrixXd m = isq.asDiagonal() * dir * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                               Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    return emin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / emin;
}

struct Direction {
    VectorXd dx, dy, ds;
    double dtau = 0.0, dkappa = 0.0;
};

/// Dense Schur-complement KKT solver for [H, -A'; A, 0] systems, rebuilt
/// every iteration from the current scaling.
class KktSolver {
  public:
    bool factor(const StandardProblem& p, const Scaling& sc) {
        lay_ = &p.cones;
        sc_ = &sc;
        a_ = &p.A;
        const int m = static_cast<int>(p.A.rows());
        const int n = static_cast<int>(p.A.cols());
        hinv_at_.resize(n, m);
        VectorXd col(n);
        for (int r = 0; r < m; ++r) {
            col.setZero();
            for (Eigen::SparseMatrix<double>::InnerIterator it(at_cache(p), r); it; ++it)
                col(it.row()) = it.value();
            hinv_at_.col(r) = apply_h_inv(*lay_, sc, col);
        }
        MatrixXd schur = (*a_) * hinv_at_;
        schur = 0.5 * (schur + schur.transpose());
        ldlt_.compute(schur);
        if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive()) {
            // one retry with a small ridge
            const double ridge = 1e-14 * schur.trace() / m + 1e-300;
            schur.diagonal().array() += ridge;
            ldlt_.compute(schur);
            if (ldlt_.info() != Eigen::Success) return false;
        }
        return true;
    }

    /// Solve H p - A' q = r1, A p = r2.
    void solve(const VectorXd& r1, const VectorXd& r2, VectorXd& p, VectorXd& q,
               int refine_rounds) const {
        solve_once(r1, r2, p, q);
        for (int round = 0; round < refine_rounds; ++round) {
            VectorXd res1 = r1 - hp(p) + at_mul(q);
            VectorXd res2 = r2 - (*a_) * p;
            VectorXd dp, dq;
            solve_once(res1, res2, dp, dq);
            p += dp;
            q += dq;
        }
    }

  private:
    void solve_once(const VectorXd& r1, const VectorXd& r2, VectorXd& p,
                    VectorXd& q) const {
        VectorXd hr1 = apply_h_inv(*lay_, *sc_, r1);
        q = ldlt_.solve((*a_) * hr1 - r2);
        // H p = r1 + A' (-q)?  From H p - A' q = r1: p = H^{-1}(r1 + A' q).
        // Schur: A H^{-1}(r1 + A' q) = r2 -> (A H^{-1} A') q = r2 - A H^{-1} r1.
        q = -q;
        p = hr1 + hinv_at_ * q;
    }

    VectorXd hp(const VectorXd& p) const {
        // H p via the scaling: H = W^{-1} W^{-T}.
        VectorXd out(p.size());
        out.head(lay_->nonneg) =
            p.head(lay_->nonneg).array() / (sc_->w_nn.array() * sc_->w_nn.array());
        Blocks bl(*lay_);
        for (size_t k = 0; k < lay_->psd.size(); ++k) {
            MatrixXd m = bl.mat(p, static_cast<int>(k));
            MatrixXd r = sc_->psd[k].big_inv * m * sc_->psd[k].big_inv;
            bl.set_mat(out, static_cast<int>(k), 0.5 * (r + r.transpose()));
        }
        return out;
    }

    VectorXd at_mul(const VectorXd& q) const { return at_ * q; }

    const Eigen::SparseMatrix<double>& at_cache(const StandardProblem& p) {
        if (at_.rows() != p.A.cols()) at_ = p.A.transpose();
        return at_;
    }

    const ConeLayout* lay_ = nullptr;
    const Scaling* sc_ = nullptr;
    const Eigen::SparseMatrix<double>* a_ = nullptr;
    Eigen::SparseMatrix<double> at_;
    MatrixXd hinv_at_;
    Eigen::LDLT<MatrixXd> ldlt_;
};

VectorXd cone_identity(const ConeLayout& lay) {
    VectorXd e = VectorXd::Zero(lay.dim());
    e.head(lay.nonneg).setOnes();
    Blocks bl(lay);
    for (size_t k = 0; k < lay.psd.size(); ++k)
        bl.set_mat(e, static_cast<int>(k), MatrixXd::Identity(lay.psd[k], lay.psd[k]));
    return e;
}

}  // namespace

RawSolution solve_standard(const StandardProblem& problem, const SolverSettings& settings) {
    const ConeLayout& lay = problem.cones;
    const int m = static_cast<int>(problem.A.rows());
    Blocks bl(lay);
    RawSolution out;

    // Normalize the objective so tolerances behave uniformly across specs.
    const double c_scale = std::max(1.0, problem.c.lpNorm<Eigen::Infinity>());
    const VectorXd c = problem.c / c_scale;
    const VectorXd& b = problem.b;
    const double b_norm = 1.0 + b.norm();
    const double c_norm = 1.0 + c.norm();

    VectorXd x = cone_identity(lay);
    VectorXd s = x;
    VectorXd y = VectorXd::Zero(m);
    double tau = 1.0, kappa = 1.0;
    const double degree = lay.degree() + 1;

    KktSolver kkt;
    double prev_mu = std::numeric_limits<double>::infinity();
    int stall_count = 0;

    auto finish = [&](SolveStatus st, const std::string& msg, int iter) {
        out.status = st;
        out.message = msg;
        out.iterations = iter;
        out.x = x;
        out.y = y * c_scale;
        out.s = s * c_scale;
        out.tau = tau;
        out.kappa = kappa;
        return out;
    };

    for (int iter = 0; iter <= settings.max_iter; ++iter) {
        const VectorXd rho_p = problem.A * x - b * tau;          // primal residual
        const VectorXd rho_d = -(problem.A.transpose() * y) + c * tau - s;
        const double rho_g = b.dot(y) - c.dot(x) - kappa;
        const double mu = (x.dot(s) + tau * kappa) / degree;

        const double pobj = c.dot(x) / tau;
        const double dobj = b.dot(y) / tau;
        const double pres = rho_p.norm() / tau / b_norm;
        const double dres = rho_d.norm() / tau / c_norm;
        const double gap = x.dot(s) / (tau * tau);
        const double rel_gap = gap / (1.0 + 0.5 * (std::abs(pobj) + std::abs(dobj)));

        out.primal_obj = pobj * c_scale;
        out.dual_obj = dobj * c_scale;
        out.primal_res = pres;
        out.dual_res = dres;
        out.rel_gap = rel_gap;
        // The trace reports the complementarity-implied lower bound as the
        // dual objective; the raw b'y/tau is meaningless while the embedded
        // iterate is still infeasible.
        out.trace.push_back({iter, mu, pobj * c_scale, (pobj - gap) * c_scale, pres,
                             dres, rel_gap, tau, kappa, 0.0});
        if (settings.verbose)
            std::printf("it %3d  mu %9.2e  pobj %+12.5e  dobj %+12.5e  p %8.1e  d %8.1e  g %8.1e  tau %8.1e\n",
                        iter, mu, pobj * c_scale, dobj * c_scale, pres, dres, rel_gap, tau);

        if (pres <= settings.feas_tol && dres <= settings.feas_tol &&
            rel_gap <= settings.gap_tol)
            return finish(SolveStatus::Optimal, "converged", iter);

        // Infeasibility certificates.
        const double by = b.dot(y);
        if (by > settings.feas_tol) {
            const double cert = (problem.A.transpose() * y + s).norm();
            if (cert <= settings.feas_tol * by * c_norm)
                return finish(SolveStatus::PrimalInfeasible,
                              "Farkas certificate found", iter);
        }
        const double cx = c.dot(x);
        if (cx < -settings.feas_tol) {
            const double cert = (problem.A * x).norm();
            if (cert <= settings.feas_tol * (-cx) * b_norm)
                return finish(SolveStatus::DualInfeasible,
                              "unboundedness certificate found", iter);
        }
        if (iter == settings.max_iter) break;
        if (tau < 1e-10 * std::max(1.0, kappa))
            return finish(SolveStatus::Numerical,
                          "tau collapsed without certificate at iteration " +
                              std::to_string(iter),
                          iter);

        Scaling sc = compute_scaling(lay, x, s);
        if (!sc.ok)
            return finish(SolveStatus::Numerical,
                          "iterate left the cone interior at iteration " +
                              std::to_string(iter),
                          iter);
        if (!kkt.factor(problem, sc))
            return finish(SolveStatus::Numerical,
                          "KKT factorization failed at iteration " + std::to_string(iter),
                          iter);

        // Constant part: H u1 - A' v1 = -c, A u1 = b.
        VectorXd u1, v1;
        kkt.solve(-c, b, u1, v1, settings.refine_rounds);
        const double denom = kappa / tau - c.dot(u1) + b.dot(v1);

        auto direction = [&](double sigma, const VectorXd& ds_target, double dkap_target,
                             Direction& dir) {
            // f_x = (sigma-1) rho_d ... see module notes; ds_target is
            // g = lambda \ d_s expressed per block in unscaled coordinates
            // via W^{-1}(g).
            const VectorXd f_x = (sigma - 1.0) * rho_d + ds_target;
            const VectorXd f_y = (sigma - 1.0) * rho_p;
            const double f_t = (sigma - 1.0) * rho_g + dkap_target / tau;
            VectorXd u2, v2;
            kkt.solve(f_x, f_y, u2, v2, settings.refine_rounds);
            dir.dtau = (f_t + c.dot(u2) - b.dot(v2)) / denom;
            dir.dx = u1 * dir.dtau + u2;
            dir.dy = v1 * dir.dtau + v2;
            dir.ds = -(problem.A.transpose() * dir.dy) + c * dir.dtau -
                     (sigma - 1.0) * rho_d;
            dir.dkappa = (dkap_target - kappa * dir.dtau) / tau;
        };

        auto max_step = [&](const Direction& dir) {
            // Scaled directions per block.
            double a = std::numeric_limits<double>::infinity();
            VectorXd dxs = dir.dx.head(lay.nonneg).array() / sc.w_nn.array();
            VectorXd dss = dir.ds.head(lay.nonneg).array() * sc.w_nn.array();
            a = std::min(a, max_step_nn(sc.lam_nn, dxs));
            a = std::min(a, max_step_nn(sc.lam_nn, dss));
            for (size_t k = 0; k < lay.psd.size(); ++k) {
                MatrixXd dxm = bl.mat(dir.dx, static_cast<int>(k));
                MatrixXd dsm = bl.mat(dir.ds, static_cast<int>(k));
                MatrixXd p = sc.psd[k].rinv * dxm * sc.psd[k].rinv.transpose();
                MatrixXd q = sc.psd[k].r.transpose() * dsm * sc.psd[k].r;
                a = std::min(a, max_step_psd(sc.psd[k].lam, 0.5 * (p + p.transpose())));
                a = std::min(a, max_step_psd(sc.psd[k].lam, 0.5 * (q + q.transpose())));
            }
            if (dir.dtau < 0) a = std::min(a, -tau / dir.dtau);
            if (dir.dkappa < 0) a = std::min(a, -kappa / dir.dkappa);
            return a;
        };

        // Affine (predictor) direction: sigma = 0, d_s = -lam o lam, so
        // W^{-1}(lam \ d_s) = -s exactly.
        Direction aff;
        direction(0.0, -s, -tau * kappa, aff);
        const double alpha_aff = std::min(1.0, max_step(aff));

        const double gap_now = x.dot(s) + tau * kappa;
        const double gap_aff = (x + alpha_aff * aff.dx).dot(s + alpha_aff * aff.ds) +
                               (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa);
        double sigma = std::pow(std::max(0.0, gap_aff / gap_now), 3.0);
        sigma = std::min(1.0, sigma);

        // Combined direction with Mehrotra correction.
        auto build_ds_target = [&](double sig, bool with_corrector, VectorXd& target,
                                   double& dkap_target) {
            // nonneg: d_s = sig*mu - lam^2 - dx_aff.*ds_aff (scaled products
            // coincide with plain products); then W^{-1}(lam \ d_s).
            target.resize(lay.dim());
            VectorXd d_nn = VectorXd::Constant(lay.nonneg, sig * mu) -
                            sc.lam_nn.cwiseProduct(sc.lam_nn);
            if (with_corrector)
                d_nn -= aff.dx.head(lay.nonneg).cwiseProduct(aff.ds.head(lay.nonneg));
            target.head(lay.nonneg) = d_nn.array() / sc.lam_nn.array() / sc.w_nn.array();
            for (size_t k = 0; k < lay.psd.size(); ++k) {
                const auto& ps = sc.psd[k];
                MatrixXd d = MatrixXd::Zero(lay.psd[k], lay.psd[k]);
                if (with_corrector) {
                    MatrixXd dxm = bl.mat(aff.dx, static_cast<int>(k));
                    MatrixXd dsm = bl.mat(aff.ds, static_cast<int>(k));
                    MatrixXd p = ps.rinv * dxm * ps.rinv.transpose();
                    MatrixXd q = ps.r.transpose() * dsm * ps.r;
                    d = -0.5 * (p * q + q * p);
                }
                d.diagonal().array() += sig * mu;
                d.diagonal() -= ps.lam.cwiseProduct(ps.lam);
                // g solves (Lam g + g Lam)/2 = d
                MatrixXd g(d.rows(), d.cols());
                for (int i = 0; i < d.rows(); ++i)
                    for (int j = 0; j < d.cols(); ++j)
                        g(i, j) = 2.0 * d(i, j) / (ps.lam(i) + ps.lam(j));
                MatrixXd w_inv_g = ps.rinv.transpose() * g * ps.rinv;
                bl.set_mat(target, static_cast<int>(k),
                           0.5 * (w_inv_g + w_inv_g.transpose()));
            }
            dkap_target = sig * mu - tau * kappa;
            if (with_corrector) dkap_target -= aff.dtau * aff.dkappa;
        };

        auto mu_after = [&](const Direction& dir, double alpha) {
            return ((x + alpha * dir.dx).dot(s + alpha * dir.ds) +
                    (tau + alpha * dir.dtau) * (kappa + alpha * dir.dkappa)) /
                   degree;
        };

        VectorXd ds_comb;
        double dkap_comb;
        build_ds_target(sigma, true, ds_comb, dkap_comb);
        Direction comb;
        direction(sigma, ds_comb, dkap_comb, comb);
        double alpha = std::min(1.0, settings.step_fraction * max_step(comb));

        // Near-degenerate optima the corrector can poison the step; fall
        // back to a plain centering direction when progress evaporates.
        if (!std::isfinite(alpha) || alpha < 0.05 ||
            mu_after(comb, alpha) > 0.999 * mu) {
            VectorXd ds_cent;
            double dkap_cent;
            build_ds_target(0.8, false, ds_cent, dkap_cent);
            Direction cent;
            direction(0.8, ds_cent, dkap_cent, cent);
            const double alpha_cent =
                std::min(1.0, settings.step_fraction * max_step(cent));
            if (std::isfinite(alpha_cent) && alpha_cent > 0 &&
                (!std::isfinite(alpha) || alpha <= 0 ||
                 mu_after(cent, alpha_cent) < mu_after(comb, alpha))) {
                comb = cent;
                alpha = alpha_cent;
            }
        }
        if (!std::isfinite(alpha) || alpha <= 0)
            return finish(SolveStatus::Numerical,
                          "no admissible step at iteration " + std::to_string(iter), iter);

        x += alpha * comb.dx;
        y += alpha * comb.dy;
        s += alpha * comb.ds;
        tau += alpha * comb.dtau;
        kappa += alpha * comb.dkappa;
        out.trace.back().step = alpha;

        if (alpha < 1e-7 || mu > 0.9999 * prev_mu) {
            if (++stall_count >= 3)
                return finish(SolveStatus::Numerical,
                              "stalled at iteration " + std::to_string(iter), iter);
        } else {
            stall_count = 0;
        }
        prev_mu = mu;
    }
    return finish(SolveStatus::MaxIterations, "iteration limit reached",
                  settings.max_iter);
}

Solution solve(const ConicProgram& program, const SolverSettings& settings) {
    Lowering lo = lower(program);
    RawSolution raw = solve_standard(lo.std_problem, settings);

    Solution sol;
    sol.status = raw.status;
    sol.iterations = raw.iterations;
    sol.message = raw.message;
    sol.trace = std::move(raw.trace);
    sol.rel_gap = raw.rel_gap;
    sol.primal_res = raw.primal_res;
    sol.dual_res = raw.dual_res;
    sol.objective = raw.primal_obj + lo.std_problem.obj_offset;
    sol.dual_objective = raw.dual_obj + lo.std_problem.obj_offset;

    const double tau = raw.tau;
    const ConeLayout& lay = lo.std_problem.cones;

    sol.vars.resize(program.num_vars());
    for (int i = 0; i < program.num_vars(); ++i)
        sol.vars(i) = raw.x(lo.var_coord[i]) / tau;

    if (lo.v_block >= 0) {
        const int off = lay.psd_offset(lo.v_block);
        const int d = svec_dim(lay.psd[lo.v_block]);
        const double gamma = lo.psd_scale[lo.v_block];
        sol.v = gamma * unembed_hermitian(smat(raw.x.segment(off, d))) / tau;
        sol.v_dual = 2.0 / gamma * unembed_hermitian(smat(raw.s.segment(off, d))) / tau;
    }

    // Equality-row duals, unscaled back through the row equilibration.
    sol.eq_duals.resize(program.constraints.size());
    for (size_t i = 0; i < program.constraints.size(); ++i) {
        const int r = lo.constraint_row[i];
        sol.eq_duals(i) = raw.y(r) / lo.row_scale(r) / tau;
    }
    sol.var_duals.resize(program.num_vars());
    for (int i = 0; i < program.num_vars(); ++i)
        sol.var_duals(i) = raw.s(lo.var_coord[i]) / tau;

    sol.lmi_duals.resize(program.lmis.size());
    for (size_t k = 0; k < program.lmis.size(); ++k) {
        const int blk = lo.lmi_block[k];
        const int off = lay.psd_offset(blk);
        const int d = svec_dim(lay.psd[blk]);
        sol.lmi_duals[k] = smat(raw.s.segment(off, d)) / lo.psd_scale[blk] / tau;
    }
    return sol;
}

KktReport check_kkt(const ConicProgram& program, const Solution& sol) {
    KktReport rep;
    const Eigen::MatrixXcd& v = sol.v;
    const VectorXd& vars = sol.vars;

    for (size_t i = 0; i < program.constraints.size(); ++i) {
        const auto& con = program.constraints[i];
        const double g = con.expr.eval(v, vars);
        if (con.op == RelOp::Eq) {
            rep.primal_eq = std::max(rep.primal_eq, std::abs(g));
        } else {
            rep.primal_ineq = std::max(rep.primal_ineq, std::max(0.0, -g));
            rep.dual_cone = std::max(rep.dual_cone, std::max(0.0, -sol.eq_duals(i)));
            rep.complementarity =
                std::max(rep.complementarity, std::abs(sol.eq_duals(i) * g));
        }
    }
    for (int j = 0; j < program.num_vars(); ++j) {
        rep.primal_ineq = std::max(rep.primal_ineq, std::max(0.0, -vars(j)));
        rep.dual_cone = std::max(rep.dual_cone, std::max(0.0, -sol.var_duals(j)));
        rep.complementarity =
            std::max(rep.complementarity, std::abs(sol.var_duals(j) * vars(j)));
    }
    for (size_t k = 0; k < program.lmis.size(); ++k) {
        const MatrixXd bv = program.lmis[k].eval(v, vars);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(bv, Eigen::EigenvaluesOnly);
        rep.primal_cone = std::max(rep.primal_cone, std::max(0.0, -es.eigenvalues().minCoeff()));
        Eigen::SelfAdjointEigenSolver<MatrixXd> ed(sol.lmi_duals[k], Eigen::EigenvaluesOnly);
        rep.dual_cone = std::max(rep.dual_cone, std::max(0.0, -ed.eigenvalues().minCoeff()));
        rep.complementarity = std::max(
            rep.complementarity, std::abs((sol.lmi_duals[k].transpose() * bv).trace()));
    }
    if (program.v_dim > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ev(v, Eigen::EigenvaluesOnly);
        rep.primal_cone = std::max(rep.primal_cone, std::max(0.0, -ev.eigenvalues().minCoeff()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> evd(sol.v_dual, Eigen::EigenvaluesOnly);
        rep.dual_cone = std::max(rep.dual_cone, std::max(0.0, -evd.eigenvalues().minCoeff()));
        rep.complementarity = std::max(
            rep.complementarity, std::abs((sol.v_dual.adjoint() * v).trace().real()));
    }

    // Stationarity: grad f - sum duals * grad g - reduced costs - LMI terms.
    VectorXd grad = VectorXd::Zero(program.num_vars());
    for (const auto& t : program.objective.terms) grad(t.var) += t.coeff;
    Eigen::MatrixXcd vgrad = Eigen::MatrixXcd::Zero(program.v_dim, program.v_dim);
    if (program.objective.has_v()) vgrad += program.objective.v_coeff;

    for (size_t i = 0; i < program.constraints.size(); ++i) {
        const double th = sol.eq_duals(i);
        for (const auto& t : program.constraints[i].expr.terms)
            grad(t.var) -= th * t.coeff;
        if (program.constraints[i].expr.has_v())
            vgrad -= th * program.constraints[i].expr.v_coeff;
    }
    for (int j = 0; j < program.num_vars(); ++j) grad(j) -= sol.var_duals(j);
    for (size_t k = 0; k < program.lmis.size(); ++k) {
        const auto& lmi = program.lmis[k];
        const MatrixXd& th = sol.lmi_duals[k];
        for (int i = 0; i < lmi.dim; ++i)
            for (int j = 0; j < lmi.dim; ++j) {
                const auto& e = lmi.at(i, j);
                for (const auto& t : e.terms) grad(t.var) -= th(i, j) * t.coeff;
                if (e.has_v()) vgrad -= th(i, j) * e.v_coeff;
            }
    }
    rep.dual_stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (program.v_dim > 0) {
        vgrad -= sol.v_dual;
        rep.dual_stationarity =
            std::max(rep.dual_stationarity, vgrad.cwiseAbs().maxCoeff());
    }
    return rep;
}

double KktReport::worst() const {
    return std::max({primal_eq, primal_ineq, primal_cone, dual_stationarity, dual_cone,
                     complementarity});
}

}  // namespace oid
