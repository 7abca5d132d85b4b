#include "oid/formulation.hpp"

#include <cmath>

namespace oid {

Eigen::MatrixXcd FormulationMatrices::node_mag(int n) const {
    const int dim = static_cast<int>(projector.rows());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    m(n, n) = 1.0;
    return m;
}

FormulationMatrices build_formulation_matrices(const FeederModel& model) {
    const int n = model.node_count();
    FormulationMatrices f;
    f.z.reserve(n);
    f.zbar.reserve(n);
    const Eigen::MatrixXcd& y = model.admittance();
    const Complex imag_unit(0.0, 1.0);
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXcd yk = Eigen::MatrixXcd::Zero(n, n);
        yk.row(k) = y.row(k);
        f.z.push_back(0.5 * (yk + yk.adjoint()));
        f.zbar.push_back(0.5 * imag_unit * (yk - yk.adjoint()));
    }
    f.projector = Eigen::MatrixXd::Identity(n, n) -
                  Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    f.loss = model.total_loss();
    return f;
}

double DispatchProblem::q_set(int house, const Eigen::VectorXd& vars) const {
    if (q_plus[house] < 0) return 0.0;
    return vars(q_plus[house]) - vars(q_minus[house]);
}

double DispatchProblem::p_curtail(int house, const Eigen::VectorXd& vars) const {
    return curtail[house] < 0 ? 0.0 : vars(curtail[house]);
}

ProblemBuilder::ProblemBuilder(const FeederModel& model, const ScenarioStep& step,
                               const DispatchSpec& spec,
                               const std::vector<InverterSpec>& inverters,
                               std::vector<bool> control_mask)
    : model_(model), step_(step), spec_(spec), inverters_(inverters),
      mask_(std::move(control_mask)), mats_(build_formulation_matrices(model)) {
    const int nh = static_cast<int>(model.houses().size());
    if (static_cast<int>(inverters.size()) != nh)
        throw std::invalid_argument("inverter specs do not cover every house");
    if (static_cast<int>(step.p_avail.size()) != nh)
        throw std::invalid_argument("scenario step does not cover every house");
    if (mask_.empty()) mask_.assign(nh, true);
    if (static_cast<int>(mask_.size()) != nh)
        throw std::invalid_argument("control mask length mismatch");
    spec_.prepare(nh);
    if (spec_.bounds.v_slack < spec_.bounds.v_min ||
        spec_.bounds.v_slack > spec_.bounds.v_max)
        throw std::invalid_argument("slack voltage outside the voltage band");

    out_.num_houses = nh;
    out_.program.v_dim = model.node_count();
    const int n = model.node_count();
    out_.curtail.assign(nh, -1);
    out_.q_plus.assign(nh, -1);
    out_.q_minus.assign(nh, -1);
    out_.cost_epi.assign(nh, -1);
    out_.group_epi.assign(nh, -1);
    out_.row_balance_p.assign(nh, -1);
    out_.row_balance_q.assign(nh, -1);
    out_.row_pc_upper.assign(nh, -1);
    out_.row_q_split.assign(nh, -1);
    out_.row_cost_linear.assign(nh, -1);
    out_.row_pf_pos.assign(nh, -1);
    out_.row_pf_neg.assign(nh, -1);
    out_.row_vmax.assign(n, -1);
    out_.row_vmin.assign(n, -1);
    out_.lmi_cost.assign(nh, -1);
    out_.lmi_group.assign(nh, -1);
    out_.lmi_rating.assign(nh, -1);
    out_.lmi_pf.assign(nh, -1);
}

bool ProblemBuilder::has_pc(int h) const {
    return mask_[h] && !spec_.pin_curtail_zero && step_.p_avail[h] > 0.0;
}

bool ProblemBuilder::has_q(int h) const { return mask_[h] && !spec_.pin_reactive_zero; }

void ProblemBuilder::add_variables() {
    const int nh = out_.num_houses;
    for (int h = 0; h < nh; ++h) {
        const std::string tag = std::to_string(h + 1);
        if (has_pc(h)) out_.curtail[h] = out_.program.new_var("p_c[" + tag + "]");
        if (has_q(h)) {
            out_.q_plus[h] = out_.program.new_var("q_pos[" + tag + "]");
            out_.q_minus[h] = out_.program.new_var("q_neg[" + tag + "]");
        }
        const bool active = out_.curtail[h] >= 0 || out_.q_plus[h] >= 0;
        if (spec_.c_curtail > 0 && out_.curtail[h] >= 0)
            out_.cost_epi[h] = out_.program.new_var("cost_epi[" + tag + "]");
        if (spec_.group_weight(h) > 0 && active)
            out_.group_epi[h] = out_.program.new_var("group_epi[" + tag + "]");
    }
    if (spec_.c_deviation > 0)
        out_.deviation_epi = out_.program.new_var("deviation_epi");
}

void ProblemBuilder::add_trace_constraints() {
    const int nh = out_.num_houses;
    auto& prog = out_.program;

    for (int h = 0; h < nh; ++h) {
        const int node = model_.houses()[h];
        ScalarConstraint p;
        p.expr.v_coeff = mats_.z[node];
        if (out_.curtail[h] >= 0) p.expr.add(out_.curtail[h], 1.0);
        p.expr.constant = step_.p_load[h] - step_.p_avail[h];
        p.op = RelOp::Eq;
        p.label = "balance_p[" + std::to_string(h + 1) + "]";
        out_.row_balance_p[h] = static_cast<int>(prog.constraints.size());
        prog.constraints.push_back(std::move(p));

        ScalarConstraint q;
        q.expr.v_coeff = mats_.zbar[node];
        if (out_.q_plus[h] >= 0) {
            q.expr.add(out_.q_plus[h], -1.0);
            q.expr.add(out_.q_minus[h], 1.0);
        }
        q.expr.constant = step_.q_load[h];
        q.op = RelOp::Eq;
        q.label = "balance_q[" + std::to_string(h + 1) + "]";
        out_.row_balance_q[h] = static_cast<int>(prog.constraints.size());
        prog.constraints.push_back(std::move(q));
    }

    for (int u : model_.poles()) {
        ScalarConstraint p;
        p.expr.v_coeff = mats_.z[u];
        p.op = RelOp::Eq;
        p.label = "pole_p[" + std::to_string(u) + "]";
        out_.row_pole_p.push_back(static_cast<int>(prog.constraints.size()));
        prog.constraints.push_back(std::move(p));
        ScalarConstraint q;
        q.expr.v_coeff = mats_.zbar[u];
        q.op = RelOp::Eq;
        q.label = "pole_q[" + std::to_string(u) + "]";
        out_.row_pole_q.push_back(static_cast<int>(prog.constraints.size()));
        prog.constraints.push_back(std::move(q));
    }

    // Slack magnitude is fixed; the band applies to the other nodes.
    {
        ScalarConstraint s;
        s.expr.v_coeff = mats_.node_mag(0);
        s.expr.constant = -spec_.bounds.v_slack * spec_.bounds.v_slack;
        s.op = RelOp::Eq;
        s.label = "slack_mag";
        out_.row_slack_mag = static_cast<int>(prog.constraints.size());
        prog.constraints.push_back(std::move(s));
    }
    const double vmax2 = spec_.bounds.v_max * spec_.bounds.v_max;
    const double vmin2 = spec_.bounds.v_min * spec_.bounds.v_min;
    for (int n = 1; n < model_.node_count(); ++n) {
        ScalarConstraint hi;
        hi.expr.v_coeff = -mats_.node_mag(n);
        hi.expr.constant = vmax2;
        hi.op = RelOp::Ge;
        hi.label = "vmax[" + std::to_string(n) + "]";
        out_.row_vmax[n] = static_cast<int>(prog.constraints.size());
        prog.constraints.push_back(std::move(hi));

        ScalarConstraint lo;
        lo.expr.v_coeff = mats_.node_mag(n);
        lo.expr.constant = -vmin2;
        lo.op = RelOp::Ge;
        lo.label = "vmin[" + std::to_string(n) + "]";
        out_.row_vmin[n] = static_cast<int>(prog.constraints.size());
        prog.constraints.push_back(std::move(lo));
    }
}

void ProblemBuilder::add_objective() {
    auto& obj = out_.program.objective;
    obj.v_coeff = spec_.c_loss * mats_.loss.cast<Complex>();
    for (int h = 0; h < out_.num_houses; ++h) {
        if (out_.cost_epi[h] >= 0) obj.add(out_.cost_epi[h], spec_.c_curtail);
        if (out_.group_epi[h] >= 0) obj.add(out_.group_epi[h], spec_.group_weight(h));
        if (spec_.lambda_p > 0 && out_.curtail[h] >= 0)
            obj.add(out_.curtail[h], spec_.lambda_p);
        if (spec_.lambda_q > 0 && out_.q_plus[h] >= 0) {
            obj.add(out_.q_plus[h], spec_.lambda_q);
            obj.add(out_.q_minus[h], spec_.lambda_q);
        }
    }
    if (out_.deviation_epi >= 0) obj.add(out_.deviation_epi, spec_.c_deviation);
}

void ProblemBuilder::add_setpoint_boxes() {
    auto& prog = out_.program;
    for (int h = 0; h < out_.num_houses; ++h) {
        if (out_.curtail[h] >= 0) {
            ScalarConstraint up;
            up.expr.add(out_.curtail[h], -1.0);
            up.expr.constant = step_.p_avail[h];
            up.op = RelOp::Ge;
            up.label = "pc_upper[" + std::to_string(h + 1) + "]";
            out_.row_pc_upper[h] = static_cast<int>(prog.constraints.size());
            prog.constraints.push_back(std::move(up));
        }
        if (out_.q_plus[h] >= 0) {
            // q_plus + q_minus <= rating keeps the split bounded; any
            // feasible q_s admits the minimal-split representation.
            ScalarConstraint cap;
            cap.expr.add(out_.q_plus[h], -1.0);
            cap.expr.add(out_.q_minus[h], -1.0);
            cap.expr.constant = inverters_[h].s_rating;
            cap.op = RelOp::Ge;
            cap.label = "q_split[" + std::to_string(h + 1) + "]";
            out_.row_q_split[h] = static_cast<int>(prog.constraints.size());
            prog.constraints.push_back(std::move(cap));
        }
        // Power-factor cuts |q_s| <= tan(theta) (p_avail - p_c).
        if (spec_.enforce_pf && out_.q_plus[h] >= 0) {
            const double tan_theta = std::tan(std::acos(inverters_[h].pf_min));
            if (spec_.pf_encoding == PfCutEncoding::LinearPair) {
                ScalarConstraint pos;  // tan (pbar - pc) - q_s >= 0
                if (out_.curtail[h] >= 0) pos.expr.add(out_.curtail[h], -tan_theta);
                pos.expr.add(out_.q_plus[h], -1.0);
                pos.expr.add(out_.q_minus[h], 1.0);
                pos.expr.constant = tan_theta * step_.p_avail[h];
                pos.op = RelOp::Ge;
                pos.label = "pf_pos[" + std::to_string(h + 1) + "]";
                out_.row_pf_pos[h] = static_cast<int>(prog.constraints.size());
                prog.constraints.push_back(std::move(pos));

                ScalarConstraint neg;  // tan (pbar - pc) + q_s >= 0
                if (out_.curtail[h] >= 0) neg.expr.add(out_.curtail[h], -tan_theta);
                neg.expr.add(out_.q_plus[h], 1.0);
                neg.expr.add(out_.q_minus[h], -1.0);
                neg.expr.constant = tan_theta * step_.p_avail[h];
                neg.op = RelOp::Ge;
                neg.label = "pf_neg[" + std::to_string(h + 1) + "]";
                out_.row_pf_neg[h] = static_cast<int>(prog.constraints.size());
                prog.constraints.push_back(std::move(neg));
            } else {
                // [[t, q], [q, t]] psd encodes |q| <= t.
                out_.lmi_pf[h] = static_cast<int>(prog.lmis.size());
                LmiBlock& blk =
                    prog.new_lmi(2, "pf_cone[" + std::to_string(h + 1) + "]");
                ScalarExpr t;
                if (out_.curtail[h] >= 0) t.add(out_.curtail[h], -tan_theta);
                t.constant = tan_theta * step_.p_avail[h];
                blk.at(0, 0) = t;
                blk.at(1, 1) = t;
                blk.at(1, 0).add(out_.q_plus[h], 1.0).add(out_.q_minus[h], -1.0);
            }
        }
    }
}

void ProblemBuilder::add_lmi_blocks() {
    auto& prog = out_.program;
    for (int h = 0; h < out_.num_houses; ++h) {
        const std::string tag = std::to_string(h + 1);
        // Curtailment-cost epigraph.
        if (out_.cost_epi[h] >= 0) {
            if (spec_.a[h] > 0) {
                out_.lmi_cost[h] = static_cast<int>(prog.lmis.size());
                LmiBlock& blk = prog.new_lmi(2, "cost_epi[" + tag + "]");
                blk.at(0, 0).add(out_.cost_epi[h], 1.0).add(out_.curtail[h],
                                                            -spec_.b[h]);
                blk.at(1, 0).add(out_.curtail[h], -std::sqrt(spec_.a[h]));
                blk.at(1, 1).constant = 1.0;
            } else {
                ScalarConstraint lin;  // epigraph degenerates to a line
                lin.expr.add(out_.cost_epi[h], 1.0).add(out_.curtail[h], -spec_.b[h]);
                lin.op = RelOp::Ge;
                lin.label = "cost_epi_lin[" + tag + "]";
                out_.row_cost_linear[h] = static_cast<int>(prog.constraints.size());
                prog.constraints.push_back(std::move(lin));
            }
        }
        // Group-norm epigraph: w >= || (p_c, q_s) ||.
        if (out_.group_epi[h] >= 0) {
            out_.lmi_group[h] = static_cast<int>(prog.lmis.size());
            LmiBlock& blk = prog.new_lmi(3, "group_norm[" + tag + "]");
            blk.at(0, 0).add(out_.group_epi[h], 1.0);
            blk.at(1, 1).add(out_.group_epi[h], 1.0);
            blk.at(2, 2).add(out_.group_epi[h], 1.0);
            if (out_.curtail[h] >= 0) blk.at(2, 0).add(out_.curtail[h], 1.0);
            if (out_.q_plus[h] >= 0)
                blk.at(2, 1).add(out_.q_plus[h], 1.0).add(out_.q_minus[h], -1.0);
        }
        // Apparent-power rating: q_s^2 + (pbar - p_c)^2 <= S^2.
        if (out_.curtail[h] >= 0 || out_.q_plus[h] >= 0) {
            const double s = inverters_[h].s_rating;
            out_.lmi_rating[h] = static_cast<int>(prog.lmis.size());
            LmiBlock& blk = prog.new_lmi(3, "rating[" + tag + "]");
            blk.at(0, 0).constant = s * s;
            if (out_.q_plus[h] >= 0)
                blk.at(1, 0).add(out_.q_plus[h], -1.0).add(out_.q_minus[h], 1.0);
            blk.at(2, 0).constant = -step_.p_avail[h];
            if (out_.curtail[h] >= 0) blk.at(2, 0).add(out_.curtail[h], 1.0);
            blk.at(1, 1).constant = 1.0;
            blk.at(2, 2).constant = 1.0;
        }
    }
    // Voltage-deviation epigraph over || proj * diag(V) ||.
    if (out_.deviation_epi >= 0) {
        const int n = model_.node_count();
        out_.lmi_deviation = static_cast<int>(prog.lmis.size());
        LmiBlock& blk = prog.new_lmi(n + 1, "deviation");
        for (int i = 0; i < n; ++i) {
            blk.at(i, i).add(out_.deviation_epi, 1.0);
            Eigen::MatrixXcd coeff = Eigen::MatrixXcd::Zero(n, n);
            for (int k = 0; k < n; ++k) coeff(k, k) = mats_.projector(i, k);
            blk.at(n, i).v_coeff = std::move(coeff);
        }
        blk.at(n, n).add(out_.deviation_epi, 1.0);
    }
}

DispatchProblem ProblemBuilder::take() { return std::move(out_); }

DispatchProblem assemble(const FeederModel& model, const ScenarioStep& step,
                         const DispatchSpec& spec,
                         const std::vector<InverterSpec>& inverters,
                         std::vector<bool> control_mask) {
    ProblemBuilder builder(model, step, spec, inverters, std::move(control_mask));
    builder.add_variables();
    builder.add_trace_constraints();
    builder.add_objective();
    builder.add_setpoint_boxes();
    builder.add_lmi_blocks();
    return builder.take();
}

}  // namespace oid
