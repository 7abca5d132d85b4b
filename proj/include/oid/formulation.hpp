#pragma once

#include <vector>

#include "oid/conic.hpp"
#include "oid/dispatch.hpp"
#include "oid/feeder.hpp"
#include "oid/scenario.hpp"

namespace oid {

/// Node-indexed Hermitian matrices behind the trace reformulation of the
/// power-balance and voltage constraints.
struct FormulationMatrices {
    std::vector<Eigen::MatrixXcd> z;     // real-power injection matrices
    std::vector<Eigen::MatrixXcd> zbar;  // reactive-power injection matrices
    Eigen::MatrixXd projector;           // I - 11'/(N+1)
    Eigen::MatrixXd loss;                // sum of edge loss matrices

    Eigen::MatrixXcd node_mag(int n) const;  // e_n e_n'
};

FormulationMatrices build_formulation_matrices(const FeederModel& model);

/// Assembled conic program plus the index maps needed to read solutions and
/// duals back in dispatch terms. Variable ids and row/LMI indices are -1
/// when the corresponding object is pinned away or not created.
struct DispatchProblem {
    ConicProgram program;
    int num_houses = 0;

    std::vector<VarId> curtail;        // active power removed per house
    std::vector<VarId> q_plus, q_minus;  // reactive split q_s = q_plus - q_minus
    std::vector<VarId> cost_epi;       // curtailment-cost epigraph
    std::vector<VarId> group_epi;      // group-norm epigraph
    VarId deviation_epi = -1;

    std::vector<int> row_balance_p, row_balance_q;  // per house
    std::vector<int> row_pole_p, row_pole_q;        // per pole
    int row_slack_mag = -1;
    std::vector<int> row_vmax, row_vmin;   // per node (slack entries -1)
    std::vector<int> row_pc_upper;         // p_c <= available
    std::vector<int> row_q_split;          // q_plus + q_minus <= rating
    std::vector<int> row_cost_linear;      // cost epigraph when a_h = 0
    std::vector<int> row_pf_pos, row_pf_neg;
    std::vector<int> lmi_cost, lmi_group, lmi_rating, lmi_pf;
    int lmi_deviation = -1;

    double q_set(int house, const Eigen::VectorXd& vars) const;
    double p_curtail(int house, const Eigen::VectorXd& vars) const;
};

/// Stage-wise builder for the relaxed dispatch program. assemble() runs all
/// stages in order; the stages are public so tests can exercise them.
class ProblemBuilder {
  public:
    ProblemBuilder(const FeederModel& model, const ScenarioStep& step,
                   const DispatchSpec& spec, const std::vector<InverterSpec>& inverters,
                   std::vector<bool> control_mask = {});

    void add_variables();
    void add_trace_constraints();
    void add_objective();
    void add_setpoint_boxes();
    void add_lmi_blocks();

    DispatchProblem take();

  private:
    const FeederModel& model_;
    const ScenarioStep& step_;
    DispatchSpec spec_;
    const std::vector<InverterSpec>& inverters_;
    std::vector<bool> mask_;
    FormulationMatrices mats_;
    DispatchProblem out_;
    bool has_pc(int h) const;
    bool has_q(int h) const;
};

DispatchProblem assemble(const FeederModel& model, const ScenarioStep& step,
                         const DispatchSpec& spec,
                         const std::vector<InverterSpec>& inverters,
                         std::vector<bool> control_mask = {});

}  // namespace oid
