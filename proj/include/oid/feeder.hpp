#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oid {

using Complex = std::complex<double>;

enum class LineKind { Drop, PolePole };
enum class NodeRole { Slack, Pole, House };

/// Single-phase pi-model line parameters in SI units.
struct LineParams {
    double r_ohm_per_km = 0.0;
    double l_mh_per_km = 0.0;
    double c_uf_per_km = 0.0;
    double length_m = 0.0;
    LineKind kind = LineKind::Drop;

    void validate() const;
};

struct PerUnitBase {
    double s_base_va = 10e3;
    double v_base_v = 240.0;
    double frequency_hz = 60.0;

    double z_base() const { return v_base_v * v_base_v / s_base_va; }
    double omega() const;
    void validate() const;
};

/// Per-unit admittances of one line: series element plus the total shunt
/// (half of which sits at each terminal when the matrix is assembled).
struct LineAdmittance {
    Complex series;
    Complex shunt_total;
};

LineAdmittance to_per_unit(const LineParams& params, const PerUnitBase& base);

/// Inverse of to_per_unit, used for round-trip checks and SI reporting.
LineParams from_per_unit(const LineAdmittance& adm, const PerUnitBase& base,
                         double length_m, LineKind kind);

struct FeederEdge {
    int from = -1;
    int to = -1;
    LineParams params;
    LineAdmittance admittance;  // filled in by build_admittance
};

struct FeederTopology {
    PerUnitBase base;
    std::vector<NodeRole> roles;  // indexed by node id; node 0 must be Slack
    std::vector<FeederEdge> edges;
};

/// Electrical model of a radial feeder. Node 0 is the transformer
/// secondary (slack); the remaining nodes are poles or houses.
class FeederModel {
  public:
    FeederModel(FeederTopology topology, Eigen::MatrixXcd admittance,
                std::vector<Eigen::MatrixXd> edge_loss, Eigen::MatrixXd total_loss);

    int node_count() const { return static_cast<int>(roles_.size()); }
    NodeRole role(int n) const { return roles_.at(n); }
    const std::vector<int>& houses() const { return houses_; }
    const std::vector<int>& poles() const { return poles_; }
    const std::vector<FeederEdge>& edges() const { return edges_; }
    const PerUnitBase& base() const { return base_; }

    const Eigen::MatrixXcd& admittance() const { return admittance_; }
    /// Rank-1 PSD loss matrix of edge e, conductance * (e_m - e_n)(e_m - e_n)^T.
    const Eigen::MatrixXd& edge_loss(int e) const { return edge_loss_.at(e); }
    const Eigen::MatrixXd& total_loss() const { return total_loss_; }

    /// Index of a house in the houses() ordering, -1 if n is not a house.
    int house_index(int n) const { return house_index_.at(n); }

  private:
    PerUnitBase base_;
    std::vector<NodeRole> roles_;
    std::vector<FeederEdge> edges_;
    std::vector<int> houses_;
    std::vector<int> poles_;
    std::vector<int> house_index_;
    Eigen::MatrixXcd admittance_;
    std::vector<Eigen::MatrixXd> edge_loss_;
    Eigen::MatrixXd total_loss_;
};

/// Assemble the bus admittance matrix and loss matrices from topology.
/// Throws std::invalid_argument on disconnected graphs, duplicate edges,
/// self loops, or a non-tree edge set.
FeederModel build_feeder(const FeederTopology& topology);

/// Load a feeder description from a JSON file (schema in docs/formats.md).
FeederModel load_feeder(const std::string& path);

/// The 19-node low-voltage test feeder used by the shipped fixtures:
/// a 6-pole chain with two drop lines per pole, 50 m pole spacing and
/// 20 m drops.
FeederTopology fixture_feeder_topology();

}  // namespace oid
