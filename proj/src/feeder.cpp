#include "oid/feeder.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

namespace oid {

namespace {
constexpr double kPi = std::numbers::pi;
}

void LineParams::validate() const {
    if (r_ohm_per_km < 0 || l_mh_per_km < 0 || c_uf_per_km < 0)
        throw std::invalid_argument("line parameters must be nonnegative");
    if (length_m <= 0)
        throw std::invalid_argument("line length must be positive");
    if (r_ohm_per_km == 0 && l_mh_per_km == 0)
        throw std::invalid_argument("line series impedance is singular (R = L = 0)");
}

double PerUnitBase::omega() const { return 2.0 * kPi * frequency_hz; }

void PerUnitBase::validate() const {
    if (s_base_va <= 0 || v_base_v <= 0 || frequency_hz <= 0)
        throw std::invalid_argument("per-unit base quantities must be positive");
}

LineAdmittance to_per_unit(const LineParams& params, const PerUnitBase& base) {
    base.validate();
    params.validate();
    const double len_km = params.length_m / 1000.0;
    const Complex z_si(params.r_ohm_per_km * len_km,
                       base.omega() * params.l_mh_per_km * 1e-3 * len_km);
    const Complex y_shunt_si(0.0, base.omega() * params.c_uf_per_km * 1e-6 * len_km);
    LineAdmittance out;
    out.series = base.z_base() / z_si;
    out.shunt_total = y_shunt_si * base.z_base();
    return out;
}

LineParams from_per_unit(const LineAdmittance& adm, const PerUnitBase& base,
                         double length_m, LineKind kind) {
    base.validate();
    const double len_km = length_m / 1000.0;
    const Complex z_si = base.z_base() / adm.series;
    LineParams p;
    p.length_m = length_m;
    p.kind = kind;
    p.r_ohm_per_km = z_si.real() / len_km;
    p.l_mh_per_km = z_si.imag() / (base.omega() * len_km) * 1e3;
    p.c_uf_per_km = adm.shunt_total.imag() / (base.z_base() * base.omega() * len_km) * 1e6;
    return p;
}

FeederModel::FeederModel(FeederTopology topology, Eigen::MatrixXcd admittance,
                         std::vector<Eigen::MatrixXd> edge_loss, Eigen::MatrixXd total_loss)
    : base_(topology.base),
      roles_(std::move(topology.roles)),
      edges_(std::move(topology.edges)),
      admittance_(std::move(admittance)),
      edge_loss_(std::move(edge_loss)),
      total_loss_(std::move(total_loss)) {
    house_index_.assign(roles_.size(), -1);
    for (int n = 0; n < static_cast<int>(roles_.size()); ++n) {
        if (roles_[n] == NodeRole::House) {
            house_index_[n] = static_cast<int>(houses_.size());
            houses_.push_back(n);
        } else if (roles_[n] == NodeRole::Pole) {
            poles_.push_back(n);
        }
    }
}

FeederModel build_feeder(const FeederTopology& topology) {
    topology.base.validate();
    const int n = static_cast<int>(topology.roles.size());
    if (n < 2) throw std::invalid_argument("feeder needs at least two nodes");
    if (topology.roles[0] != NodeRole::Slack)
        throw std::invalid_argument("node 0 must be the slack node");
    for (int i = 1; i < n; ++i)
        if (topology.roles[i] == NodeRole::Slack)
            throw std::invalid_argument("only node 0 may be the slack node");

    if (static_cast<int>(topology.edges.size()) != n - 1)
        throw std::invalid_argument("radial feeder must have exactly N edges for N+1 nodes");

    std::set<std::pair<int, int>> seen;
    FeederTopology topo = topology;
    for (auto& e : topo.edges) {
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.from == e.to) throw std::invalid_argument("self loop in feeder topology");
        auto key = std::minmax(e.from, e.to);
        if (!seen.insert(key).second)
            throw std::invalid_argument("duplicate edge in feeder topology");
        e.admittance = to_per_unit(e.params, topo.base);
    }

    // Connectivity: N edges, no duplicates/self-loops, so connected <=> tree.
    std::vector<int> stack{0};
    std::vector<bool> visited(n, false);
    visited[0] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& e : topo.edges) {
            int v = -1;
            if (e.from == u) v = e.to;
            if (e.to == u) v = e.from;
            if (v >= 0 && !visited[v]) {
                visited[v] = true;
                stack.push_back(v);
            }
        }
    }
    for (bool v : visited)
        if (!v) throw std::invalid_argument("feeder topology is disconnected");

    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    std::vector<Eigen::MatrixXd> edge_loss;
    Eigen::MatrixXd total_loss = Eigen::MatrixXd::Zero(n, n);
    edge_loss.reserve(topo.edges.size());
    for (const auto& e : topo.edges) {
        const Complex ys = e.admittance.series;
        const Complex yh = 0.5 * e.admittance.shunt_total;
        y(e.from, e.to) -= ys;
        y(e.to, e.from) -= ys;
        y(e.from, e.from) += ys + yh;
        y(e.to, e.to) += ys + yh;

        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        d(e.from) = 1.0;
        d(e.to) = -1.0;
        Eigen::MatrixXd lm = ys.real() * (d * d.transpose());
        total_loss += lm;
        edge_loss.push_back(std::move(lm));
    }

    return FeederModel(std::move(topo), std::move(y), std::move(edge_loss),
                       std::move(total_loss));
}

namespace {

NodeRole parse_role(const std::string& s) {
    if (s == "slack") return NodeRole::Slack;
    if (s == "pole") return NodeRole::Pole;
    if (s == "house") return NodeRole::House;
    throw std::invalid_argument("unknown node role: " + s);
}

LineKind parse_kind(const std::string& s) {
    if (s == "drop") return LineKind::Drop;
    if (s == "pole-pole") return LineKind::PolePole;
    throw std::invalid_argument("unknown line kind: " + s);
}

}  // namespace

FeederModel load_feeder(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open feeder file: " + path);
    nlohmann::json j;
    in >> j;

    FeederTopology topo;
    if (j.contains("bases")) {
        const auto& b = j["bases"];
        topo.base.s_base_va = b.value("s_base_va", topo.base.s_base_va);
        topo.base.v_base_v = b.value("v_base_v", topo.base.v_base_v);
        topo.base.frequency_hz = b.value("frequency_hz", topo.base.frequency_hz);
    }

    const auto& nodes = j.at("nodes");
    topo.roles.resize(nodes.size());
    std::vector<bool> filled(nodes.size(), false);
    for (const auto& nd : nodes) {
        const int id = nd.at("id").get<int>();
        if (id < 0 || id >= static_cast<int>(nodes.size()))
            throw std::invalid_argument("node id out of range in " + path);
        if (filled[id]) throw std::invalid_argument("duplicate node id in " + path);
        filled[id] = true;
        topo.roles[id] = parse_role(nd.at("role").get<std::string>());
    }

    for (const auto& ed : j.at("edges")) {
        FeederEdge e;
        e.from = ed.at("from").get<int>();
        e.to = ed.at("to").get<int>();
        e.params.kind = parse_kind(ed.at("kind").get<std::string>());
        e.params.length_m = ed.at("length_m").get<double>();
        e.params.r_ohm_per_km = ed.at("R_ohm_per_km").get<double>();
        e.params.l_mh_per_km = ed.at("L_mH_per_km").get<double>();
        e.params.c_uf_per_km = ed.at("C_uF_per_km").get<double>();
        topo.edges.push_back(e);
    }
    return build_feeder(topo);
}

FeederTopology fixture_feeder_topology() {
    FeederTopology topo;
    topo.base = PerUnitBase{};  // 10 kVA, 240 V, 60 Hz
    topo.roles.assign(19, NodeRole::House);
    topo.roles[0] = NodeRole::Slack;
    for (int p : {2, 5, 8, 11, 14, 17}) topo.roles[p] = NodeRole::Pole;

    LineParams pole;
    pole.r_ohm_per_km = 0.270;
    pole.l_mh_per_km = 0.240;
    pole.c_uf_per_km = 0.072;
    pole.length_m = 50.0;
    pole.kind = LineKind::PolePole;

    LineParams drop;
    drop.r_ohm_per_km = 0.549;
    drop.l_mh_per_km = 0.230;
    drop.c_uf_per_km = 0.055;
    drop.length_m = 20.0;
    drop.kind = LineKind::Drop;

    auto add = [&topo](int a, int b, const LineParams& p) {
        FeederEdge e;
        e.from = a;
        e.to = b;
        e.params = p;
        topo.edges.push_back(e);
    };

    add(0, 2, pole);
    add(2, 5, pole);
    add(5, 8, pole);
    add(8, 11, pole);
    add(11, 14, pole);
    add(14, 17, pole);
    const int pole_of[12] = {2, 2, 5, 5, 8, 8, 11, 11, 14, 14, 17, 17};
    const int house_node[12] = {1, 3, 4, 6, 7, 9, 10, 12, 13, 15, 16, 18};
    for (int h = 0; h < 12; ++h) add(pole_of[h], house_node[h], drop);
    return topo;
}

}  // namespace oid
